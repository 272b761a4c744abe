"""Multilevel KLFM bipartitioner for multi-personality, multi-resource hypergraphs."""

from .graph import (
    ConstraintSet,
    GraphError,
    Hyperedge,
    Hypergraph,
    MoveError,
    Node,
    PartitionState,
    Personality,
    build_graph,
    recompute_state,
    uniform_state,
)
from .metrics import (
    MetricError,
    ScoreReport,
    auto_capacities,
    balance_violations,
    cut_size,
    imbalance_score,
    is_feasible,
    max_violation_ratio,
    pair_rur_score,
    per_resource_imbalance,
    rur_score,
    score_partition,
)
from .mphio import MphError, read_mph, read_mph_text, write_mph, write_mph_text
from .generator import BenchmarkProfile, PRESETS, ProfileError, generate, preset_profile
from .oracle import OracleError, OracleResult, oracle_partition
from .coarsen import CoarsenParams, Level, ProjectionError, coarsen, project, select_personality_basis
from .buckets import MoveChoice, PassBuckets, hybrid_select, mp_bucket_select, ra_bucket_select, update_after_move
from .remap import (
    RemapObjective,
    fracture,
    fractured_ilp_remap,
    greedy_remap,
    remap_to_common_resource,
    solve_fragment,
)
from .refine import (
    MultilevelResult,
    PassRecord,
    RefineConfig,
    RelaxationSchedule,
    effective_margins,
    initial_partition,
    multilevel_partition,
    run_pass,
    refine_level,
)
from .strategies import (
    STRATEGY_KINDS,
    StrategyConfig,
    StrategyReport,
    RunRecord,
    SuiteRow,
    aggregate,
    run_strategy,
)

__version__ = "0.1.0"
