"""Reader/writer for the MPH hypergraph interchange format (v1).

Line-oriented text: a header, a counts line, one line per node, one line per
edge.  ``%`` starts a comment that runs to end of line; blank lines are
skipped.  Node ids are 1-based in files, 0-based in memory.  The writer emits
the canonical form: fixed section comments, single spaces, pins sorted,
trailing newline.
"""

from .graph import Hypergraph, build_graph

NODE_COMMENT = "% N node lines: <locked:0|1> <k> then k groups of R integers"
EDGE_COMMENT = "% M edge lines: <weight> <pincount> <pins...>"


class MphError(ValueError):
    pass


def _tokens(text: str):
    """Yield (line_number, token_list) for content lines, comments stripped."""
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("%", 1)[0].strip()
        if not body:
            continue
        yield ln, body.split()


def _ints(tok, ln, section):
    try:
        return [int(t) for t in tok]
    except ValueError as exc:
        raise MphError(f"line {ln}: non-integer token in {section} line") from exc


def read_mph_text(text: str) -> Hypergraph:
    stream = _tokens(text)

    try:
        ln, tok = next(stream)
    except StopIteration:
        raise MphError("line 1: expected header 'MPH 1', got end of file") from None
    if tok != ["MPH", "1"]:
        raise MphError(f"line {ln}: expected header 'MPH 1', got {' '.join(tok)!r}")

    try:
        ln, tok = next(stream)
    except StopIteration:
        raise MphError("expected counts line '<N> <M> <R>', got end of file") from None
    counts = _ints(tok, ln, "counts")
    if len(counts) != 3:
        raise MphError(f"line {ln}: counts line must be '<N> <M> <R>'")
    n, m, r = counts
    if n < 0 or m < 0 or r < 1:
        raise MphError(f"line {ln}: bad counts N={n} M={m} R={r}")

    nodes = []
    for i in range(n):
        try:
            ln, tok = next(stream)
        except StopIteration:
            raise MphError(f"expected node line {i + 1} of {n}, got end of file") from None
        vals = _ints(tok, ln, "node")
        if len(vals) < 2:
            raise MphError(f"line {ln}: node line needs '<locked> <k>' prefix")
        locked, k = vals[0], vals[1]
        if locked not in (0, 1):
            raise MphError(f"line {ln}: locked flag must be 0 or 1")
        if k < 1 or len(vals) != 2 + k * r:
            raise MphError(f"line {ln}: node line needs {k} groups of {r} weights, got {len(vals) - 2} integers")
        pers = [tuple(vals[2 + j * r : 2 + (j + 1) * r]) for j in range(k)]
        nodes.append((pers, bool(locked)))

    edges = []
    for j in range(m):
        try:
            ln, tok = next(stream)
        except StopIteration:
            raise MphError(f"expected edge line {j + 1} of {m}, got end of file") from None
        vals = _ints(tok, ln, "edge")
        if len(vals) < 2:
            raise MphError(f"line {ln}: edge line needs '<weight> <pincount>' prefix")
        weight, k = vals[0], vals[1]
        if len(vals) != 2 + k:
            raise MphError(f"line {ln}: edge line declares {k} pins, got {len(vals) - 2}")
        pins = []
        for p in vals[2:]:
            if p < 1:
                raise MphError(f"line {ln}: pin ids are 1-based, got {p}")
            pins.append(p - 1)
        edges.append((weight, pins))

    for ln, tok in stream:
        raise MphError(f"line {ln}: trailing content after {m} edge lines")

    return build_graph(r, nodes, edges)


def read_mph(path) -> Hypergraph:
    """Parse an MPH file; raises MphError with a line number on malformed input."""
    with open(path, "r", encoding="ascii") as fh:
        return read_mph_text(fh.read())


def write_mph_text(graph: Hypergraph) -> str:
    out = ["MPH 1", f"{graph.num_nodes} {graph.num_edges} {graph.resource_count}", NODE_COMMENT]
    for v in range(graph.num_nodes):
        parts = ["1" if graph.locked[v] else "0", str(len(graph.pweights[v]))]
        for w in graph.pweights[v]:
            parts.extend(str(x) for x in w)
        out.append(" ".join(parts))
    out.append(EDGE_COMMENT)
    for e in range(graph.num_edges):
        pins = sorted(graph.pins[e])
        parts = [str(graph.edge_weight[e]), str(len(pins))]
        parts.extend(str(p + 1) for p in pins)
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def write_mph(graph: Hypergraph, path) -> None:
    """Write the canonical form (stable bytes for a given graph)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(write_mph_text(graph))
