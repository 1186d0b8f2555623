"""Derived graphs: Gaifman, incidence, their tree-ordered variants, the
double-incidence decoder, and starification."""

from __future__ import annotations

from typing import Optional

from .core import (
    GRAPH_SIGNATURE,
    MarkSet,
    Signature,
    TreeOrder,
    TreeOrderedStructure,
)
from .errors import DecodeFailure, InvalidMarking, TowsError
from .graphs import BipartiteGraph, Graph

__all__ = [
    "gaifman",
    "tgaif",
    "incidence",
    "tinc",
    "mark_tinc2",
    "tinc_decode",
    "starify",
    "tuple_vertex_name",
]


def tuple_vertex_name(symbol: str, index: int) -> str:
    """Stable name of the tuple-vertex for the index-th tuple of a relation."""
    return f"{symbol}:{index}"


def _tuple_vertices(st: TreeOrderedStructure):
    """Tuple-vertices (name, symbol, tuple) in deterministic enumeration order."""
    out = []
    for name in st.signature.symbols:
        for i, t in enumerate(st.tuples(name)):
            out.append((tuple_vertex_name(name, i), name, t))
    return out


def gaifman(st: TreeOrderedStructure) -> Graph:
    """Vertices are the universe; u ~ v when distinct u, v share a tuple."""
    edges = set()
    for name in st.signature.symbols:
        for t in st.relations[name]:
            support = sorted(set(t), key=st.order.index)
            for i, u in enumerate(support):
                for v in support[i + 1 :]:
                    edges.add((u, v))
    return Graph(st.universe, edges)


def tgaif(st: TreeOrderedStructure) -> TreeOrderedStructure:
    """Tree-ordered Gaifman graph: same order, E = Gaifman edges."""
    g = gaifman(st)
    return TreeOrderedStructure(st.order, GRAPH_SIGNATURE, {"E": g.edges})


def incidence(st) -> BipartiteGraph:
    """Bipartite incidence graph between elements and relation tuples.

    Symmetric relations contribute one tuple-vertex per unordered edge, so
    the incidence graph of a graph is its 1-subdivision.  Accepts a plain
    Graph as well as a structure.
    """
    if isinstance(st, Graph):
        names = [tuple_vertex_name("E", i) for i in range(len(st.edges))]
        edges = []
        for tv, (u, v) in zip(names, st.sorted_edges()):
            edges.append((u, tv))
            edges.append((v, tv))
        return BipartiteGraph(st.vertices, names, edges)
    tuple_vertices = _tuple_vertices(st)
    edges = []
    for tv, _, t in tuple_vertices:
        for u in sorted(set(t), key=st.order.index):
            edges.append((u, tv))
    return BipartiteGraph(st.universe, tuple(tv for tv, _, _ in tuple_vertices), edges)


def tinc(st: TreeOrderedStructure) -> TreeOrderedStructure:
    """Tree-ordered incidence graph.

    The E-reduct is the incidence graph of the relational part; the order is
    the input order with every tuple-vertex added as a child of the root.
    """
    inc = incidence(st)
    universe = st.universe + inc.part_b
    parent = dict(st.order.parent)
    for tv in inc.part_b:
        parent[tv] = st.root
    order = TreeOrder(universe, st.root, parent)
    return TreeOrderedStructure(order, GRAPH_SIGNATURE, {"E": inc.edges})


def mark_tinc2(st: TreeOrderedStructure):
    """Apply tinc twice and mark the result for decoding.

    Marks: V on the original domain, P on first-level tuple-vertices, and
    M1..Mk recording at which positions each second-level incidence vertex
    sits in its tuple.  Second-level vertices are named SYM:i@p with p the
    smallest position of their element in the tuple.
    """
    first = tinc(st)
    tuple_vertices = _tuple_vertices(st)
    universe = list(first.universe)
    parent = dict(first.order.parent)
    edges = []
    position_marks = {}
    for tv, _, t in tuple_vertices:
        for u in sorted(set(t), key=st.order.index):
            positions = [p + 1 for p, e in enumerate(t) if e == u]
            sv = f"{tv}@{positions[0]}"
            universe.append(sv)
            parent[sv] = st.root
            edges.append((u, sv))
            edges.append((sv, tv))
            for p in positions:
                position_marks.setdefault(p, set()).add(sv)
    order = TreeOrder(universe, st.root, parent)
    out = TreeOrderedStructure(order, GRAPH_SIGNATURE, {"E": edges})
    marks = {
        "V": frozenset(st.universe),
        "P": frozenset(tv for tv, _, _ in tuple_vertices),
    }
    for p in range(1, st.signature.max_arity() + 1):
        marks[f"M{p}"] = frozenset(position_marks.get(p, ()))
    return out, MarkSet(marks)


def _infer_signature(tuples_by_symbol):
    entries = []
    for sym in sorted(tuples_by_symbol):
        arities = {len(t) for t in tuples_by_symbol[sym]}
        if len(arities) != 1:
            raise DecodeFailure(f"relation {sym!r} decoded with mixed arities", sym)
        entries.append((sym, arities.pop(), False))
    return Signature(tuple(entries))


def tinc_decode(
    st: TreeOrderedStructure,
    marks: MarkSet,
    signature: Optional[Signature] = None,
) -> TreeOrderedStructure:
    """Recover a structure from a marked double incidence graph.

    Expects the canonical marking produced by mark_tinc2.  Relation symbols
    are parsed from the P-vertex names (SYM:i); if no target signature is
    given, one is inferred with every relation non-symmetric.
    """
    marks.validate(st)
    domain = marks.get("V")
    pvertices = marks.get("P")
    position = {}
    for name, vals in marks.marks.items():
        if name.startswith("M") and name[1:].isdigit():
            position[int(name[1:])] = vals
    tuples_by_symbol = {}
    for tv in sorted(pvertices, key=st.order.index):
        if ":" not in tv:
            raise DecodeFailure(f"P-vertex {tv!r} has no parseable SYM:i name", tv)
        sym = tv.split(":", 1)[0]
        incident = [y for y in st.neighbors(tv) if y not in domain]
        pos_here = sorted(p for p, vals in position.items() if vals & set(incident))
        if not pos_here:
            raise DecodeFailure(f"tuple-vertex {tv!r} has no position marks", tv)
        arity = max(pos_here)
        if pos_here != list(range(1, arity + 1)):
            raise DecodeFailure(f"tuple-vertex {tv!r} misses positions", tv)
        entries = []
        for p in range(1, arity + 1):
            ys = [y for y in incident if y in position[p]]
            if len(ys) != 1:
                raise DecodeFailure(
                    f"tuple-vertex {tv!r} has {len(ys)} incidences at position {p}", tv
                )
            xs = [x for x in st.neighbors(ys[0]) if x in domain]
            if len(xs) != 1:
                raise DecodeFailure(
                    f"incidence vertex {ys[0]!r} has {len(xs)} domain neighbors", tv
                )
            entries.append(xs[0])
        tuples_by_symbol.setdefault(sym, []).append(tuple(entries))
    if signature is None:
        signature = _infer_signature(tuples_by_symbol)
    unknown = set(tuples_by_symbol) - set(signature.symbols)
    if unknown:
        raise DecodeFailure(f"decoded symbols outside signature: {sorted(unknown)}")
    universe = tuple(v for v in st.universe if v in domain)
    parent = {}
    dom = set(universe)
    for v in universe:
        if v == st.root:
            continue
        cur = st.order.parent[v]
        while cur not in dom:
            cur = st.order.parent[cur]
        parent[v] = cur
    if st.root not in dom:
        raise DecodeFailure("root is not V-marked")
    order = TreeOrder(universe, st.root, parent)
    return TreeOrderedStructure(
        order, signature, {sym: tuple(ts) for sym, ts in tuples_by_symbol.items()}
    )


def starify(st: TreeOrderedStructure, marks) -> Graph:
    """Union of E with a star forest contracting the unmarked tree parts.

    The mark set selects the part minima; each unmarked element is joined to
    its nearest marked strict ancestor.
    """
    if isinstance(marks, MarkSet):
        centers = set(marks.get("A"))
    else:
        centers = set(marks)
    for v in centers:
        st.order.index(v)
    if st.root not in centers:
        raise InvalidMarking("the root must be marked as a part minimum")
    if not st.is_graph():
        raise TowsError("starify expects a TOWS graph")
    edges = set(st.relations["E"])
    for v in st.universe:
        if v in centers:
            continue
        cur = st.order.parent[v]
        while cur not in centers:
            cur = st.order.parent[cur]
        edges.add((cur, v))
    return Graph(st.universe, edges)
