"""Tree-ordered minor operations: contractions, deletions, Shrink, the
desk-scale closures Cont/Minor/Mon, sparsification, and the poset bridge
to the fundamental graph."""

from __future__ import annotations

from itertools import combinations

from .core import (
    GRAPH_SIGNATURE,
    MarkSet,
    TreeOrder,
    TreeOrderedStructure,
    induced,
    iso,
)
from .errors import ElementNotFound, NotACover, TowsError
from .graphs import Graph, graph_iso
from .limits import guard
from .matroid import lambda_graph

__all__ = [
    "contract_cover",
    "delete_vertex",
    "delete_tuple",
    "shrink",
    "enum_cont",
    "mon",
    "enum_minors",
    "sp",
    "sp_all",
    "minor_poset_check",
    "IsoClasses",
    "poset_iso",
]


def contract_cover(st: TreeOrderedStructure, cover) -> TreeOrderedStructure:
    """Identify the upper element of a cover with the element it covers.

    The lower element keeps its token; children of the removed element are
    re-parented to it; loops in symmetric relations are dropped, general
    tuples keep repeated entries.
    """
    u, v = cover
    st.order.index(u)
    st.order.index(v)
    if st.order.parent.get(v) != u:
        raise NotACover(f"({u!r}, {v!r}) is not a cover")
    universe = tuple(x for x in st.universe if x != v)
    parent = {}
    for x in universe:
        if x == st.root:
            continue
        p = st.order.parent[x]
        parent[x] = u if p == v else p
    order = TreeOrder(universe, st.root, parent)
    relations = {}
    for name, arity, symmetric in st.signature.entries:
        new = []
        for t in st.relations[name]:
            img = tuple(u if e == v else e for e in t)
            if symmetric and img[0] == img[1]:
                continue
            new.append(img)
        relations[name] = new
    return TreeOrderedStructure(order, st.signature, relations)


def delete_vertex(st: TreeOrderedStructure, v) -> TreeOrderedStructure:
    """Remove a non-root element, taking the induced substructure."""
    st.order.index(v)
    if v == st.root:
        raise TowsError("the root cannot be deleted")
    return induced(st, (x for x in st.universe if x != v))


def delete_tuple(st: TreeOrderedStructure, name, t) -> TreeOrderedStructure:
    """Remove one tuple from one relation."""
    entries = tuple(t)
    if st.signature.is_symmetric(name):
        a, b = entries
        if st.order.index(a) > st.order.index(b):
            entries = (b, a)
    if entries not in st.relations[name]:
        raise ElementNotFound(f"tuple {t} not in relation {name}")
    relations = dict(st.relations)
    relations[name] = st.relations[name] - {entries}
    return TreeOrderedStructure(st.order, st.signature, relations)


def shrink(st: TreeOrderedStructure, v_mark, d_mark=()) -> TreeOrderedStructure:
    """Marking-driven induced tree-ordered minor.

    Surviving elements are the V-and-not-D marked ones plus the root; every
    element maps to its deepest surviving ancestor-or-self, and a tuple
    survives unless one of its entries other than the root is D-marked.
    Equal to the deletions (D) followed by the cover contractions the
    marking encodes.
    """
    if isinstance(v_mark, MarkSet):
        marks = v_mark
        v_mark, d_mark = marks.get("V"), marks.get("D")
    v_mark = set(v_mark)
    d_mark = set(d_mark)
    for x in v_mark | d_mark:
        st.order.index(x)
    alive = {x for x in st.universe if (x in v_mark and x not in d_mark)}
    alive.add(st.root)

    rep = {}
    for x in st.universe:
        cur = x
        while cur not in alive:
            cur = st.order.parent[cur]
        rep[x] = cur

    universe = tuple(x for x in st.universe if x in alive)
    parent = {}
    for x in universe:
        if x == st.root:
            continue
        cur = st.order.parent[x]
        while cur not in alive:
            cur = st.order.parent[cur]
        parent[x] = cur
    order = TreeOrder(universe, st.root, parent)

    relations = {}
    for name, arity, symmetric in st.signature.entries:
        new = []
        for t in st.relations[name]:
            if any(e in d_mark and e != st.root for e in t):
                continue
            img = tuple(rep[e] for e in t)
            if symmetric and img[0] == img[1]:
                continue
            new.append(img)
        relations[name] = new
    return TreeOrderedStructure(order, st.signature, relations)


class IsoClasses:
    """Deduplication of structures (or graphs) up to isomorphism."""

    def __init__(self, kind="structure"):
        self.kind = kind
        self.buckets = {}
        self.reps = []

    def _key(self, obj):
        if self.kind == "graph":
            degs = tuple(sorted(obj.degree(v) for v in obj.vertices))
            return (len(obj.vertices), len(obj.edges), degs)
        depths = tuple(sorted(obj.order.depth(v) for v in obj.universe))
        sizes = tuple(sorted((k, len(v)) for k, v in obj.relations.items()))
        return (len(obj.universe), depths, sizes)

    def add(self, obj):
        """Insert; returns the class representative."""
        key = self._key(obj)
        bucket = self.buckets.setdefault(key, [])
        for rep in bucket:
            same = (
                graph_iso(obj, rep) if self.kind == "graph" else iso(obj, rep)
            )
            if same is not None:
                return rep
        bucket.append(obj)
        self.reps.append(obj)
        return obj

    def contains(self, obj):
        key = self._key(obj)
        for rep in self.buckets.get(key, ()):
            same = graph_iso(obj, rep) if self.kind == "graph" else iso(obj, rep)
            if same is not None:
                return rep
        return None

    def __len__(self):
        return len(self.reps)


def _subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from combinations(items, r)


def enum_cont(st: TreeOrderedStructure, bound=10):
    """All induced tree-ordered minors up to isomorphism.

    Generated by all (deleted, contracted) markings via shrink, then
    deduplicated.
    """
    guard(len(st.universe), bound, "enum_cont")
    non_root = [v for v in st.universe if v != st.root]
    classes = IsoClasses()
    for deleted in _subsets(non_root):
        remaining = [v for v in non_root if v not in set(deleted)]
        for minima in _subsets(remaining):
            out = shrink(st, set(minima) | {st.root}, set(deleted))
            classes.add(out)
    return list(classes.reps)


def _tuple_deletion_variants(st: TreeOrderedStructure):
    """All structures reachable by deleting a subset of tuples per relation."""
    variants = [st.relations]
    for name in st.signature.symbols:
        tuples = sorted(st.relations[name])
        new_variants = []
        for rels in variants:
            for keep in _subsets(tuples):
                cur = dict(rels)
                cur[name] = frozenset(keep)
                new_variants.append(cur)
        variants = new_variants
    return [TreeOrderedStructure(st.order, st.signature, rels) for rels in variants]


def mon(st: TreeOrderedStructure, bound=10):
    """Closure under tuple deletions only, up to isomorphism."""
    total = sum(len(v) for v in st.relations.values())
    guard(total, bound, "mon")
    classes = IsoClasses()
    for out in _tuple_deletion_variants(st):
        classes.add(out)
    return list(classes.reps)


def enum_minors(st: TreeOrderedStructure, bound=10):
    """All tree-ordered minors up to isomorphism (Cont closed under
    tuple deletions)."""
    guard(len(st.universe), bound, "enum_minors")
    non_root = [v for v in st.universe if v != st.root]
    classes = IsoClasses()
    for deleted in _subsets(non_root):
        remaining = [v for v in non_root if v not in set(deleted)]
        for minima in _subsets(remaining):
            contracted = shrink(st, set(minima) | {st.root}, set(deleted))
            for out in _tuple_deletion_variants(contracted):
                classes.add(out)
    return list(classes.reps)


def _with_cover_edges(st: TreeOrderedStructure) -> TreeOrderedStructure:
    if not st.is_graph():
        raise TowsError("sp expects a TOWS graph")
    edges = set(st.relations["E"])
    for v in st.universe:
        if v != st.root:
            edges.add((st.order.parent[v], v))
    return TreeOrderedStructure(st.order, GRAPH_SIGNATURE, {"E": edges})


def sp(st: TreeOrderedStructure, v_mark, d_mark=()) -> Graph:
    """Sparsification: add cover edges to E, shrink, take the E-reduct."""
    shrunk = shrink(_with_cover_edges(st), v_mark, d_mark)
    return Graph(shrunk.universe, shrunk.relations["E"])


def sp_all(st: TreeOrderedStructure, bound=10):
    """E-reducts of all induced tree-ordered minors of the cover-augmented
    graph, up to graph isomorphism."""
    guard(len(st.universe), bound, "sp_all")
    augmented = _with_cover_edges(st)
    non_root = [v for v in st.universe if v != st.root]
    classes = IsoClasses(kind="graph")
    for deleted in _subsets(non_root):
        remaining = [v for v in non_root if v not in set(deleted)]
        for minima in _subsets(remaining):
            shrunk = shrink(augmented, set(minima) | {st.root}, set(deleted))
            classes.add(Graph(shrunk.universe, shrunk.relations["E"]))
    return list(classes.reps)


def _digraph_wl(elems1, le1, elems2, le2):
    """Joint refinement over strict order relations of two posets."""
    sets = ((elems1, le1), (elems2, le2))
    colors = [{}, {}]
    table = {}
    for s, (elems, le) in enumerate(sets):
        for x in elems:
            down = sum(1 for y in elems if y != x and le(y, x))
            up = sum(1 for y in elems if y != x and le(x, y))
            colors[s][x] = table.setdefault((down, up), len(table))
    for _ in range(max(len(elems1), len(elems2))):
        table = {}
        new = [{}, {}]
        for s, (elems, le) in enumerate(sets):
            for x in elems:
                below = tuple(sorted(colors[s][y] for y in elems if y != x and le(y, x)))
                above = tuple(sorted(colors[s][y] for y in elems if y != x and le(x, y)))
                new[s][x] = table.setdefault((colors[s][x], below, above), len(table))
        before = len(set(colors[0].values()) | set(colors[1].values()))
        colors = new
        if len(table) == before:
            break
    return colors[0], colors[1]


def poset_iso(elems1, le1, elems2, le2):
    """Backtracking poset isomorphism; le is a strict-or-equal comparison."""
    if len(elems1) != len(elems2):
        return None
    c1, c2 = _digraph_wl(elems1, le1, elems2, le2)
    classes2 = {}
    for x in elems2:
        classes2.setdefault(c2[x], []).append(x)
    sizes1 = {}
    for x in elems1:
        sizes1[c1[x]] = sizes1.get(c1[x], 0) + 1
    if sizes1 != {c: len(v) for c, v in classes2.items()}:
        return None
    mapping = {}
    used = set()
    order = sorted(range(len(elems1)), key=lambda i: sizes1[c1[elems1[i]]])

    def backtrack(pos):
        if pos == len(order):
            return True
        x = elems1[order[pos]]
        for y in classes2.get(c1[x], ()):
            if y in used:
                continue
            ok = True
            for a, b in mapping.items():
                if le1(x, a) != le2(y, b) or le1(a, x) != le2(b, y):
                    ok = False
                    break
            if not ok:
                continue
            mapping[x] = y
            used.add(y)
            if backtrack(pos + 1):
                return True
            del mapping[x]
            used.remove(y)
        return False

    return dict(mapping) if backtrack(0) else None


def minor_poset_check(st: TreeOrderedStructure, bound=9) -> bool:
    """Compare the minor poset of a TOWS graph with the induced-subgraph
    poset of its fundamental graph.

    Minors are encoded by subsets of covers (to contract) and edges (to
    delete); the fundamental-graph side takes induced subgraphs on the
    complementary vertex sets.  Both posets are reduced up to isomorphism
    and compared as abstract posets.
    """
    if not st.is_graph():
        raise TowsError("minor_poset_check expects a TOWS graph")
    covers = [v for v in st.universe if v != st.root]
    edges = st.tuples("E")
    guard(len(covers) + len(edges), bound, "minor_poset_check")

    # minor side: class of every (contract, delete) subset pair
    minor_classes = IsoClasses()
    subset_class = {}
    first_subset = {}
    for dropped in _subsets(range(len(edges))):
        pruned = TreeOrderedStructure(
            st.order,
            st.signature,
            {"E": [e for i, e in enumerate(edges) if i not in set(dropped)]},
        )
        for contracted in _subsets(range(len(covers))):
            minima = {v for i, v in enumerate(covers) if i not in set(contracted)}
            out = shrink(pruned, minima | {st.root}, set())
            rep = minor_classes.add(out)
            key = (frozenset(contracted), frozenset(dropped))
            subset_class[key] = id(rep)
            first_subset.setdefault(id(rep), key)

    minor_reps = list(minor_classes.reps)
    minor_le = {}
    for rep in minor_reps:
        y0, z0 = first_subset[id(rep)]
        reachable = set()
        for extra_y in _subsets([i for i in range(len(covers)) if i not in y0]):
            for extra_z in _subsets([i for i in range(len(edges)) if i not in z0]):
                key = (y0 | set(extra_y), z0 | set(extra_z))
                reachable.add(subset_class[frozenset(key[0]), frozenset(key[1])])
        minor_le[id(rep)] = reachable

    def le_minor(a, b):
        # a is a minor of b
        return id(a) in minor_le[id(b)]

    # fundamental-graph side: induced subgraphs of lambda as a plain graph
    lam = lambda_graph(st).as_graph()
    graph_classes = IsoClasses(kind="graph")
    vertex_list = list(lam.vertices)
    subset_gclass = {}
    first_gsubset = {}
    for keep in _subsets(range(len(vertex_list))):
        sub = lam.subgraph(vertex_list[i] for i in keep)
        rep = graph_classes.add(sub)
        subset_gclass[frozenset(keep)] = id(rep)
        first_gsubset.setdefault(id(rep), frozenset(keep))

    graph_reps = list(graph_classes.reps)
    graph_le = {}
    for rep in graph_reps:
        base = first_gsubset[id(rep)]
        reachable = {subset_gclass[frozenset(sub)] for sub in _subsets(base)}
        graph_le[id(rep)] = reachable

    def le_graph(a, b):
        return id(a) in graph_le[id(b)]

    return (
        poset_iso(minor_reps, le_minor, graph_reps, le_graph) is not None
    )
