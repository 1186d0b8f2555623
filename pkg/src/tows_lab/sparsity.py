"""Desk-scale graph oracles: bicliques, induced clique subdivisions,
depth-1 minors, minor containment, and exact twin-width."""

from __future__ import annotations

from itertools import combinations

from .errors import TowsError
from .graphs import Graph, complete_graph, graph_iso, induced_subgraph_iso, subdivide
from .limits import guard

__all__ = [
    "biclique_number",
    "naive_biclique_number",
    "has_biclique",
    "induced_clique_subdivision",
    "depth1_minors",
    "is_minor",
    "red_width",
    "tww_exact",
    "trigraph_of_partition",
]


def has_biclique(g: Graph, t: int) -> bool:
    """Does K_{t,t} occur as a (not necessarily induced) subgraph?"""
    if t <= 0:
        return True
    n = len(g)
    if 2 * t > n:
        return False
    vertices = list(g.vertices)

    def rec(start, chosen, common):
        if len(chosen) == t:
            return len(common - set(chosen)) >= t
        needed = t - len(chosen)
        for k in range(start, n - needed + 1):
            v = vertices[k]
            new_common = common & set(g.neighbors(v)) if chosen else set(g.neighbors(v))
            if len(new_common - set(chosen) - {v}) < t:
                continue
            chosen.append(v)
            if rec(k + 1, chosen, new_common):
                return True
            chosen.pop()
        return False

    return rec(0, [], set())


def biclique_number(g: Graph, bound=20) -> int:
    """Largest t with K_{t,t} as a subgraph; 0 for edgeless graphs."""
    guard(len(g), bound, "biclique_number")
    if not g.edges:
        return 0
    t = 1
    while has_biclique(g, t + 1):
        t += 1
    return t


def naive_biclique_number(g: Graph, bound=10) -> int:
    """Independent oracle: scan all pairs of disjoint vertex subsets."""
    guard(len(g), bound, "naive_biclique_number")
    best = 0
    vertices = list(g.vertices)
    for t in range(1, len(g) // 2 + 1):
        found = False
        for a_side in combinations(vertices, t):
            common = set(vertices)
            for v in a_side:
                common &= set(g.neighbors(v))
            if len(common - set(a_side)) >= t:
                found = True
                break
        if found:
            best = t
        else:
            break
    return best


def induced_clique_subdivision(g: Graph, t: int, n: int, bound=20) -> bool:
    """Does the exact t-subdivision of K_n embed as an induced subgraph?"""
    guard(len(g), bound, "induced_clique_subdivision")
    if n < 1 or t < 0:
        raise TowsError("need n >= 1 and t >= 0")
    pattern = subdivide(complete_graph(n), t)
    return induced_subgraph_iso(pattern, g) is not None


def _star_partitions(g: Graph):
    """All partitions of the vertex set into singletons and stars."""
    vertices = list(g.vertices)

    def rec(unassigned):
        if not unassigned:
            yield []
            return
        v = min(unassigned, key=g.index)
        rest = unassigned - {v}
        # v alone
        for parts in rec(rest):
            yield [(v, frozenset())] + parts
        # v the center of a star
        nbrs = [u for u in g.neighbors(v) if u in rest]
        for r in range(1, len(nbrs) + 1):
            for leaves in combinations(nbrs, r):
                for parts in rec(rest - set(leaves)):
                    yield [(v, frozenset(leaves))] + parts
        # v a leaf of a star centered at a later vertex
        for c in nbrs:
            others = [u for u in g.neighbors(c) if u in rest and u != v]
            for r in range(0, len(others) + 1):
                for extra in combinations(others, r):
                    leaves = frozenset((v,) + extra)
                    for parts in rec(rest - {c} - leaves):
                        yield [(c, leaves)] + parts

    yield from rec(set(vertices))


def depth1_minors(g: Graph, bound=10):
    """All minors obtained by contracting a star forest then deleting.

    Returns class representatives up to isomorphism; the empty graph is
    excluded.
    """
    guard(len(g), bound, "depth1_minors")
    from .minors import IsoClasses

    classes = IsoClasses(kind="graph")
    for parts in _star_partitions(g):
        owner = {}
        for center, leaves in parts:
            owner[center] = center
            for leaf in leaves:
                owner[leaf] = center
        edges = set()
        for u, v in g.edges:
            cu, cv = owner[u], owner[v]
            if cu != cv:
                edges.add((cu, cv))
        classes.add(Graph(sorted({c for c, _ in parts}, key=g.index), edges))
    # close downwards under vertex and edge deletions
    frontier = list(classes.reps)
    while frontier:
        cur = frontier.pop()
        children = []
        if len(cur) > 1:
            for v in cur.vertices:
                children.append(cur.subgraph(u for u in cur.vertices if u != v))
        for e in cur.sorted_edges():
            children.append(cur.without_edges([e]))
        for child in children:
            if classes.contains(child) is None:
                classes.add(child)
                frontier.append(child)
    return list(classes.reps)


def _connected_subsets(g: Graph, available, max_size):
    """Connected subsets of available, each yielded once (canonical seed)."""
    available = sorted(available, key=g.index)
    seen = set()
    for i, seed in enumerate(available):
        allowed = set(available[i:])
        stack = [(frozenset([seed]), frozenset(u for u in g.neighbors(seed) if u in allowed))]
        while stack:
            current, frontier = stack.pop()
            if current not in seen:
                seen.add(current)
                yield current
                if len(current) < max_size:
                    for u in sorted(frontier, key=g.index):
                        grown = current | {u}
                        new_frontier = (frontier | set(
                            w for w in g.neighbors(u) if w in allowed
                        )) - grown
                        stack.append((grown, new_frontier))


def is_minor(h: Graph, g: Graph, bound=10) -> bool:
    """Branch-and-bound minor containment test."""
    guard(len(g), bound, "is_minor")
    if len(h) == 0:
        return True
    if len(h) > len(g) or len(h.edges) > len(g.edges):
        return False
    horder = sorted(h.vertices, key=lambda v: (-h.degree(v), h.index(v)))

    def rec(i, available, sets):
        if i == len(horder):
            return True
        hv = horder[i]
        remaining_needed = len(horder) - i - 1
        for branch in _connected_subsets(g, available, len(available) - remaining_needed):
            ok = True
            for j in range(i):
                if h.adjacent(hv, horder[j]):
                    if not any(
                        g.adjacent(x, y) for x in branch for y in sets[j]
                    ):
                        ok = False
                        break
            if not ok:
                continue
            sets.append(branch)
            if rec(i + 1, available - branch, sets):
                return True
            sets.pop()
        return False

    return rec(0, frozenset(g.vertices), [])


def _merge_partition(partition, a, b):
    merged = frozenset(p for p in partition if p != a and p != b) | {a | b}
    return merged


def trigraph_of_partition(g: Graph, partition):
    """Black/red edges of the trigraph whose vertices are the parts.

    A pair of parts is black when complete in g, red when mixed, absent
    when empty; this depends only on the partition, not the merge order.
    """
    parts = sorted(partition, key=lambda p: min(g.index(v) for v in p))
    black, red = set(), set()
    for i, p in enumerate(parts):
        for q in parts[i + 1 :]:
            count = sum(1 for x in p for y in q if g.adjacent(x, y))
            if count == len(p) * len(q):
                black.add((p, q))
            elif count > 0:
                red.add((p, q))
    return parts, black, red


def _max_red_degree(parts, red):
    deg = {p: 0 for p in parts}
    for p, q in red:
        deg[p] += 1
        deg[q] += 1
    return max(deg.values(), default=0)


def red_width(g: Graph, sequence) -> int:
    """Maximum red degree along a full contraction sequence."""
    sequence = list(sequence)
    if len(sequence) != max(len(g) - 1, 0):
        raise TowsError(
            f"sequence has {len(sequence)} merges, expected {len(g) - 1}"
        )
    part_of = {v: frozenset([v]) for v in g.vertices}
    partition = frozenset(part_of.values())
    width = 0
    for u, v in sequence:
        g.index(u)
        g.index(v)
        pu, pv = part_of[u], part_of[v]
        if pu == pv:
            raise TowsError(f"merge ({u!r}, {v!r}) targets one part twice")
        partition = _merge_partition(partition, pu, pv)
        merged = pu | pv
        for x in merged:
            part_of[x] = merged
        parts, black, red = trigraph_of_partition(g, partition)
        width = max(width, _max_red_degree(parts, red))
    return width


def tww_exact(g: Graph, bound=8, return_sequence=False):
    """Exact twin-width by dynamic programming over vertex partitions.

    The trigraph after any merge sequence depends only on the resulting
    partition, so states are partitions (Bell(n) of them) and the value
    function needs no isomorphism tests.
    """
    guard(len(g), bound, "tww_exact")
    if len(g) <= 1:
        return (0, []) if return_sequence else 0
    memo = {}
    best_merge = {}

    def value(partition):
        if len(partition) == 1:
            return 0
        if partition in memo:
            return memo[partition]
        parts = sorted(partition, key=lambda p: min(g.index(v) for v in p))
        best = None
        choice = None
        for i, p in enumerate(parts):
            for q in parts[i + 1 :]:
                nxt = _merge_partition(partition, p, q)
                np, nb, nr = trigraph_of_partition(g, nxt)
                cost = max(_max_red_degree(np, nr), value(nxt))
                if best is None or cost < best:
                    best = cost
                    choice = (p, q)
        memo[partition] = best
        best_merge[partition] = choice
        return best

    start = frozenset(frozenset([v]) for v in g.vertices)
    width = value(start)
    if not return_sequence:
        return width
    sequence = []
    cur = start
    while len(cur) > 1:
        p, q = best_merge[cur]
        rep = min(p, key=g.index)
        other = min(q, key=g.index)
        sequence.append((rep, other))
        cur = _merge_partition(cur, p, q)
    return width, sequence
