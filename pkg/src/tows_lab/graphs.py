"""Plain, bipartite, and ordered bipartite graphs plus small search engines."""

from __future__ import annotations

from typing import Iterable, Optional

from .errors import ElementNotFound, TowsError

__all__ = [
    "Graph",
    "BipartiteGraph",
    "OrderedBipartite",
    "subdivide",
    "complete_bipartite",
    "path_graph",
    "cycle_graph",
    "complete_graph",
    "graph_iso",
    "induced_subgraph_iso",
]


class Graph:
    """A finite simple graph over string vertices.

    The vertex tuple fixes the deterministic enumeration order.
    """

    __slots__ = ("vertices", "edges", "_index", "_adj")

    def __init__(self, vertices: Iterable[str], edges: Iterable = ()):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise TowsError("duplicate vertices")
        self._index = {v: i for i, v in enumerate(self.vertices)}
        es = set()
        for u, v in edges:
            if u not in self._index or v not in self._index:
                raise ElementNotFound(f"edge ({u!r}, {v!r}) leaves the vertex set")
            es.add(self._canon(u, v))
        self.edges = frozenset(es)
        self._adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            self._adj[u].add(v)
            self._adj[v].add(u)

    def _canon(self, u, v):
        # canonical pair order is lexicographic on tokens, so that edge sets
        # compare equal across graphs with different vertex orders
        if u == v:
            raise TowsError(f"loop at {u!r} not allowed")
        return (u, v) if u <= v else (v, u)

    def index(self, v):
        try:
            return self._index[v]
        except KeyError:
            raise ElementNotFound(f"vertex {v!r} not in graph") from None

    def __len__(self):
        return len(self.vertices)

    def adjacent(self, u, v):
        return v in self._adj.get(u, ())

    def neighbors(self, v):
        self.index(v)
        return sorted(self._adj[v], key=self._index.__getitem__)

    def degree(self, v):
        self.index(v)
        return len(self._adj[v])

    def sorted_edges(self):
        return sorted(self.edges, key=lambda e: (self._index[e[0]], self._index[e[1]]))

    def subgraph(self, keep):
        keep = set(keep)
        return Graph(
            tuple(v for v in self.vertices if v in keep),
            (e for e in self.edges if e[0] in keep and e[1] in keep),
        )

    def without_edges(self, drop):
        drop = {self._canon(u, v) for u, v in drop}
        return Graph(self.vertices, self.edges - drop)

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and set(self.vertices) == set(other.vertices)
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((frozenset(self.vertices), self.edges))

    def __repr__(self):
        return f"Graph(n={len(self.vertices)}, m={len(self.edges)})"


class BipartiteGraph:
    """A bipartite graph with designated parts."""

    __slots__ = ("part_a", "part_b", "edges")

    def __init__(self, part_a, part_b, edges):
        self.part_a = tuple(part_a)
        self.part_b = tuple(part_b)
        if set(self.part_a) & set(self.part_b):
            raise TowsError("parts must be disjoint")
        sa, sb = set(self.part_a), set(self.part_b)
        es = set()
        for a, b in edges:
            if a in sb and b in sa:
                a, b = b, a
            if a not in sa or b not in sb:
                raise ElementNotFound(f"edge ({a!r}, {b!r}) does not cross the parts")
            es.add((a, b))
        self.edges = frozenset(es)

    def as_graph(self):
        return Graph(self.part_a + self.part_b, self.edges)

    def sorted_edges(self):
        ia = {v: i for i, v in enumerate(self.part_a)}
        ib = {v: i for i, v in enumerate(self.part_b)}
        return sorted(self.edges, key=lambda e: (ia[e[0]], ib[e[1]]))

    def __repr__(self):
        return f"BipartiteGraph({len(self.part_a)}+{len(self.part_b)}, m={len(self.edges)})"


class OrderedBipartite(BipartiteGraph):
    """A bipartite graph whose parts carry linear orders (the tuple order)."""

    def predecessor_a(self, v):
        i = self.part_a.index(v)
        return self.part_a[i - 1] if i > 0 else None

    def predecessor_b(self, v):
        i = self.part_b.index(v)
        return self.part_b[i - 1] if i > 0 else None


def subdivide(graph: Graph, t: int, name=None) -> Graph:
    """The t-subdivision: every edge replaced by a path with t inner vertices."""
    if name is None:
        name = lambda u, v, k: f"{u}--{v}:{k}"
    vertices = list(graph.vertices)
    edges = []
    for u, v in graph.sorted_edges():
        chain = [u] + [name(u, v, k) for k in range(1, t + 1)] + [v]
        vertices.extend(chain[1:-1])
        edges.extend(zip(chain, chain[1:]))
    return Graph(vertices, edges)


def complete_bipartite(s: int, t: int) -> BipartiteGraph:
    part_a = tuple(f"x{i}" for i in range(1, s + 1))
    part_b = tuple(f"y{j}" for j in range(1, t + 1))
    return BipartiteGraph(part_a, part_b, [(a, b) for a in part_a for b in part_b])


def path_graph(n: int) -> Graph:
    vs = tuple(f"v{i}" for i in range(1, n + 1))
    return Graph(vs, zip(vs, vs[1:]))


def cycle_graph(n: int) -> Graph:
    vs = tuple(f"v{i}" for i in range(1, n + 1))
    return Graph(vs, list(zip(vs, vs[1:])) + [(vs[-1], vs[0])])


def complete_graph(n: int) -> Graph:
    vs = tuple(f"v{i}" for i in range(1, n + 1))
    return Graph(vs, [(u, v) for i, u in enumerate(vs) for v in vs[i + 1 :]])


def _joint_wl(g: Graph, h: Graph):
    graphs = (g, h)
    colors = [{}, {}]
    table = {}
    for s, gr in enumerate(graphs):
        for v in gr.vertices:
            colors[s][v] = table.setdefault(gr.degree(v), len(table))
    for _ in range(max(len(g), len(h))):
        table = {}
        new = [{}, {}]
        for s, gr in enumerate(graphs):
            for v in gr.vertices:
                key = (
                    colors[s][v],
                    tuple(sorted(colors[s][u] for u in gr.neighbors(v))),
                )
                new[s][v] = table.setdefault(key, len(table))
        before = len(set(colors[0].values()) | set(colors[1].values()))
        colors = new
        if len(table) == before:
            break
    return colors[0], colors[1]


def graph_iso(g: Graph, h: Graph) -> Optional[dict]:
    """Exact graph isomorphism via refinement-guided backtracking."""
    if len(g) != len(h) or len(g.edges) != len(h.edges):
        return None
    cg, ch = _joint_wl(g, h)
    classes_h = {}
    for v in h.vertices:
        classes_h.setdefault(ch[v], []).append(v)
    sizes_g = {}
    for v in g.vertices:
        sizes_g[cg[v]] = sizes_g.get(cg[v], 0) + 1
    if sizes_g != {c: len(vs) for c, vs in classes_h.items()}:
        return None
    # order: vertices adjacent to already-placed ones first, rarest color first
    order = []
    placed = set()
    remaining = set(g.vertices)
    while remaining:
        frontier = [v for v in remaining if any(u in placed for u in g.neighbors(v))]
        pool = frontier or list(remaining)
        pool.sort(key=lambda v: (sizes_g[cg[v]], g.index(v)))
        v = pool[0]
        order.append(v)
        placed.add(v)
        remaining.remove(v)
    mapping = {}
    used = set()

    def backtrack(pos):
        if pos == len(order):
            return True
        v = order[pos]
        for w in sorted(classes_h.get(cg[v], ()), key=h.index):
            if w in used:
                continue
            ok = True
            for u in g.neighbors(v):
                if u in mapping and not h.adjacent(w, mapping[u]):
                    ok = False
                    break
            if ok:
                for u in mapping:
                    if not g.adjacent(v, u) and h.adjacent(w, mapping[u]):
                        ok = False
                        break
            if not ok:
                continue
            mapping[v] = w
            used.add(w)
            if backtrack(pos + 1):
                return True
            del mapping[v]
            used.remove(w)
        return False

    if not backtrack(0):
        return None
    return dict(mapping)


def induced_subgraph_iso(pattern: Graph, host: Graph) -> Optional[dict]:
    """An injective map realizing pattern as an induced subgraph of host."""
    if len(pattern) > len(host):
        return None
    porder = []
    placed = set()
    remaining = set(pattern.vertices)
    while remaining:
        frontier = [v for v in remaining if any(u in placed for u in pattern.neighbors(v))]
        pool = frontier or list(remaining)
        pool.sort(key=lambda v: (-pattern.degree(v), pattern.index(v)))
        v = pool[0]
        porder.append(v)
        placed.add(v)
        remaining.remove(v)
    mapping = {}
    used = set()

    def backtrack(pos):
        if pos == len(porder):
            return True
        v = porder[pos]
        for w in host.vertices:
            if w in used or host.degree(w) < pattern.degree(v):
                continue
            ok = True
            for u in mapping:
                if pattern.adjacent(v, u) != host.adjacent(w, mapping[u]):
                    ok = False
                    break
            if not ok:
                continue
            mapping[v] = w
            used.add(w)
            if backtrack(pos + 1):
                return True
            del mapping[v]
            used.remove(w)
        return False

    if not backtrack(0):
        return None
    return dict(mapping)
