"""Seed-controlled random instances for the property and acceptance suites."""

from __future__ import annotations

import random

from .core import Signature, TreeOrderedStructure, structure, tows_graph
from .graphs import BipartiteGraph, Graph, OrderedBipartite

__all__ = [
    "rng",
    "random_graph",
    "random_tows_graph",
    "random_structure",
    "random_bipartite",
    "random_ordered_bipartite",
    "random_cograph",
    "random_spanning_tree_ordering",
]


def rng(seed: int) -> random.Random:
    return random.Random(seed)


def random_graph(r: random.Random, n: int, p: float = 0.4) -> Graph:
    vs = [f"v{i}" for i in range(1, n + 1)]
    edges = [
        (vs[i], vs[j])
        for i in range(n)
        for j in range(i + 1, n)
        if r.random() < p
    ]
    return Graph(vs, edges)


def random_tows_graph(
    r: random.Random, n_elements: int, n_edges: int = None, p: float = 0.35
) -> TreeOrderedStructure:
    """Random rooted tree plus random E-edges over all element pairs."""
    names = ["r"] + [f"v{i}" for i in range(1, n_elements)]
    parent = {}
    for i, v in enumerate(names[1:], start=1):
        parent[v] = names[r.randrange(i)]
    pairs = [
        (names[i], names[j])
        for i in range(n_elements)
        for j in range(i + 1, n_elements)
    ]
    if n_edges is None:
        edges = [e for e in pairs if r.random() < p]
    else:
        edges = r.sample(pairs, min(n_edges, len(pairs)))
    return tows_graph(names, "r", parent, edges)


def random_structure(
    r: random.Random,
    n_elements: int,
    signature: Signature = None,
    tuples_per_relation: int = 3,
) -> TreeOrderedStructure:
    """Random tree-ordered structure with arities up to 3."""
    if signature is None:
        signature = Signature((("E", 2, True), ("R", 3, False), ("U", 1, False)))
    names = ["r"] + [f"v{i}" for i in range(1, n_elements)]
    parent = {}
    for i, v in enumerate(names[1:], start=1):
        parent[v] = names[r.randrange(i)]
    relations = {}
    for name, arity, symmetric in signature.entries:
        chosen = set()
        for _ in range(r.randrange(tuples_per_relation + 1)):
            t = tuple(r.choice(names) for _ in range(arity))
            if symmetric:
                if t[0] == t[1]:
                    continue
            chosen.add(t)
        relations[name] = chosen
    return structure(names, "r", parent, signature, relations)


def random_bipartite(r: random.Random, na: int, nb: int, p: float = 0.5) -> BipartiteGraph:
    part_a = [f"x{i}" for i in range(1, na + 1)]
    part_b = [f"y{j}" for j in range(1, nb + 1)]
    edges = [(a, b) for a in part_a for b in part_b if r.random() < p]
    return BipartiteGraph(part_a, part_b, edges)


def random_ordered_bipartite(
    r: random.Random, na: int, nb: int, p: float = 0.5
) -> OrderedBipartite:
    g = random_bipartite(r, na, nb, p)
    return OrderedBipartite(g.part_a, g.part_b, g.edges)


def random_cograph(r: random.Random, n: int) -> Graph:
    """Random cograph via a random cotree (union/join of smaller cographs)."""
    counter = [0]

    def fresh():
        counter[0] += 1
        return f"v{counter[0]}"

    def gen(k):
        if k == 1:
            v = fresh()
            return [v], []
        split = r.randrange(1, k)
        v1, e1 = gen(split)
        v2, e2 = gen(k - split)
        edges = e1 + e2
        if r.random() < 0.5:  # join
            edges += [(a, b) for a in v1 for b in v2]
        return v1 + v2, edges

    vs, es = gen(n)
    return Graph(vs, es)


def random_spanning_tree_ordering(r: random.Random, g: Graph) -> TreeOrderedStructure:
    """Expansion of g by a tree-order from a root and a rooted spanning
    forest using only edges of g."""
    vs = list(g.vertices)
    root = r.choice(vs)
    attached = {root}
    parent = {}
    order = [v for v in vs if v != root]
    r.shuffle(order)
    pending = list(order)
    while pending:
        progressed = False
        rest = []
        for v in pending:
            nbrs = [u for u in g.neighbors(v) if u in attached and u != root]
            if nbrs:
                parent[v] = r.choice(nbrs)
                attached.add(v)
                progressed = True
            else:
                rest.append(v)
        if not progressed:
            # start a new forest component below the global root
            v = rest.pop(0)
            parent[v] = root
            attached.add(v)
        pending = rest
    universe = [root] + [v for v in vs if v != root]
    return tows_graph(universe, root, parent, g.edges)