"""Groundings, racks, the Host constructions with their definable markings,
and the end-to-end pipeline check shrink(host) = grounding/rack."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import (
    GRAPH_SIGNATURE,
    MarkSet,
    TreeOrder,
    TreeOrderedStructure,
    induced,
    iso,
)
from .errors import TowsError
from .graphs import BipartiteGraph, Graph, OrderedBipartite
from .limits import guard
from .minors import shrink
from .twists import Core, LabeledTwist, build_twist

__all__ = [
    "GroundingSpec",
    "RackSpec",
    "grounding",
    "rack",
    "mark_predicates",
    "host",
    "implied_params",
    "verify_pipeline",
]


@dataclass(frozen=True)
class GroundingSpec:
    """Subdivision length and the root-adjacent layers."""

    h: int
    n_r: frozenset

    def __post_init__(self):
        if self.h < 0:
            raise TowsError("h must be non-negative")
        if not set(self.n_r) <= set(range(self.h + 2)):
            raise TowsError(f"N_r must lie in 0..{self.h + 1}")


@dataclass(frozen=True)
class RackSpec:
    """Grounding data plus the layers chained below max A / max B."""

    h: int
    n_r: frozenset
    c_a: frozenset
    c_b: frozenset

    def __post_init__(self):
        if self.h < 0:
            raise TowsError("h must be non-negative")
        if not set(self.n_r) <= set(range(self.h + 2)):
            raise TowsError(f"N_r must lie in 0..{self.h + 1}")
        if not set(self.c_a) <= set(range(1, self.h + 2)):
            raise TowsError(f"C_A must lie in 1..{self.h + 1}")
        if not set(self.c_b) <= set(range(1, self.h + 1)):
            raise TowsError(f"C_B must lie in 1..{self.h}")
        if set(self.c_a) & set(self.c_b):
            raise TowsError("C_A and C_B must be disjoint")


def _sub_name(a, b, k):
    return f"{a}--{b}:{k}"


def _layers(g: BipartiteGraph, h: int):
    """Vertex layers L_0..L_{h+1} of the h-subdivision, plus the chains."""
    layers = {0: list(g.part_a), h + 1: list(g.part_b)}
    for i in range(1, h + 1):
        layers[i] = []
    chains = []
    for a, b in g.sorted_edges():
        chain = [a] + [_sub_name(a, b, k) for k in range(1, h + 1)] + [b]
        chains.append(chain)
        for k in range(1, h + 1):
            layers[k].append(chain[k])
    return layers, chains


def _check_parts(g: BipartiteGraph):
    if not g.part_a or not g.part_b:
        raise TowsError("empty parts are rejected")


def grounding(g: BipartiteGraph, spec: GroundingSpec) -> TreeOrderedStructure:
    """Rooted h-subdivision with a flat tree-order and prescribed root edges."""
    _check_parts(g)
    layers, chains = _layers(g, spec.h)
    universe = ["r"] + layers[0] + layers[spec.h + 1]
    for i in range(1, spec.h + 1):
        universe.extend(layers[i])
    if len(set(universe)) != len(universe):
        raise TowsError("vertex names clash with subdivision names")
    parent = {v: "r" for v in universe if v != "r"}
    edges = []
    for chain in chains:
        edges.extend(zip(chain, chain[1:]))
    for i in sorted(spec.n_r):
        edges.extend(("r", v) for v in layers[i])
    order = TreeOrder(universe, "r", parent)
    return TreeOrderedStructure(order, GRAPH_SIGNATURE, {"E": edges})


def rack(g: OrderedBipartite, spec: RackSpec) -> TreeOrderedStructure:
    """Rooted h-subdivision wired through the predecessor function.

    Parts chain along their linear orders from the minima; the minima of
    the selected layers hang below max A or max B, everything else below
    the root.
    """
    _check_parts(g)
    layers, chains = _layers(g, spec.h)
    universe = ["r"] + layers[0] + layers[spec.h + 1]
    for i in range(1, spec.h + 1):
        universe.extend(layers[i])
    if len(set(universe)) != len(universe):
        raise TowsError("vertex names clash with subdivision names")
    max_a, max_b = g.part_a[-1], g.part_b[-1]
    level_prime = {i: layers[i] for i in range(1, spec.h + 1)}
    level_prime[0] = [g.part_a[0]]
    level_prime[spec.h + 1] = [g.part_b[0]]

    parent = {}
    for pos, v in enumerate(g.part_a):
        if pos > 0:
            parent[v] = g.part_a[pos - 1]
    for pos, v in enumerate(g.part_b):
        if pos > 0:
            parent[v] = g.part_b[pos - 1]
    for i in range(0, spec.h + 2):
        for v in level_prime[i]:
            if i in spec.c_a:
                parent[v] = max_a
            elif i in spec.c_b:
                parent[v] = max_b
            elif v not in parent:
                parent[v] = "r"
    edges = []
    for chain in chains:
        edges.extend(zip(chain, chain[1:]))
    for i in sorted(spec.n_r):
        edges.extend(("r", v) for v in layers[i])
    order = TreeOrder(universe, "r", parent)
    return TreeOrderedStructure(order, GRAPH_SIGNATURE, {"E": edges})


def mark_predicates(st: TreeOrderedStructure) -> MarkSet:
    """Definable predicates: small vertices, root successors, big, regular."""
    small = set()
    big = set()
    for v in st.universe:
        if len(st.order.children(v)) <= 2:
            small.add(v)
        else:
            big.add(v)
    successors = set(st.order.children(st.root))
    regular = set()
    for v in st.universe:
        par = st.order.parent.get(v)
        if par is None or par in small:
            continue
        load = len(st.order.children(v)) + sum(
            1 for u in st.neighbors(v) if u != st.root
        )
        if load == 2:
            regular.add(v)
    return MarkSet({"S": small, "M": successors, "big": big, "regular": regular})


_TWIST_CACHE = {}


def _twist_for(core: Core, n: int) -> LabeledTwist:
    key = (core, n)
    if key not in _TWIST_CACHE:
        _TWIST_CACHE[key] = build_twist(core, n)
    return _TWIST_CACHE[key]


def _ordered(g) -> OrderedBipartite:
    if isinstance(g, OrderedBipartite):
        return g
    return OrderedBipartite(g.part_a, g.part_b, g.edges)


def _host_type1(core: Core, g: BipartiteGraph):
    nx, ny = len(g.part_a), len(g.part_b)
    n = max(nx, ny, 2)
    twist = _twist_for(core, n)
    keep = [twist.structure.root]
    images = {}
    for i, x in enumerate(g.part_a, start=1):
        images[x] = twist.a[i - 1]
        keep.append(twist.a[i - 1])
    for j, y in enumerate(g.part_b, start=1):
        images[y] = twist.b[j - 1]
        keep.append(twist.b[j - 1])
    pos_a = {x: i for i, x in enumerate(g.part_a, start=1)}
    pos_b = {y: j for j, y in enumerate(g.part_b, start=1)}
    for x, y in g.sorted_edges():
        for s in range(1, core.length + 1):
            keep.append(twist.cell(s, pos_a[x], pos_b[y]))
    structure = induced(twist.structure, keep)
    v_mark = set(structure.order.children(structure.root))
    return structure, MarkSet({"V": v_mark, "D": frozenset()}), images


def _host_type2_selection(core: Core, g: OrderedBipartite):
    nx, ny = len(g.part_a), len(g.part_b)
    n = max(nx, ny) + 1
    twist = _twist_for(core, max(n, 2))
    h = core.length
    keep = [twist.structure.root]
    images = {}
    for i, x in enumerate(g.part_a, start=1):
        images[x] = twist.cell(1, i + 1, 1)
        keep.append(images[x])
    for j, y in enumerate(g.part_b, start=1):
        images[y] = twist.cell(h, 1, j + 1)
        keep.append(images[y])
    pos_a = {x: i for i, x in enumerate(g.part_a, start=1)}
    pos_b = {y: j for j, y in enumerate(g.part_b, start=1)}
    cells = {}
    for x, y in g.sorted_edges():
        chain = []
        for s in range(1, h + 1):
            tok = twist.cell(s, pos_a[x] + 1, pos_b[y] + 1)
            keep.append(tok)
            chain.append(tok)
        cells[(x, y)] = chain
    structure = induced(twist.structure, keep)
    return structure, images, cells


def _host_type2(core: Core, g: BipartiteGraph):
    structure, images, _ = _host_type2_selection(core, _ordered(g))
    v_mark = set(structure.order.children(structure.root))
    return structure, MarkSet({"V": v_mark, "D": frozenset()}), images


def _rho_v(structure: TreeOrderedStructure):
    """The regular-vertex marking of the type-3 interpretation."""
    preds = mark_predicates(structure)
    big = preds.get("big")
    regular = preds.get("regular")
    marked = set(regular)
    root = structure.root
    for v in structure.universe:
        par = structure.order.parent.get(v)
        if par is None:
            continue
        e_nbrs = [u for u in structure.neighbors(v) if u != root]
        if e_nbrs:
            continue
        par_e_nbrs = [u for u in structure.neighbors(par) if u != root]
        if par in big or par_e_nbrs:
            marked.add(v)
    return marked


def _rep_map(structure: TreeOrderedStructure, alive):
    rep = {}
    for v in structure.universe:
        cur = v
        while cur not in alive:
            cur = structure.order.parent[cur]
        rep[v] = cur
    return rep


def _host_type3(core: Core, g):
    g = _ordered(g)
    aux = ("_a1", "_a2", "_b1", "_b2")
    if set(aux) & (set(g.part_a) | set(g.part_b)):
        raise TowsError("input uses reserved auxiliary vertex names")
    base = core.base
    mu1 = core.mesh(1).elements()
    muh = core.mesh(core.length).elements()
    max_mu1 = max(mu1, key=lambda e: base.order.depth(e))
    min_muh = min(muh, key=lambda e: base.order.depth(e))
    if base.order.precedes(max_mu1, min_muh):
        part_a_plus = (aux[0], aux[1]) + g.part_a
    else:
        part_a_plus = g.part_a + (aux[0], aux[1])
    part_b_plus = g.part_b + (aux[2], aux[3])
    edges_plus = set(g.edges)
    for a in (aux[0], aux[1]):
        edges_plus.update((a, y) for y in part_b_plus)
    for b in (aux[2], aux[3]):
        edges_plus.update((x, b) for x in part_a_plus)
    g_plus = OrderedBipartite(part_a_plus, part_b_plus, edges_plus)

    structure, images, cells = _host_type2_selection(core, g_plus)
    v_mark = _rho_v(structure)
    alive = set(v_mark) | {structure.root}
    rep = _rep_map(structure, alive)
    part_reps = {rep[images[v]] for v in images}
    # the auxiliary parts plus every subdivision part on a path with an
    # auxiliary endpoint; principal parts of real vertices stay
    bad_reps = {rep[images[v]] for v in aux}
    for (x, y), chain in cells.items():
        if x in aux or y in aux:
            bad_reps.update(rep[tok] for tok in chain if rep[tok] not in part_reps)
    d_mark = {v for v in structure.universe if rep[v] in bad_reps}
    marks = MarkSet({"V": frozenset(v_mark), "D": frozenset(d_mark)})
    return structure, marks, {v: images[v] for v in images if v not in aux}


def host(core: Core, g):
    """Host structure and marking whose shrink is a grounding or rack of g."""
    if core.core_type == 1:
        structure, marks, _ = _host_type1(core, g)
    elif core.core_type == 2:
        structure, marks, _ = _host_type2(core, g)
    else:
        structure, marks, _ = _host_type3(core, g)
    return structure, marks


def _pipeline(core: Core, g):
    if core.core_type == 1:
        structure, marks, images = _host_type1(core, g)
    elif core.core_type == 2:
        structure, marks, images = _host_type2(core, g)
    else:
        structure, marks, images = _host_type3(core, g)
    out = shrink(structure, marks.get("V"), marks.get("D"))
    return out, images


def _read_path(out: TreeOrderedStructure, a_img, b_img):
    """The subdivision path of the K_{1,1} probe, from the A part to B."""
    root = out.root
    adj = {v: [] for v in out.universe if v != root}
    for u, v in out.tuples("E"):
        if root in (u, v):
            continue
        adj[u].append(v)
        adj[v].append(u)
    path = [a_img]
    seen = {a_img}
    cur = a_img
    while cur != b_img:
        nxt = [u for u in adj[cur] if u not in seen]
        if len(nxt) != 1:
            raise TowsError("probe output is not a subdivided edge")
        cur = nxt[0]
        seen.add(cur)
        path.append(cur)
    if seen != set(adj):
        raise TowsError("probe output has vertices off the subdivided edge")
    return path


_PARAMS_CACHE = {}


def implied_params(core: Core) -> Union[GroundingSpec, RackSpec]:
    """Read the (h', N_r[, C_A, C_B]) parameters off the K_{1,1} probe.

    The parameters exist and depend only on the core; they are computed
    once by running the pipeline on K_{1,1} and then reused.
    """
    if core in _PARAMS_CACHE:
        return _PARAMS_CACHE[core]
    probe = BipartiteGraph(("x1",), ("y1",), ((("x1", "y1")),))
    if core.core_type == 3:
        probe = OrderedBipartite(("x1",), ("y1",), (("x1", "y1"),))
    out, images = _pipeline(core, probe)
    alive = set(out.universe)
    if images["x1"] not in alive or images["y1"] not in alive:
        raise TowsError("part vertices did not survive the probe pipeline")
    path = _read_path(out, images["x1"], images["y1"])
    h_prime = len(path) - 2
    n_r = frozenset(
        i for i, v in enumerate(path) if out.adjacent(out.root, v)
    )
    if core.core_type in (1, 2):
        for v in out.universe:
            if v != out.root and out.order.parent[v] != out.root:
                raise TowsError("probe grounding has a non-flat tree-order")
        spec = GroundingSpec(h_prime, n_r)
        check = grounding(probe, spec)
    else:
        a_img, b_img = path[0], path[-1]
        c_a, c_b = set(), set()
        for i, v in enumerate(path):
            par = out.order.parent[v]
            if par == a_img and v != a_img:
                c_a.add(i)
            elif par == b_img and v != b_img:
                c_b.add(i)
            elif par != out.root:
                raise TowsError(f"probe rack parents {v!r} to {par!r}")
        spec = RackSpec(h_prime, n_r, frozenset(c_a), frozenset(c_b))
        check = rack(_ordered(probe), spec)
    if iso(out, check) is None:
        raise TowsError("probe output does not match its read-off parameters")
    _PARAMS_CACHE[core] = spec
    return spec


def verify_pipeline(core: Core, g, bound=64) -> bool:
    """Does shrink(host(core, g)) realize the grounding/rack implied by the
    core on this input?"""
    guard(len(g.part_a) + len(g.part_b), bound, "verify_pipeline")
    spec = implied_params(core)
    out, _ = _pipeline(core, g)
    if core.core_type in (1, 2):
        expected = grounding(g, spec)
    else:
        expected = rack(_ordered(g), spec)
    return iso(out, expected) is not None
