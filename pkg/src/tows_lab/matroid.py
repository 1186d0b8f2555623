"""Flattenings, fundamental cycles, and (generalized) fundamental graphs.

GF(2) vectors over the cover enumeration are plain int bitsets; bit i is
the cover named by the i-th non-root element in the global element order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .core import TreeOrderedStructure, lca
from .errors import InvalidBasisChange, TowsError
from .graphs import Graph

__all__ = [
    "Gf2Vector",
    "Flattening",
    "FundamentalGraph",
    "flatten",
    "fundamental_cycle",
    "lambda_graph",
    "lambda_general",
    "change_basis",
    "lambda_equivalent",
    "gf2_rank",
    "gf2_rref",
]


def gf2_rref(rows):
    """Reduced row echelon basis of the span, as a canonical sorted tuple."""
    basis = {}  # pivot bit -> row
    for row in rows:
        cur = row
        while cur:
            p = cur.bit_length() - 1
            if p in basis:
                cur ^= basis[p]
            else:
                basis[p] = cur
                break
    for p in sorted(basis):
        for q in basis:
            if q > p and (basis[q] >> p) & 1:
                basis[q] ^= basis[p]
    return tuple(sorted(basis.values(), reverse=True))


def gf2_rank(rows):
    return len(gf2_rref(rows))


def gf2_in_span(vec, rows):
    for b in gf2_rref(rows):
        p = b.bit_length() - 1
        if (vec >> p) & 1:
            vec ^= b
    return vec == 0


@dataclass(frozen=True)
class Gf2Vector:
    """A subset of the covers Y as a bit vector over a fixed enumeration."""

    bits: int
    basis: tuple  # cover names (upper elements) fixing the bit positions

    def members(self):
        return tuple(name for i, name in enumerate(self.basis) if (self.bits >> i) & 1)

    def __len__(self):
        return len(self.basis)


@dataclass(frozen=True)
class Flattening:
    """Tuple supports plus the cover tree of a tree-ordered structure."""

    universe: tuple
    y_covers: tuple  # cover names = non-root elements, in element order
    sigma_edges: tuple  # (label, frozenset support), deduplicated by support
    cover_pairs: tuple  # (parent, child) pairs matching y_covers

    def graph(self) -> Graph:
        """The flattened graph: covers plus all size-2 supports."""
        edges = set(self.cover_pairs)
        for label, support in self.sigma_edges:
            if len(support) != 2:
                raise TowsError("graph() requires all supports of size 2")
            edges.add(tuple(sorted(support)))
        return Graph(self.universe, edges)

    def hyperedges(self):
        """All hyperedges of the flattening hypergraph (supports and covers)."""
        return {s for _, s in self.sigma_edges} | {
            frozenset(c) for c in self.cover_pairs
        }


def flatten(st: TreeOrderedStructure) -> Flattening:
    """Supports of all tuples plus the distinguished cover edges Y."""
    y_covers = tuple(v for v in st.universe if v != st.root)
    cover_pairs = tuple((st.order.parent[v], v) for v in y_covers)
    seen = {}
    for name in st.signature.symbols:
        for i, t in enumerate(st.tuples(name)):
            support = frozenset(t)
            seen.setdefault(support, f"{name}:{i}")
    idx = st.order.index
    sigma_edges = tuple(
        (label, support)
        for support, label in sorted(
            seen.items(), key=lambda kv: sorted(idx(e) for e in kv[0])
        )
    )
    return Flattening(
        universe=st.universe,
        y_covers=y_covers,
        sigma_edges=sigma_edges,
        cover_pairs=cover_pairs,
    )


def _path_vector(st: TreeOrderedStructure, covers, u, v) -> int:
    """Bitset of the covers on the tree path between u and v."""
    meet = lca(st, u, v)
    bits = 0
    pos = {name: i for i, name in enumerate(covers)}
    for end in (u, v):
        cur = end
        while cur != meet:
            bits ^= 1 << pos[cur]
            cur = st.order.parent[cur]
    return bits


def fundamental_cycle(st: TreeOrderedStructure, f) -> Gf2Vector:
    """Covers on the unique cycle closed by the non-tree edge f."""
    u, v = f
    st.order.index(u)
    st.order.index(v)
    if u == v:
        raise TowsError("fundamental cycle of a loop is undefined")
    if st.order.parent.get(u) == v or st.order.parent.get(v) == u:
        raise TowsError(f"edge {f} is a cover, not a chord")
    covers = tuple(x for x in st.universe if x != st.root)
    return Gf2Vector(_path_vector(st, covers, u, v), covers)


class FundamentalGraph:
    """Bipartite multi-relation graph between covers Y and hyperedges Z.

    For each z, slot s holds the E_{s+1}-neighborhood as a bitset over the
    cover enumeration; together the slots span the GF(2) path space of the
    hyperedge.
    """

    __slots__ = ("covers", "zs", "nbhd", "slots")

    def __init__(self, covers, zs, nbhd: Mapping, slots: int):
        self.covers = tuple(covers)
        self.zs = tuple(zs)
        self.slots = slots
        self.nbhd = {}
        for z in self.zs:
            vecs = tuple(nbhd.get(z, ()))
            if len(vecs) != slots:
                raise TowsError(f"z {z!r}: expected {slots} neighborhood vectors")
            self.nbhd[z] = vecs

    def y_name(self, cover):
        return f"y:{cover}"

    def z_vectors(self, z):
        return self.nbhd[z]

    def span(self, z):
        return gf2_rref(self.nbhd[z])

    def adjacency(self):
        """Sorted (slot, y, z) adjacency triples."""
        yi = {c: i for i, c in enumerate(self.covers)}
        zi = {z: i for i, z in enumerate(self.zs)}
        out = []
        for z in self.zs:
            for s, bits in enumerate(self.nbhd[z]):
                for i, cover in enumerate(self.covers):
                    if (bits >> i) & 1:
                        out.append((s + 1, cover, z))
        return sorted(out, key=lambda t: (t[0], yi[t[1]], zi[t[2]]))

    def as_graph(self) -> Graph:
        """Forget slots and parts: a plain graph on y- and z-vertices."""
        vertices = [self.y_name(c) for c in self.covers] + [f"z:{z}" for z in self.zs]
        edges = set()
        for s, cover, z in self.adjacency():
            edges.add((self.y_name(cover), f"z:{z}"))
        return Graph(vertices, edges)

    def __eq__(self, other):
        return (
            isinstance(other, FundamentalGraph)
            and self.covers == other.covers
            and self.zs == other.zs
            and self.slots == other.slots
            and self.nbhd == other.nbhd
        )

    def __repr__(self):
        return f"FundamentalGraph(|Y|={len(self.covers)}, |Z|={len(self.zs)}, slots={self.slots})"


def lambda_graph(st: TreeOrderedStructure) -> FundamentalGraph:
    """Fundamental graph of a TOWS graph over the cover tree.

    y(e) ~ z(f) when the cover e lies on the fundamental cycle of the edge f
    in the multigraph E(M) plus covers.
    """
    if not st.is_graph():
        raise TowsError("lambda_graph expects a TOWS graph")
    covers = tuple(v for v in st.universe if v != st.root)
    zs = []
    nbhd = {}
    for i, (u, v) in enumerate(st.tuples("E")):
        z = f"E:{i}"
        zs.append(z)
        if st.order.parent.get(u) == v or st.order.parent.get(v) == u:
            # the edge is parallel to a cover; its cycle is the 2-cycle
            upper = u if st.order.parent.get(u) == v else v
            bits = 1 << covers.index(upper)
        else:
            bits = _path_vector(st, covers, u, v)
        nbhd[z] = (bits,)
    return FundamentalGraph(covers, zs, nbhd, slots=1)


def lambda_general(st: TreeOrderedStructure) -> FundamentalGraph:
    """Canonical generalized fundamental graph of a tree-ordered structure.

    For a hyperedge with support v1 < ... < vm the path vectors p(v1, vi)
    are scanned in order; each one independent of its predecessors becomes
    the next slot neighborhood, so the slots span the path space exactly.
    """
    k = st.signature.max_arity()
    if k < 2:
        raise TowsError("lambda_general requires maximum arity >= 2")
    covers = tuple(v for v in st.universe if v != st.root)
    flat = flatten(st)
    slots = k - 1
    zs = []
    nbhd = {}
    for label, support in flat.sigma_edges:
        zs.append(label)
        members = sorted(support, key=st.order.index)
        vecs = []
        basis = []
        for v in members[1:]:
            p = _path_vector(st, covers, members[0], v)
            reduced = p
            for b in basis:
                reduced = min(reduced, reduced ^ b)
            if reduced:
                vecs.append(p)
                basis.append(reduced)
        if len(vecs) > slots:
            raise TowsError(f"hyperedge {label} spans more than {slots} dimensions")
        vecs.extend([0] * (slots - len(vecs)))
        nbhd[label] = tuple(vecs)
    return FundamentalGraph(covers, zs, nbhd, slots=slots)


def _invertible(matrix, n):
    rows = [sum((cell & 1) << j for j, cell in enumerate(row)) for row in matrix]
    if len(rows) != n or any(len(row) != n for row in matrix):
        return False
    return gf2_rank(rows) == n


def change_basis(f: FundamentalGraph, matrices: Mapping) -> FundamentalGraph:
    """Recombine the slot neighborhoods of selected z's by invertible maps.

    matrices maps z to a (slots x slots) 0/1 matrix; missing z's keep their
    neighborhoods.  Spans are unchanged.
    """
    unknown = set(matrices) - set(f.zs)
    if unknown:
        raise InvalidBasisChange(f"unknown z vertices: {sorted(unknown)}")
    nbhd = {}
    for z in f.zs:
        vecs = f.nbhd[z]
        if z not in matrices:
            nbhd[z] = vecs
            continue
        mat = matrices[z]
        if not _invertible(mat, f.slots):
            raise InvalidBasisChange(f"matrix for {z!r} is singular or badly shaped")
        new = []
        for row in mat:
            acc = 0
            for j, cell in enumerate(row):
                if cell & 1:
                    acc ^= vecs[j]
            new.append(acc)
        nbhd[z] = tuple(new)
    return FundamentalGraph(f.covers, f.zs, nbhd, f.slots)


def lambda_equivalent(f1: FundamentalGraph, f2: FundamentalGraph) -> bool:
    """True when both graphs have the same parts and identical per-z spans."""
    if f1.covers != f2.covers or set(f1.zs) != set(f2.zs) or f1.slots != f2.slots:
        raise TowsError("fundamental graphs have different parts")
    return all(f1.span(z) == f2.span(z) for z in f1.zs)
