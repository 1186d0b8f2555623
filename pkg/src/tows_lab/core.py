"""Finite relational structures carrying a tree-order.

Elements are string tokens.  The global element order is the input order of
the universe; every enumeration in the library iterates in this order, which
keeps all outputs deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

from .errors import ElementNotFound, SignatureMismatch, TowsError

__all__ = [
    "Signature",
    "GRAPH_SIGNATURE",
    "TreeOrder",
    "TreeOrderedStructure",
    "MarkSet",
    "AtomicType",
    "OrderRel",
    "order_rel",
    "lca",
    "atp",
    "otp",
    "otp_pair",
    "induced",
    "iso",
    "tows_graph",
    "structure",
]


@dataclass(frozen=True)
class Signature:
    """A finite relational signature: (name, arity, symmetric) entries."""

    entries: tuple

    def __post_init__(self):
        names = [name for name, _, _ in self.entries]
        if len(names) != len(set(names)):
            raise TowsError("duplicate relation symbol in signature")
        for name, arity, symmetric in self.entries:
            if arity < 1:
                raise TowsError(f"arity of {name} must be >= 1")
            if symmetric and arity != 2:
                raise TowsError(f"symmetric flag on {name} requires arity 2")

    @property
    def symbols(self):
        return tuple(name for name, _, _ in self.entries)

    def arity(self, name):
        for sym, arity, _ in self.entries:
            if sym == name:
                return arity
        raise TowsError(f"unknown relation symbol {name!r}")

    def is_symmetric(self, name):
        for sym, _, symmetric in self.entries:
            if sym == name:
                return symmetric
        raise TowsError(f"unknown relation symbol {name!r}")

    def max_arity(self):
        return max((arity for _, arity, _ in self.entries), default=0)


GRAPH_SIGNATURE = Signature((("E", 2, True),))


class TreeOrder:
    """A strict tree-order given by its root and parent map.

    ``x`` is smaller than ``y`` (x precedes y) when x is a strict ancestor
    of y in the rooted tree; the root is the unique minimum.
    """

    __slots__ = ("universe", "root", "parent", "_index", "_depth", "_children")

    def __init__(self, universe: Iterable[str], root: str, parent: Mapping[str, str]):
        universe = tuple(universe)
        if len(set(universe)) != len(universe):
            raise TowsError("duplicate elements in universe")
        if root not in universe:
            raise ElementNotFound(f"root {root!r} not in universe")
        if root in parent:
            raise TowsError("root must not have a parent")
        members = set(universe)
        for child, par in parent.items():
            if child not in members:
                raise ElementNotFound(f"parent map mentions unknown element {child!r}")
            if par not in members:
                raise ElementNotFound(f"parent {par!r} of {child!r} not in universe")
        missing = members - set(parent) - {root}
        if missing:
            raise TowsError(f"non-root elements without parent: {sorted(missing)}")
        self.universe = universe
        self.root = root
        self.parent = dict(parent)
        self._index = {v: i for i, v in enumerate(universe)}
        self._depth = {}
        self._children = {v: [] for v in universe}
        for v in universe:
            self._depth[v] = self._compute_depth(v, members)
        for v in universe:
            if v != root:
                self._children[self.parent[v]].append(v)
        for v in universe:
            self._children[v].sort(key=self._index.__getitem__)

    def _compute_depth(self, v, members):
        seen = []
        cur = v
        while cur != self.root:
            if cur in self._depth:
                return self._depth[cur] + len(seen)
            seen.append(cur)
            cur = self.parent[cur]
            if len(seen) > len(members):
                raise TowsError("parent map contains a cycle")
        base = 0
        for i, node in enumerate(reversed(seen)):
            self._depth[node] = base + i + 1
        return len(seen)

    def index(self, v):
        try:
            return self._index[v]
        except KeyError:
            raise ElementNotFound(f"element {v!r} not in universe") from None

    def depth(self, v):
        self.index(v)
        return self._depth[v]

    def children(self, v):
        self.index(v)
        return tuple(self._children[v])

    def precedes(self, x, y):
        """Strict order: x is an ancestor of y."""
        self.index(x)
        cur = y
        if cur not in self._index:
            raise ElementNotFound(f"element {y!r} not in universe")
        while cur != self.root:
            cur = self.parent[cur]
            if cur == x:
                return True
        return x == self.root and y != self.root

    def ancestors(self, v):
        """Chain from v up to the root, v excluded."""
        self.index(v)
        out = []
        cur = v
        while cur != self.root:
            cur = self.parent[cur]
            out.append(cur)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, TreeOrder)
            and self.universe == other.universe
            and self.root == other.root
            and self.parent == other.parent
        )

    def __hash__(self):
        return hash((self.universe, self.root, tuple(sorted(self.parent.items()))))


class OrderRel(Enum):
    EQUAL = "equal"
    BELOW = "below"
    ABOVE = "above"
    INCOMPARABLE = "incomparable"
    COVER_BELOW = "cover-below"
    COVER_ABOVE = "cover-above"

    def is_below(self):
        return self in (OrderRel.BELOW, OrderRel.COVER_BELOW)

    def is_above(self):
        return self in (OrderRel.ABOVE, OrderRel.COVER_ABOVE)

    def comparable(self):
        return self is not OrderRel.INCOMPARABLE


def _canonical_tuple(order: TreeOrder, sym_arity, symmetric, entries):
    entries = tuple(entries)
    if len(entries) != sym_arity:
        raise TowsError(f"tuple {entries} has wrong arity (expected {sym_arity})")
    for e in entries:
        order.index(e)
    if symmetric:
        a, b = entries
        if a == b:
            raise TowsError(f"loop {entries} forbidden in symmetric relation")
        if order.index(a) > order.index(b):
            entries = (b, a)
    return entries


class TreeOrderedStructure:
    """A tree-ordered relational structure over a fixed signature.

    Symmetric arity-2 relations hold canonically sorted loop-free pairs;
    other relations keep tuple order and may repeat entries.  Instances are
    immutable; every operation returns a new structure.
    """

    __slots__ = ("order", "signature", "relations")

    def __init__(self, order: TreeOrder, signature: Signature, relations: Mapping):
        self.order = order
        self.signature = signature
        rels = {}
        for name, arity, symmetric in signature.entries:
            tuples = relations.get(name, ())
            rels[name] = frozenset(
                _canonical_tuple(order, arity, symmetric, t) for t in tuples
            )
        extra = set(relations) - set(signature.symbols)
        if extra:
            raise TowsError(f"relations outside signature: {sorted(extra)}")
        self.relations = rels

    @property
    def universe(self):
        return self.order.universe

    @property
    def root(self):
        return self.order.root

    def tuples(self, name):
        """Tuples of a relation in deterministic enumeration order."""
        idx = self.order.index
        return sorted(self.relations[name], key=lambda t: tuple(idx(e) for e in t))

    def edges(self):
        """The symmetric relation E as sorted pairs (TOWS graphs)."""
        return self.tuples("E")

    def has(self, name, entries):
        entries = _canonical_tuple(
            self.order,
            self.signature.arity(name),
            self.signature.is_symmetric(name),
            entries,
        )
        return entries in self.relations[name]

    def adjacent(self, u, v):
        if u == v:
            return False
        return self.has("E", (u, v))

    def neighbors(self, v):
        """E-neighbors of v in element order (graph signatures)."""
        self.order.index(v)
        out = set()
        for a, b in self.relations["E"]:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return sorted(out, key=self.order.index)

    def is_graph(self):
        return self.signature == GRAPH_SIGNATURE

    def covers(self):
        """The covers of the tree-order as (parent, child) pairs."""
        idx = self.order.index
        return sorted(
            ((p, c) for c, p in self.order.parent.items()),
            key=lambda pc: idx(pc[1]),
        )

    def replace(self, order=None, relations=None):
        return TreeOrderedStructure(
            order if order is not None else self.order,
            self.signature,
            relations if relations is not None else self.relations,
        )

    def __eq__(self, other):
        return (
            isinstance(other, TreeOrderedStructure)
            and self.order == other.order
            and self.signature == other.signature
            and self.relations == other.relations
        )

    def __hash__(self):
        return hash(
            (
                self.order,
                self.signature,
                tuple(sorted((k, v) for k, v in self.relations.items())),
            )
        )

    def __repr__(self):
        nrel = {k: len(v) for k, v in self.relations.items()}
        return f"TreeOrderedStructure(|U|={len(self.universe)}, root={self.root!r}, {nrel})"


class MarkSet:
    """Named unary predicates over the universe of a structure."""

    __slots__ = ("marks",)

    def __init__(self, marks: Optional[Mapping] = None):
        self.marks = {name: frozenset(vals) for name, vals in (marks or {}).items()}

    def get(self, name):
        return self.marks.get(name, frozenset())

    def names(self):
        return sorted(self.marks)

    def with_mark(self, name, values):
        new = dict(self.marks)
        new[name] = frozenset(values)
        return MarkSet(new)

    def validate(self, st: TreeOrderedStructure):
        members = set(st.universe)
        for name, vals in self.marks.items():
            stray = vals - members
            if stray:
                raise ElementNotFound(f"mark {name} contains unknown elements {sorted(stray)}")

    def __eq__(self, other):
        return isinstance(other, MarkSet) and self.marks == other.marks

    def __repr__(self):
        return f"MarkSet({{{', '.join(f'{k}: {len(v)}' for k, v in sorted(self.marks.items()))}}})"


@dataclass(frozen=True)
class AtomicType:
    """The truth value of every literal over a fixed tuple of elements.

    Two tuples with equal atomic type satisfy exactly the same
    quantifier-free formulas.
    """

    length: int
    true_literals: frozenset = field(default_factory=frozenset)


def tows_graph(universe, root, parent, edges=()):
    """Convenience constructor for a TOWS graph ({E, tree-order})."""
    order = TreeOrder(universe, root, parent)
    return TreeOrderedStructure(order, GRAPH_SIGNATURE, {"E": tuple(edges)})


def structure(universe, root, parent, signature, relations):
    order = TreeOrder(universe, root, parent)
    return TreeOrderedStructure(order, signature, relations)


def order_rel(st: TreeOrderedStructure, x, y) -> OrderRel:
    """Compare x and y in the tree-order, flagging covers."""
    order = st.order if isinstance(st, TreeOrderedStructure) else st
    order.index(x)
    order.index(y)
    if x == y:
        return OrderRel.EQUAL
    if order.precedes(x, y):
        return OrderRel.COVER_BELOW if order.parent.get(y) == x else OrderRel.BELOW
    if order.precedes(y, x):
        return OrderRel.COVER_ABOVE if order.parent.get(x) == y else OrderRel.ABOVE
    return OrderRel.INCOMPARABLE


def lca(st: TreeOrderedStructure, x, y):
    """Deepest common ancestor under the reflexive closure, so lca(x, x) = x."""
    order = st.order if isinstance(st, TreeOrderedStructure) else st
    cx = [x] + order.ancestors(x)
    on_y = set([y] + order.ancestors(y))
    for node in cx:
        if node in on_y:
            return node
    return order.root


def atp(st: TreeOrderedStructure, elements) -> AtomicType:
    """Atomic type of a tuple: all equality, order, and relation literals."""
    elements = tuple(elements)
    k = len(elements)
    for e in elements:
        st.order.index(e)
    true = set()
    for i in range(k):
        for j in range(i + 1, k):
            if elements[i] == elements[j]:
                true.add(("=", (i, j)))
    for i in range(k):
        for j in range(k):
            if i != j and st.order.precedes(elements[i], elements[j]):
                true.add(("<", (i, j)))
    for name, arity, symmetric in st.signature.entries:
        rel = st.relations[name]
        for idxs in _index_tuples(k, arity):
            entries = tuple(elements[i] for i in idxs)
            if symmetric:
                a, b = entries
                if a == b:
                    continue
                if st.order.index(a) > st.order.index(b):
                    entries = (b, a)
            if entries in rel:
                true.add((name, idxs))
    return AtomicType(k, frozenset(true))


def _index_tuples(k, arity):
    if arity == 0:
        return [()]
    out = [()]
    for _ in range(arity):
        out = [t + (i,) for t in out for i in range(k)]
    return out


def otp_pair(a, b):
    if a < b:
        return "<"
    if a == b:
        return "="
    return ">"


def otp(*values):
    """Order type of a tuple from a linearly ordered set."""
    if len(values) == 1 and isinstance(values[0], (tuple, list)):
        values = tuple(values[0])
    return tuple(
        otp_pair(values[i], values[j])
        for i in range(len(values))
        for j in range(i + 1, len(values))
    )


def induced(st: TreeOrderedStructure, subset) -> TreeOrderedStructure:
    """Induced tree-ordered substructure on subset (the root is auto-added)."""
    keep = set()
    for e in subset:
        st.order.index(e)
        keep.add(e)
    keep.add(st.root)
    universe = tuple(v for v in st.universe if v in keep)
    parent = {}
    for v in universe:
        if v == st.root:
            continue
        cur = st.order.parent[v]
        while cur not in keep:
            cur = st.order.parent[cur]
        parent[v] = cur
    order = TreeOrder(universe, st.root, parent)
    relations = {
        name: tuple(t for t in st.relations[name] if all(e in keep for e in t))
        for name in st.signature.symbols
    }
    return TreeOrderedStructure(order, st.signature, relations)


def _refine_colors_joint(m: TreeOrderedStructure, n: TreeOrderedStructure):
    """Iterated color refinement run jointly on two structures.

    Colors are allocated from a table shared per round, so equal integers
    mean equal refinement classes across the two structures.
    """
    structs = (m, n)
    colors = [{}, {}]
    table0 = {}
    for s, st in enumerate(structs):
        for v in st.universe:
            degs = []
            for name, arity, symmetric in st.signature.entries:
                if symmetric:
                    # storage orientation is arbitrary, count both slots
                    degs.append(sum(1 for t in st.relations[name] if v in t))
                else:
                    for pos in range(arity):
                        degs.append(sum(1 for t in st.relations[name] if t[pos] == v))
            key = (st.order.depth(v), len(st.order.children(v)), tuple(degs), v == st.root)
            colors[s][v] = table0.setdefault(key, len(table0))
    rounds = max(len(m.universe), len(n.universe))
    for _ in range(rounds):
        table = {}
        new = [{}, {}]
        for s, st in enumerate(structs):
            col = colors[s]
            for v in st.universe:
                par = st.order.parent.get(v)
                profile = []
                for name, _, symmetric in st.signature.entries:
                    occ = []
                    for t in st.relations[name]:
                        if v not in t:
                            continue
                        entry = tuple(-1 if e == v else col[e] for e in t)
                        if symmetric:
                            entry = tuple(sorted(entry))
                        occ.append(entry)
                    profile.append(tuple(sorted(occ)))
                key = (
                    col[v],
                    col[par] if par is not None else -1,
                    tuple(sorted(col[c] for c in st.order.children(v))),
                    tuple(profile),
                )
                new[s][v] = table.setdefault(key, len(table))
        before = len(set(colors[0].values()) | set(colors[1].values()))
        after = len(table)
        colors = new
        if after == before:
            break
    return colors[0], colors[1]


def iso(m: TreeOrderedStructure, n: TreeOrderedStructure):
    """A universe bijection preserving root, parent, and every relation.

    Returns the mapping as a dict, or None.  The search order is
    deterministic: elements of m in canonical order, candidates of n in
    canonical order.
    """
    if m.signature != n.signature:
        raise SignatureMismatch("iso requires identical signatures")
    if len(m.universe) != len(n.universe):
        return None
    for name in m.signature.symbols:
        if len(m.relations[name]) != len(n.relations[name]):
            return None
    cm, cn = _refine_colors_joint(m, n)
    by_color_n = {}
    for v in n.universe:
        by_color_n.setdefault(cn[v], []).append(v)
    sizes_m = {}
    for v in m.universe:
        sizes_m[cm[v]] = sizes_m.get(cm[v], 0) + 1
    if sizes_m != {c: len(vs) for c, vs in by_color_n.items()}:
        return None

    order_m = sorted(m.universe, key=lambda v: (m.order.depth(v), m.order.index(v)))
    mapping = {}
    used = set()
    sym_rel = [
        (name, m.relations[name], n.relations[name], m.signature.is_symmetric(name))
        for name in m.signature.symbols
    ]
    idx_n = n.order.index

    def consistent(v, w):
        pv = m.order.parent.get(v)
        pw = n.order.parent.get(w)
        if (pv is None) != (pw is None):
            return False
        if pv is not None and pv in mapping and mapping[pv] != pw:
            return False
        for name, rel_m, rel_n, symmetric in sym_rel:
            for t in rel_m:
                if v not in t:
                    continue
                if all(e == v or e in mapping for e in t):
                    img = tuple(w if e == v else mapping[e] for e in t)
                    if symmetric and idx_n(img[0]) > idx_n(img[1]):
                        img = (img[1], img[0])
                    if img not in rel_n:
                        return False
        return True

    def backtrack(pos):
        if pos == len(order_m):
            return True
        v = order_m[pos]
        for w in sorted(by_color_n.get(cm[v], ()), key=idx_n):
            if w in used or not consistent(v, w):
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
    # forward preservation plus equal relation counts gives a full iso,
    # but verify both directions defensively
    for name, rel_m, rel_n, symmetric in sym_rel:
        image = set()
        for t in rel_m:
            img = tuple(mapping[e] for e in t)
            if symmetric and idx_n(img[0]) > idx_n(img[1]):
                img = (img[1], img[0])
            image.add(img)
        if image != rel_n:
            return None
    return dict(mapping)
