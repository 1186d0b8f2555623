"""Meshes, twisters, clean twisters, cores, and the twist family builder.

Index sets I and J are tuples of integers starting at 1.  A twister of
length h is the guarded sequence (A, mu_1, ..., mu_h, B); a twist is a
structure covered by a clean twister plus its root, and is determined by
its order n and its order-2 core.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Optional

from .core import (
    GRAPH_SIGNATURE,
    TreeOrder,
    TreeOrderedStructure,
    atp,
    iso,
    otp_pair,
)
from .errors import InvalidCore, PatternNotMatched, TowsError
from .limits import guard

__all__ = [
    "Mesh",
    "GuardedSequence",
    "PairClass",
    "MeshClass",
    "MatchType",
    "StarType",
    "Core",
    "LabeledTwist",
    "TwisterReport",
    "CleanReport",
    "CoreReport",
    "NotATwister",
    "pair_class",
    "mesh_class",
    "validate_twister",
    "validate_clean",
    "matching_type",
    "star_type",
    "validate_core",
    "build_twist",
    "core_of",
    "find_twist",
    "CELLS2",
]

CELLS2 = ((1, 1), (1, 2), (2, 1), (2, 2))

ORDER_PATTERNS = {
    "<_{I,J}": lambda i, j, i2, j2: i < i2 or (i == i2 and j < j2),
    "<_{-I,J}": lambda i, j, i2, j2: i > i2 or (i == i2 and j < j2),
    "<_{I,-J}": lambda i, j, i2, j2: i < i2 or (i == i2 and j > j2),
    "<_{-I,-J}": lambda i, j, i2, j2: i > i2 or (i == i2 and j > j2),
    "<_{J,I}": lambda i, j, i2, j2: j < j2 or (j == j2 and i < i2),
    "<_{-J,I}": lambda i, j, i2, j2: j > j2 or (j == j2 and i < i2),
    "<_{J,-I}": lambda i, j, i2, j2: j < j2 or (j == j2 and i > i2),
    "<_{-J,-I}": lambda i, j, i2, j2: j > j2 or (j == j2 and i > i2),
    "<_I": lambda i, j, i2, j2: j == j2 and i < i2,
    "<_-I": lambda i, j, i2, j2: j == j2 and i > i2,
    "<_J": lambda i, j, i2, j2: i == i2 and j < j2,
    "<_-J": lambda i, j, i2, j2: i == i2 and j > j2,
}
LEX_PATTERNS = ("<_{I,J}", "<_{-I,J}", "<_{I,-J}", "<_{-I,-J}")
ANTILEX_PATTERNS = ("<_{J,I}", "<_{-J,I}", "<_{J,-I}", "<_{-J,-I}")
VERTICAL_COLUMN = LEX_PATTERNS + ("<_J", "<_-J")
HORIZONTAL_COLUMN = ANTILEX_PATTERNS + ("<_I", "<_-I")


class NotATwister(TowsError):
    """The guarded sequence fails the twister axioms."""


@dataclass(frozen=True)
class Mesh:
    """An injective I x J indexed family of elements."""

    rows: tuple
    cols: tuple
    cells: tuple  # ((i, j), element) pairs, row-major

    @staticmethod
    def from_map(rows, cols, mapping):
        rows, cols = tuple(rows), tuple(cols)
        cells = tuple(((i, j), mapping[(i, j)]) for i in rows for j in cols)
        return Mesh(rows, cols, cells)

    def __post_init__(self):
        values = [e for _, e in self.cells]
        if len(set(values)) != len(values):
            raise TowsError("mesh is not injective")
        if len(self.cells) != len(self.rows) * len(self.cols):
            raise TowsError("mesh misses cells")

    def mapping(self):
        return dict(self.cells)

    def __call__(self, i, j):
        return self.mapping()[(i, j)]

    def elements(self):
        return tuple(e for _, e in self.cells)

    def transpose(self):
        return Mesh(
            self.cols,
            self.rows,
            tuple(((j, i), e) for (i, j), e in sorted(
                self.cells, key=lambda ce: (ce[0][1], ce[0][0])
            )),
        )

    def restrict(self, rows, cols):
        rows, cols = tuple(rows), tuple(cols)
        keep = {(i, j): e for (i, j), e in self.cells if i in rows and j in cols}
        return Mesh.from_map(rows, cols, keep)


@dataclass(frozen=True)
class GuardedSequence:
    """A guard A, meshes mu_1..mu_h, and a guard B over shared index sets."""

    rows: tuple
    cols: tuple
    meshes: tuple
    a: Optional[tuple] = None  # element per row index, or None
    b: Optional[tuple] = None  # element per column index, or None

    def __post_init__(self):
        if not self.meshes:
            raise TowsError("a guarded sequence needs at least one mesh")
        for m in self.meshes:
            if m.rows != self.rows or m.cols != self.cols:
                raise TowsError("meshes must share the index sets")
        if self.a is not None and len(self.a) != len(self.rows):
            raise TowsError("guard A must be indexed by I")
        if self.b is not None and len(self.b) != len(self.cols):
            raise TowsError("guard B must be indexed by J")

    @property
    def length(self):
        return len(self.meshes)

    def a_map(self):
        return dict(zip(self.rows, self.a)) if self.a is not None else None

    def b_map(self):
        return dict(zip(self.cols, self.b)) if self.b is not None else None

    def all_elements(self):
        out = list(self.a or ())
        for m in self.meshes:
            out.extend(m.elements())
        out.extend(self.b or ())
        return out


class _AtpCache:
    def __init__(self, st):
        self.st = st
        self.cache = {}

    def pair(self, u, v):
        key = (u, v)
        if key not in self.cache:
            self.cache[key] = atp(self.st, (u, v))
        return self.cache[key]


@dataclass
class PairClass:
    """Classification of a pair of meshes by its otp -> atp table."""

    regular: bool
    homogeneous: bool
    quasi_homogeneous: bool
    matching: bool
    conducting: bool
    table: dict = field(default_factory=dict)


def pair_class(st, mu: Mesh, mup: Mesh, _cache=None) -> PairClass:
    """Classify a pair of meshes by exhausting all index quadruples."""
    if mu.rows != mup.rows or mu.cols != mup.cols:
        raise TowsError("meshes must share index sets")
    cache = _cache or _AtpCache(st)
    table = {}
    regular = True
    all_types = set()
    off_diagonal = set()
    mmap, pmap = mu.mapping(), mup.mapping()
    for (i, j), (i2, j2) in product(
        product(mu.rows, mu.cols), repeat=2
    ):
        t = cache.pair(mmap[(i, j)], pmap[(i2, j2)])
        all_types.add(t)
        if (i, j) != (i2, j2):
            off_diagonal.add(t)
        key = (otp_pair(i, i2), otp_pair(j, j2))
        if key in table:
            if table[key] != t:
                regular = False
        else:
            table[key] = t
    homogeneous = len(all_types) == 1
    quasi = regular and len(off_diagonal) == 1
    matching = quasi and not homogeneous
    conducting = (
        len(mu.rows) == len(mu.cols) <= 3 or (regular and not homogeneous)
    )
    return PairClass(regular, homogeneous, quasi, matching, conducting, table)


def _prec(st, u, v):
    return st.order.precedes(u, v)


def _is_chain(st, elements):
    elements = list(elements)
    for i, u in enumerate(elements):
        for v in elements[i + 1 :]:
            if not (_prec(st, u, v) or _prec(st, v, u)):
                return False
    return True


def _is_antichain(st, elements):
    elements = list(elements)
    for i, u in enumerate(elements):
        for v in elements[i + 1 :]:
            if _prec(st, u, v) or _prec(st, v, u):
                return False
    return True


def _is_independent(st, elements):
    elements = list(elements)
    for i, u in enumerate(elements):
        for v in elements[i + 1 :]:
            if st.adjacent(u, v):
                return False
    return True


def _order_pattern(st, mu: Mesh) -> str:
    cells = mu.cells
    if all(
        not _prec(st, e, f) and not _prec(st, f, e)
        for k, ((_, _), e) in enumerate(cells)
        for ((_, _), f) in cells[k + 1 :]
    ):
        return "antichain"
    for name, pred in ORDER_PATTERNS.items():
        ok = True
        for (i, j), e in cells:
            for (i2, j2), f in cells:
                if (i, j) == (i2, j2):
                    continue
                if _prec(st, e, f) != bool(pred(i, j, i2, j2)):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return name
    return "other"


def _find_vertical_guard(st, mu: Mesh, cache):
    """Search a guard function witnessing verticality of the mesh.

    A guard exists iff there is one type triple (T_<, T_=, T_>), not all
    equal, such that each position i' has an element whose atp-profile
    against the mesh rows is the i'-step of the triple.  Profiles are
    computed once per element, so the search is polynomial.
    """
    rows, cols = mu.rows, mu.cols
    if not rows or not cols or len(rows) < 2:
        return None
    mmap = mu.mapping()
    profiles = {}
    for cand in st.universe:
        prof = []
        for i in rows:
            ts = {cache.pair(mmap[(i, j)], cand) for j in cols}
            if len(ts) != 1:
                prof = None
                break
            prof.append(ts.pop())
        if prof is not None:
            profiles.setdefault(tuple(prof), cand)
    observed = {t for prof in profiles for t in prof}
    n = len(rows)
    for lt, eq, gt in product(sorted(observed, key=repr), repeat=3):
        if lt == eq == gt:
            continue
        guard = {}
        for k in range(n):
            expected = tuple([lt] * k + [eq] + [gt] * (n - k - 1))
            if expected not in profiles:
                guard = None
                break
            guard[rows[k]] = profiles[expected]
        if guard is not None:
            return guard
    return None


def _is_vertical_guard(st, mu: Mesh, guard_map, cache):
    table = {}
    mmap = mu.mapping()
    for i2, cand in guard_map.items():
        for i in mu.rows:
            key = otp_pair(i, i2)
            for j in mu.cols:
                t = cache.pair(mmap[(i, j)], cand)
                if key in table:
                    if table[key] != t:
                        return False
                else:
                    table[key] = t
    return len(set(table.values())) > 1


@dataclass
class MeshClass:
    """Order pattern and structural flags of a single mesh."""

    pattern: str
    regular: bool
    chain: bool
    antichain: bool
    independent: bool
    vertical: bool
    horizontal: bool
    pseudo_vertical: bool
    pseudo_horizontal: bool
    inner_vertical: bool
    inner_horizontal: bool


def _inner(indices):
    return indices[1:-1]


def mesh_class(st, mu: Mesh, _cache=None, search_guards=True) -> MeshClass:
    """Classify a mesh; for non-regular meshes the pattern is 'other'."""
    cache = _cache or _AtpCache(st)
    pc = pair_class(st, mu, mu, cache)
    pattern = _order_pattern(st, mu) if pc.regular else "other"
    elements = mu.elements()
    chain = _is_chain(st, elements)
    antichain = _is_antichain(st, elements)
    independent = _is_independent(st, elements)
    vertical = horizontal = False
    pseudo_vertical = pseudo_horizontal = False
    if search_guards:
        vertical = _find_vertical_guard(st, mu, cache) is not None
        horizontal = _find_vertical_guard(st, mu.transpose(), cache) is not None
        if pc.regular and len(mu.cols) >= 3:
            restricted = mu.restrict(mu.rows, _inner(mu.cols))
            pseudo_vertical = _find_vertical_guard(st, restricted, cache) is not None
        if pc.regular and len(mu.rows) >= 3:
            restricted = mu.transpose().restrict(mu.cols, _inner(mu.rows))
            pseudo_horizontal = _find_vertical_guard(st, restricted, cache) is not None
    inner_vertical = pc.regular and pattern in VERTICAL_COLUMN
    inner_horizontal = pc.regular and pattern in HORIZONTAL_COLUMN
    return MeshClass(
        pattern=pattern,
        regular=pc.regular,
        chain=chain,
        antichain=antichain,
        independent=independent,
        vertical=vertical,
        horizontal=horizontal,
        pseudo_vertical=pseudo_vertical,
        pseudo_horizontal=pseudo_horizontal,
        inner_vertical=inner_vertical,
        inner_horizontal=inner_horizontal,
    )


def _sets_homogeneous(st, xs, ys, cache):
    """atp(u, v) constant over u in xs, v in ys, u != v."""
    types = set()
    for u in xs:
        for v in ys:
            if u != v:
                types.add(cache.pair(u, v))
    return len(types) <= 1


@dataclass
class TwisterReport:
    """Per-axiom outcome of a twister validation."""

    properties: dict
    notes: list

    @property
    def passed(self):
        return all(ok for ok, _ in self.properties.values())

    def lines(self):
        out = []
        for name in sorted(self.properties, key=lambda s: int(s[2:])):
            ok, witness = self.properties[name]
            mark = "pass" if ok else "FAIL"
            out.append(f"{name}: {mark}" + (f" ({witness})" if witness else ""))
        out.extend(f"note: {n}" for n in self.notes)
        return out


def validate_twister(st, seq: GuardedSequence) -> TwisterReport:
    """Check the fourteen twister axioms, reporting witnesses on failure."""
    cache = _AtpCache(st)
    props = {}
    notes = []
    h = seq.length
    meshes = seq.meshes
    a_map, b_map = seq.a_map(), seq.b_map()
    classes = [mesh_class(st, m, cache, search_guards=False) for m in meshes]

    # tw1: mu_1 vertical or inner-vertical
    if classes[0].inner_vertical:
        props["tw1"] = (True, "")
    elif a_map is not None and _is_vertical_guard(st, meshes[0], a_map, cache):
        props["tw1"] = (True, "")
    elif _find_vertical_guard(st, meshes[0], cache) is not None:
        props["tw1"] = (True, "")
    else:
        props["tw1"] = (False, "mu_1 neither vertical nor inner-vertical")

    # tw3: mu_h horizontal or inner-horizontal
    if classes[h - 1].inner_horizontal:
        props["tw3"] = (True, "")
    elif b_map is not None and _is_vertical_guard(
        st, meshes[h - 1].transpose(), b_map, cache
    ):
        props["tw3"] = (True, "")
    elif _find_vertical_guard(st, meshes[h - 1].transpose(), cache) is not None:
        props["tw3"] = (True, "")
    else:
        props["tw3"] = (False, "mu_h neither horizontal nor inner-horizontal")

    # tw2: inner meshes independent antichains
    bad = [
        s + 1
        for s in range(1, h - 1)
        if not (classes[s].independent and classes[s].antichain)
    ]
    props["tw2"] = (not bad, f"inner meshes {bad} not independent antichains" if bad else "")

    # tw4: consecutive pairs matching (with the two chain exceptions)
    ok4 = True
    witness4 = ""
    for s in range(h - 1):
        pc = pair_class(st, meshes[s], meshes[s + 1], cache)
        if pc.matching:
            continue
        exception = False
        if s == 0 and classes[0].chain and classes[1].antichain and pc.conducting:
            exception = True
        if (
            s == h - 2
            and classes[h - 1].chain
            and classes[h - 2].antichain
            and pc.conducting
        ):
            exception = True
        if exception:
            notes.append(f"tw4 exception exercised at ({s + 1}, {s + 2})")
            continue
        ok4 = False
        witness4 = f"pair ({s + 1}, {s + 2}) not matching"
        break
    props["tw4"] = (ok4, witness4)

    # tw5: distant pairs homogeneous
    ok5 = True
    witness5 = ""
    for s in range(h):
        for t in range(s + 2, h):
            pc = pair_class(st, meshes[s], meshes[t], cache)
            if not pc.homogeneous:
                ok5 = False
                witness5 = f"pair ({s + 1}, {t + 1}) not homogeneous"
                break
        if not ok5:
            break
    props["tw5"] = (ok5, witness5)

    # tw6/tw7: guards empty exactly for inner-vertical/horizontal ends
    if classes[0].inner_vertical:
        props["tw6"] = (a_map is None, "A must be empty for inner-vertical mu_1" if a_map else "")
    elif a_map is None:
        props["tw6"] = (False, "A missing but mu_1 is not inner-vertical")
    else:
        ok = _is_vertical_guard(st, meshes[0], a_map, cache)
        props["tw6"] = (ok, "" if ok else "A is not a vertical guard of mu_1")
    if classes[h - 1].inner_horizontal:
        props["tw7"] = (b_map is None, "B must be empty for inner-horizontal mu_h" if b_map else "")
    elif b_map is None:
        props["tw7"] = (False, "B missing but mu_h is not inner-horizontal")
    else:
        ok = _is_vertical_guard(st, meshes[h - 1].transpose(), b_map, cache)
        props["tw7"] = (ok, "" if ok else "B is not a horizontal guard of mu_h")

    # tw8: disjointness
    groups = []
    if a_map is not None:
        groups.append(("A", list(a_map.values())))
    for s, m in enumerate(meshes):
        groups.append((f"mu_{s + 1}", list(m.elements())))
    if b_map is not None:
        groups.append(("B", list(b_map.values())))
    seen = {}
    clash = ""
    for name, elems in groups:
        for e in elems:
            if e in seen and seen[e] != name:
                clash = f"{e!r} in {seen[e]} and {name}"
            elif e in seen:
                clash = f"{e!r} repeated in {name}"
            seen[e] = name
    props["tw8"] = (not clash, clash)

    # tw9/tw10/tw11: guard homogeneity
    ok9, w9 = True, ""
    if a_map is not None:
        for s in range(1, h):
            if not _sets_homogeneous(st, a_map.values(), meshes[s].elements(), cache):
                ok9, w9 = False, f"(A, mu_{s + 1}) not homogeneous"
                break
    props["tw9"] = (ok9, w9)
    ok10, w10 = True, ""
    if b_map is not None:
        for s in range(h - 1):
            if not _sets_homogeneous(st, meshes[s].elements(), b_map.values(), cache):
                ok10, w10 = False, f"(mu_{s + 1}, B) not homogeneous"
                break
    props["tw10"] = (ok10, w10)
    ok11 = True
    if a_map is not None and b_map is not None:
        ok11 = _sets_homogeneous(st, a_map.values(), b_map.values(), cache)
    props["tw11"] = (ok11, "" if ok11 else "(A, B) not homogeneous")

    # tw12: guards independent and chain-or-antichain
    ok12, w12 = True, ""
    for name, mp in (("A", a_map), ("B", b_map)):
        if mp is None:
            continue
        vals = list(mp.values())
        if not _is_independent(st, vals):
            ok12, w12 = False, f"{name} not independent"
        elif not (_is_chain(st, vals) or _is_antichain(st, vals)):
            ok12, w12 = False, f"{name} neither chain nor antichain"
    props["tw12"] = (ok12, w12)

    # tw13: the root stays outside
    outside = st.root not in seq.all_elements()
    props["tw13"] = (outside, "" if outside else "root inside the twister")

    # tw14: only the ends may be inner-vertical / inner-horizontal
    ok14, w14 = True, ""
    for s in range(h):
        if s != 0 and classes[s].inner_vertical:
            ok14, w14 = False, f"mu_{s + 1} is inner-vertical"
        if s != h - 1 and classes[s].inner_horizontal:
            ok14, w14 = False, f"mu_{s + 1} is inner-horizontal"
    props["tw14"] = (ok14, w14)

    return TwisterReport(props, notes)


def _simply_vertical(st, mu, mup, cache):
    """mu a chain, mup an antichain, comparabilities exactly i <= i'."""
    pc = pair_class(st, mu, mup, cache)
    if not pc.conducting:
        return False
    if not pair_class(st, mu, mu, cache).regular:
        return False
    if not pair_class(st, mup, mup, cache).regular:
        return False
    if not _is_chain(st, mu.elements()) or not _is_antichain(st, mup.elements()):
        return False
    if not _is_independent(st, list(mu.elements()) + list(mup.elements())):
        return False
    mm, pm = mu.mapping(), mup.mapping()
    for (i, j), (i2, j2) in product(mm, pm):
        below = _prec(st, mm[(i, j)], pm[(i2, j2)])
        if below != (i <= i2):
            return False
        if _prec(st, pm[(i2, j2)], mm[(i, j)]):
            return False
    return True


def _simply_horizontal(st, mu, mup, cache):
    """mu a chain, mup an antichain, comparabilities exactly j <= j' or j >= j'."""
    pc = pair_class(st, mu, mup, cache)
    if not pc.conducting:
        return False
    if not pair_class(st, mu, mu, cache).regular:
        return False
    if not pair_class(st, mup, mup, cache).regular:
        return False
    if not _is_chain(st, mu.elements()) or not _is_antichain(st, mup.elements()):
        return False
    if not _is_independent(st, list(mu.elements()) + list(mup.elements())):
        return False
    mm, pm = mu.mapping(), mup.mapping()
    for sense in (True, False):
        ok = True
        for (i, j), (i2, j2) in product(mm, pm):
            below = _prec(st, mm[(i, j)], pm[(i2, j2)])
            expect = (j <= j2) if sense else (j >= j2)
            if below != expect or _prec(st, pm[(i2, j2)], mm[(i, j)]):
                ok = False
                break
        if ok:
            return True
    return False


@dataclass
class CleanReport:
    """Pre-clean type detection plus the cleanness verdict."""

    preclean_type: Optional[int]
    clean: bool
    reasons: list
    twister_report: TwisterReport


def validate_clean(st, seq: GuardedSequence) -> CleanReport:
    """Detect the pre-clean type and check cleanness of a twister."""
    report = validate_twister(st, seq)
    if not report.passed:
        raise NotATwister("; ".join(line for line in report.lines() if "FAIL" in line))
    cache = _AtpCache(st)
    h = seq.length
    meshes = seq.meshes
    a_map, b_map = seq.a_map(), seq.b_map()
    reasons = []

    preclean = None
    if a_map is not None and b_map is not None:
        if _is_antichain(st, list(a_map.values())) and _is_antichain(
            st, list(b_map.values())
        ):
            preclean = 1
        else:
            reasons.append("guards present but not both antichains")
    elif a_map is None and b_map is None:
        first = _order_pattern(st, meshes[0])
        last = _order_pattern(st, meshes[h - 1])
        if first == "<_J" and last == "<_I":
            preclean = 2
        elif first == "<_{I,J}" and last in ANTILEX_PATTERNS:
            preclean = 3
        else:
            reasons.append(
                f"end patterns ({first}, {last}) fit neither type 2 nor type 3"
            )
    else:
        reasons.append("exactly one guard present")

    clean = preclean is not None
    if clean:
        # no vertex of mu_h below a vertex of mu_1
        for e in meshes[h - 1].elements():
            for f in meshes[0].elements():
                if _prec(st, e, f):
                    clean = False
                    reasons.append(f"{e!r} of mu_h below {f!r} of mu_1")
                    break
            if not clean:
                break
    if clean:
        layers = []
        if a_map is not None:
            layers.append(("A", list(a_map.values())))
        layers.extend((f"mu_{s + 1}", list(m.elements())) for s, m in enumerate(meshes))
        if b_map is not None:
            layers.append(("B", list(b_map.values())))
        for name, elems in layers:
            if not _sets_homogeneous(st, [st.root], elems, cache):
                clean = False
                reasons.append(f"root not homogeneous to {name}")
    if clean and preclean == 3 and h >= 2:
        first_ok = (
            pair_class(st, meshes[0], meshes[1], cache).matching
            or _simply_vertical(st, meshes[0], meshes[1], cache)
        )
        if not first_ok:
            clean = False
            reasons.append("(mu_1, mu_2) neither matching nor simply vertical")
        last_ok = (
            pair_class(st, meshes[h - 2], meshes[h - 1], cache).matching
            or _simply_horizontal(st, meshes[h - 1], meshes[h - 2], cache)
        )
        if not last_ok:
            clean = False
            reasons.append("(mu_h, mu_h-1) neither matching nor simply horizontal")
    return CleanReport(preclean, clean, reasons, report)


class MatchType(Enum):
    RIGHT = "M->"
    LEFT = "M<-"
    RIGHT_EDGE = "M->_e"
    LEFT_EDGE = "M<-_e"
    EDGE = "M_e"
    EDGE0 = "M_e0"
    EDGE1 = "M_e1"
    EDGE2 = "M_e2"


class StarType(Enum):
    SV_COVER = "S->_v"
    SV_COVER_EDGE = "S->_v_e"
    SV_EDGE = "S_v_e"
    SH_COVER = "S<-_h"
    SH_COVER_EDGE = "S<-_h_e"
    SH_EDGE = "S_h_e"


def _cover_rel(st, u, v):
    return st.order.parent.get(v) == u


def _max_element(st, elements):
    elements = list(elements)
    for e in elements:
        if all(f == e or _prec(st, f, e) for f in elements):
            return e
    return None


def _min_element(st, elements):
    elements = list(elements)
    for e in elements:
        if all(f == e or _prec(st, e, f) for f in elements):
            return e
    return None


def matching_type(st, seq: GuardedSequence, s: int) -> MatchType:
    """Type of the matching pair (mu_s, mu_s+1), 1-based."""
    h = seq.length
    if not 1 <= s < h:
        raise TowsError(f"s must be in 1..{h - 1}")
    mu, mup = seq.meshes[s - 1], seq.meshes[s]
    mm, pm = mu.mapping(), mup.mapping()
    pairs = [(mm[c], pm[c]) for c in mm]

    def all_cover_up():
        return all(_cover_rel(st, x, y) for x, y in pairs)

    def all_cover_down():
        return all(_cover_rel(st, y, x) for x, y in pairs)

    def all_edge():
        return all(st.adjacent(x, y) for x, y in pairs)

    def no_edge():
        return all(not st.adjacent(x, y) for x, y in pairs)

    if all_cover_up() and no_edge():
        return MatchType.RIGHT
    if all_cover_down() and no_edge():
        return MatchType.LEFT
    if all_cover_up() and all_edge():
        return MatchType.RIGHT_EDGE
    if all_cover_down() and all_edge():
        return MatchType.LEFT_EDGE
    if s == 1 and all_edge():
        top = _max_element(st, mu.elements())
        if top is not None:
            if all(_cover_rel(st, top, pm[c]) for c in pm):
                return MatchType.EDGE0
            bottom = _min_element(st, mup.elements())
            if bottom is not None and _cover_rel(st, top, bottom):
                return MatchType.EDGE1
    if s + 1 == h and all_edge():
        top = _max_element(st, mup.elements())
        if top is not None and all(_cover_rel(st, top, mm[c]) for c in mm):
            return MatchType.EDGE2
    if all_edge() and all(
        not _cover_rel(st, x, y) and not _cover_rel(st, y, x) for x, y in pairs
    ):
        return MatchType.EDGE
    raise PatternNotMatched(
        f"pair (mu_{s}, mu_{s + 1}) fits no displayed matching type"
    )


def star_type(st, guard_map, mesh: Mesh, side: str) -> StarType:
    """Type of a star between an indexed guard set and a mesh."""
    mm = mesh.mapping()
    if side == "v":
        pairs = [(guard_map[i], mm[(i, j)]) for (i, j) in mm]
        if all(_cover_rel(st, x, m) for x, m in pairs):
            if all(not st.adjacent(x, m) for x, m in pairs):
                return StarType.SV_COVER
            if all(st.adjacent(x, m) for x, m in pairs):
                return StarType.SV_COVER_EDGE
        if all(
            not _prec(st, x, m) and not _prec(st, m, x) and st.adjacent(x, m)
            for x, m in pairs
        ):
            return StarType.SV_EDGE
        raise PatternNotMatched("no vertical star type matches")
    if side == "h":
        pairs = [(guard_map[j], mm[(i, j)]) for (i, j) in mm]
        if all(_cover_rel(st, y, m) for y, m in pairs):
            if all(not st.adjacent(y, m) for y, m in pairs):
                return StarType.SH_COVER
            if all(st.adjacent(y, m) for y, m in pairs):
                return StarType.SH_COVER_EDGE
        if all(
            not _prec(st, y, m) and not _prec(st, m, y) and st.adjacent(y, m)
            for y, m in pairs
        ):
            return StarType.SH_EDGE
        raise PatternNotMatched("no horizontal star type matches")
    raise TowsError("side must be 'v' or 'h'")


@dataclass(frozen=True)
class Core:
    """An order-2 twist with layer labels; the seed of the family tau[n]."""

    base: TreeOrderedStructure
    core_type: int
    length: int
    a: Optional[tuple]  # elements for guard indices (1, 2)
    b: Optional[tuple]
    meshes: tuple  # per mesh: elements in CELLS2 order

    def mesh(self, s) -> Mesh:
        cells = tuple(zip(CELLS2, self.meshes[s - 1]))
        return Mesh((1, 2), (1, 2), cells)

    def sequence(self) -> GuardedSequence:
        return GuardedSequence(
            (1, 2),
            (1, 2),
            tuple(self.mesh(s) for s in range(1, self.length + 1)),
            self.a,
            self.b,
        )

    def layer_elements(self):
        out = list(self.a or ())
        for cells in self.meshes:
            out.extend(cells)
        out.extend(self.b or ())
        return out

    def equivalent(self, other: "Core") -> bool:
        """Label-respecting isomorphism of cores."""
        if (
            self.core_type != other.core_type
            or self.length != other.length
            or (self.a is None) != (other.a is None)
            or (self.b is None) != (other.b is None)
        ):
            return False
        mapping = {self.base.root: other.base.root}
        if self.a is not None:
            mapping.update(zip(self.a, other.a))
        if self.b is not None:
            mapping.update(zip(self.b, other.b))
        for s in range(self.length):
            mapping.update(zip(self.meshes[s], other.meshes[s]))
        if len(mapping) != len(self.base.universe) or len(
            set(mapping.values())
        ) != len(other.base.universe):
            return False
        for v in self.base.universe:
            pv = self.base.order.parent.get(v)
            pw = other.base.order.parent.get(mapping[v])
            if (pv is None) != (pw is None):
                return False
            if pv is not None and mapping[pv] != pw:
                return False
        edges_self = {
            frozenset((mapping[u], mapping[v])) for u, v in self.base.relations["E"]
        }
        edges_other = {frozenset(e) for e in other.base.relations["E"]}
        return edges_self == edges_other


@dataclass
class CoreReport:
    ok: bool
    issues: list
    clean_report: Optional[CleanReport] = None

    def lines(self):
        out = [f"core: {'valid' if self.ok else 'INVALID'}"]
        out.extend(f"issue: {i}" for i in self.issues)
        return out


@dataclass(frozen=True)
class LabeledTwist:
    """tau[n]: the twist of order n extrapolated from a core."""

    structure: TreeOrderedStructure
    order: int
    core_type: int
    length: int
    a: Optional[tuple]
    b: Optional[tuple]
    meshes: tuple  # meshes[s][i][j], 0-based nesting of 1-based indices

    def cell(self, s, i, j):
        return self.meshes[s - 1][i - 1][j - 1]

    def mesh(self, s) -> Mesh:
        n = self.order
        cells = tuple(
            ((i, j), self.cell(s, i, j))
            for i in range(1, n + 1)
            for j in range(1, n + 1)
        )
        return Mesh(tuple(range(1, n + 1)), tuple(range(1, n + 1)), cells)

    def sequence(self) -> GuardedSequence:
        idx = tuple(range(1, self.order + 1))
        return GuardedSequence(
            idx,
            idx,
            tuple(self.mesh(s) for s in range(1, self.length + 1)),
            self.a,
            self.b,
        )


_OTP_TO_CORE = {"<": (1, 2), "=": (1, 1), ">": (2, 1)}


def _non_consecutive_check(st, layers, core_type, h):
    """No comparabilities or edges between non-consecutive layers, with the
    type-3 exceptions for layers above mu_1 / mu_h."""
    issues = []
    for x in range(len(layers)):
        for y in range(x + 2, len(layers)):
            name_x, elems_x = layers[x]
            name_y, elems_y = layers[y]
            edge = any(st.adjacent(u, v) for u in elems_x for v in elems_y)
            if edge:
                issues.append(f"E-relation between {name_x} and {name_y}")
            up = any(_prec(st, u, v) for u in elems_x for v in elems_y)
            down = any(_prec(st, v, u) for u in elems_x for v in elems_y)
            allowed_up = core_type == 3 and name_x in ("mu_1", "mu_" + str(h))
            if down:
                issues.append(f"{name_y} below {name_x}")
            if up and not allowed_up:
                issues.append(f"{name_x} below {name_y}")
    return issues


def validate_core(core: Core) -> CoreReport:
    """Full constraint list for a core, then the authoritative tau[4] check."""
    issues = []
    st = core.base
    if core.core_type not in (1, 2, 3):
        return CoreReport(False, [f"unknown core type {core.core_type}"])
    if core.core_type == 1:
        if core.a is None or core.b is None:
            issues.append("type 1 requires both guards")
        if core.length < 1:
            issues.append("length must be >= 1")
    else:
        if core.a is not None or core.b is not None:
            issues.append("types 2 and 3 forbid guards")
        if core.length < 2:
            issues.append("types 2 and 3 need length >= 2")
    if len(core.meshes) != core.length:
        issues.append("mesh count differs from declared length")
    elems = core.layer_elements()
    if len(set(elems)) != len(elems):
        issues.append("layer assignment repeats an element")
    missing = set(st.universe) - set(elems) - {st.root}
    if missing:
        issues.append(f"elements outside all layers: {sorted(missing)}")
    if st.root in elems:
        issues.append("root assigned to a layer")
    if issues:
        return CoreReport(False, issues)

    layers = []
    if core.a is not None:
        layers.append(("A", list(core.a)))
    for s in range(1, core.length + 1):
        layers.append((f"mu_{s}", list(core.meshes[s - 1])))
    if core.b is not None:
        layers.append(("B", list(core.b)))

    for name, elems in layers:
        if not _is_independent(st, elems):
            issues.append(f"layer {name} not independent")
        nbr = {st.adjacent(st.root, e) for e in elems}
        if len(nbr) > 1:
            issues.append(f"layer {name} splits the root neighborhood")
    issues.extend(_non_consecutive_check(st, layers, core.core_type, core.length))

    seq = core.sequence()
    try:
        clean = validate_clean(st, seq)
        if not clean.clean:
            issues.append("core sequence is not clean: " + "; ".join(clean.reasons))
        elif clean.preclean_type != core.core_type:
            issues.append(
                f"declared type {core.core_type} but detected type {clean.preclean_type}"
            )
    except NotATwister as err:
        issues.append(f"core sequence is not a twister: {err}")
        return CoreReport(False, issues)

    # consecutive pair classification per the displayed tables
    basic = (
        MatchType.RIGHT,
        MatchType.LEFT,
        MatchType.RIGHT_EDGE,
        MatchType.LEFT_EDGE,
        MatchType.EDGE,
    )
    try:
        if core.core_type == 1:
            star_type(st, dict(zip((1, 2), core.a)), core.mesh(1), "v")
            star_type(st, dict(zip((1, 2), core.b)), core.mesh(core.length), "h")
            for s in range(1, core.length):
                mt = matching_type(st, seq, s)
                if mt not in basic:
                    issues.append(
                        f"type 1 pair (mu_{s}, mu_{s + 1}) has end-specific type {mt.value}"
                    )
        else:
            cache = _AtpCache(st)
            h = core.length
            for s in range(1, h):
                try:
                    mt = matching_type(st, seq, s)
                except PatternNotMatched:
                    if core.core_type == 3 and s == 1 and _simply_vertical(
                        st, core.mesh(1), core.mesh(2), cache
                    ):
                        continue
                    if core.core_type == 3 and s == h - 1 and _simply_horizontal(
                        st, core.mesh(h), core.mesh(h - 1), cache
                    ):
                        continue
                    raise
                if core.core_type == 2 and s in (1, h - 1):
                    if mt != MatchType.EDGE:
                        issues.append(
                            f"type 2 end pair (mu_{s}, mu_{s + 1}) must be {MatchType.EDGE.value}"
                        )
                elif core.core_type == 3 and s == 1:
                    if mt not in (MatchType.EDGE, MatchType.EDGE0, MatchType.EDGE1):
                        issues.append(
                            f"type 3 first pair has type {mt.value}, expected an M_e variant"
                        )
                elif core.core_type == 3 and s == h - 1:
                    if mt not in (MatchType.EDGE, MatchType.EDGE1, MatchType.EDGE2):
                        issues.append(
                            f"type 3 last pair has type {mt.value}, expected an M_e variant"
                        )
                elif mt not in basic:
                    issues.append(
                        f"inner pair (mu_{s}, mu_{s + 1}) has end-specific type {mt.value}"
                    )
    except PatternNotMatched as err:
        issues.append(str(err))

    if issues:
        return CoreReport(False, issues)

    # authoritative check: tau[4] must be a clean twister of the declared type
    try:
        tau4 = build_twist(core, 4)
    except InvalidCore as err:
        return CoreReport(False, [f"tau[4] construction failed: {err}"])
    try:
        clean4 = validate_clean(tau4.structure, tau4.sequence())
    except NotATwister as err:
        return CoreReport(False, [f"tau[4] is not a twister: {err}"])
    if not clean4.clean or clean4.preclean_type != core.core_type:
        return CoreReport(
            False,
            [f"tau[4] not clean of type {core.core_type}: {'; '.join(clean4.reasons)}"],
            clean4,
        )
    return CoreReport(True, [], clean4)


def _layer_tokens(core: Core, n: int):
    """Descriptors (kind, payload) and fresh tokens for tau[n]."""
    items = []
    if core.a is not None:
        items.extend((("A", i), f"a{i}") for i in range(1, n + 1))
    for s in range(1, core.length + 1):
        items.extend(
            ((("M", s, i, j)), f"m{s}:{i},{j}")
            for i in range(1, n + 1)
            for j in range(1, n + 1)
        )
    if core.b is not None:
        items.extend((("B", j), f"b{j}") for j in range(1, n + 1))
    return items


def _core_pair(core: Core, d1, d2):
    """Core elements realizing the otp signature of two descriptors."""
    k1, k2 = d1[0], d2[0]
    if k1 == "A" and k2 == "A":
        i, i2 = _OTP_TO_CORE[otp_pair(d1[1], d2[1])]
        return core.a[i - 1], core.a[i2 - 1]
    if k1 == "B" and k2 == "B":
        j, j2 = _OTP_TO_CORE[otp_pair(d1[1], d2[1])]
        return core.b[j - 1], core.b[j2 - 1]
    if k1 == "A" and k2 == "B":
        return core.a[0], core.b[0]
    if k1 == "B" and k2 == "A":
        return core.b[0], core.a[0]
    if k1 == "A" and k2 == "M":
        i, i2 = _OTP_TO_CORE[otp_pair(d1[1], d2[2])]
        return core.a[i - 1], core.mesh(d2[1])(i2, 1)
    if k1 == "M" and k2 == "A":
        i, i2 = _OTP_TO_CORE[otp_pair(d1[2], d2[1])]
        return core.mesh(d1[1])(i, 1), core.a[i2 - 1]
    if k1 == "B" and k2 == "M":
        j, j2 = _OTP_TO_CORE[otp_pair(d1[1], d2[3])]
        return core.b[j - 1], core.mesh(d2[1])(1, j2)
    if k1 == "M" and k2 == "B":
        j, j2 = _OTP_TO_CORE[otp_pair(d1[3], d2[1])]
        return core.mesh(d1[1])(1, j), core.b[j2 - 1]
    # mesh vs mesh
    _, s1, i, j = d1
    _, s2, i2, j2 = d2
    ci, ci2 = _OTP_TO_CORE[otp_pair(i, i2)]
    cj, cj2 = _OTP_TO_CORE[otp_pair(j, j2)]
    return core.mesh(s1)(ci, cj), core.mesh(s2)(ci2, cj2)


def build_twist(core: Core, n: int) -> LabeledTwist:
    """Construct tau[n] by copying atomic types from the core.

    Every pairwise relation is read off the core pair with the same order
    type signature; guards are keyed by their single index, the root is
    homogeneous per layer.  Runs in O(n^4) pair fills.
    """
    if n < 2:
        raise InvalidCore("twists require order n >= 2")
    items = _layer_tokens(core, n)
    st = core.base
    root = "r"
    tokens = [root] + [tok for _, tok in items]
    if len(set(tokens)) != len(tokens):
        raise InvalidCore("token clash while building the twist")

    prec = {tok: set() for tok in tokens}  # prec[y] = elements strictly below y
    edges = []
    for k, (d1, t1) in enumerate(items):
        for d2, t2 in items[k + 1 :]:
            c1, c2 = _core_pair(core, d1, d2)
            if c1 == c2:
                raise InvalidCore(f"descriptors {d1}/{d2} map to one core cell")
            if st.adjacent(c1, c2):
                edges.append((t1, t2))
            if _prec(st, c1, c2):
                prec[t2].add(t1)
            elif _prec(st, c2, c1):
                prec[t1].add(t2)
    for d, tok in items:
        prec[tok].add(root)
        kind = d[0]
        if kind == "A":
            probe = core.a[0]
        elif kind == "B":
            probe = core.b[0]
        else:
            probe = core.mesh(d[1])(1, 1)
        if st.adjacent(st.root, probe):
            edges.append((root, tok))

    # derive the parent map and verify the copied relation is a tree-order
    parent = {}
    for tok in tokens:
        if tok == root:
            continue
        below = prec[tok]
        best = None
        for cand in below:
            if best is None or len(prec[cand]) > len(prec[best]):
                best = cand
        ties = [c for c in below if len(prec[c]) == len(prec[best]) and c != best]
        if ties:
            raise InvalidCore(f"ambiguous parent for {tok!r}")
        parent[tok] = best
    order = TreeOrder(tokens, root, parent)
    for tok in tokens:
        if set(order.ancestors(tok)) != prec.get(tok, set()) - {tok}:
            raise InvalidCore(
                f"copied order is not a tree-order (witness {tok!r})"
            )
    structure = TreeOrderedStructure(order, GRAPH_SIGNATURE, {"E": edges})

    a = tuple(f"a{i}" for i in range(1, n + 1)) if core.a is not None else None
    b = tuple(f"b{j}" for j in range(1, n + 1)) if core.b is not None else None
    meshes = tuple(
        tuple(
            tuple(f"m{s}:{i},{j}" for j in range(1, n + 1))
            for i in range(1, n + 1)
        )
        for s in range(1, core.length + 1)
    )
    return LabeledTwist(structure, n, core.core_type, core.length, a, b, meshes)


def core_of(twist: LabeledTwist) -> Core:
    """The order-2 core: induced substructure on indices {1, 2} plus root."""
    if twist.order < 2:
        raise TowsError("core extraction needs order >= 2")
    from .core import induced

    keep = [twist.structure.root]
    a = b = None
    if twist.a is not None:
        a = (twist.a[0], twist.a[1])
        keep.extend(a)
    meshes = []
    for s in range(1, twist.length + 1):
        cells = tuple(twist.cell(s, i, j) for i, j in CELLS2)
        meshes.append(cells)
        keep.extend(cells)
    if twist.b is not None:
        b = (twist.b[0], twist.b[1])
        keep.extend(b)
    base = induced(twist.structure, keep)
    return Core(base, twist.core_type, twist.length, a, b, tuple(meshes))


def find_twist(st, max_len: int, order: int = 2, limit: int = 14):
    """Exhaustive search for a clean twister of the given order.

    Tries lengths 1..max_len and all guard shapes in a fixed order; prunes
    by incremental atomic-type tables before handing complete candidates to
    the clean validator.  Returns the first clean twister found, or None.
    """
    guard(len(st.universe), limit, "find_twist")
    cache = _AtpCache(st)
    pool = [v for v in st.universe if v != st.root]
    idx = tuple(range(1, order + 1))
    cells = [(i, j) for i in idx for j in idx]

    def attempt(h, with_a, with_b):
        # variable layout: optional A, then the mesh cells, then optional B
        slots = []
        if with_a:
            slots.extend(("A", i) for i in idx)
        for s in range(1, h + 1):
            slots.extend(("M", s, i, j) for (i, j) in cells)
        if with_b:
            slots.extend(("B", j) for j in idx)
        assign = {}
        used = set()
        tables = {}

        def mesh_of(s):
            return Mesh.from_map(
                idx, idx, {c: assign[("M", s, c[0], c[1])] for c in cells}
            )

        def guard_table_varies(prefix):
            vals = {t for key, t in tables.items() if key[0] == prefix}
            return len(vals) > 1

        def end_checks(pos):
            # structural necessities checked as soon as a layer is complete
            d = slots[pos]
            if d[0] != "M" or (d[1], d[2], d[3]) != (h, idx[-1], idx[-1]):
                if d[0] == "M" and (d[2], d[3]) == (idx[-1], idx[-1]) and d[1] == 1:
                    # mu_1 complete: tw1 necessity
                    if with_a:
                        if not guard_table_varies("guardA"):
                            return False
                    elif _order_pattern(st, mesh_of(1)) not in VERTICAL_COLUMN:
                        return False
                return True
            # mu_h complete: tw3 necessity (and tw1 when h == 1)
            if h == 1 and with_a and not guard_table_varies("guardA"):
                return False
            if h == 1 and not with_a and _order_pattern(st, mesh_of(1)) not in VERTICAL_COLUMN:
                return False
            if not with_b and _order_pattern(st, mesh_of(h)) not in HORIZONTAL_COLUMN:
                return False
            return True

        def key_for(d1, d2):
            # descriptors arrive sorted, so kinds appear as AA, AB, AM, BB,
            # BM, or MM with s1 <= s2
            k1, k2 = d1[0], d2[0]
            if k1 == "M":
                s, t = d1[1], d2[1]
                if abs(s - t) > 1:
                    return ("far", s, t)
                return ("near", s, t, otp_pair(d1[2], d2[2]), otp_pair(d1[3], d2[3]))
            if k1 == "A" and k2 == "M":
                if d2[1] == 1:
                    return ("guardA", otp_pair(d1[1], d2[2]))
                return ("farA", d2[1])
            if k1 == "B" and k2 == "M":
                if d2[1] == h:
                    return ("guardB", otp_pair(d1[1], d2[3]))
                return ("farB", d2[1])
            if k1 == "A" and k2 == "A":
                return ("AA", otp_pair(d1[1], d2[1]))
            if k1 == "B" and k2 == "B":
                return ("BB", otp_pair(d1[1], d2[1]))
            return ("AB",)

        def rec(pos):
            if pos == len(slots):
                if with_b and not guard_table_varies("guardB"):
                    return None
                meshes = tuple(mesh_of(s) for s in range(1, h + 1))
                a = tuple(assign[("A", i)] for i in idx) if with_a else None
                b = tuple(assign[("B", j)] for j in idx) if with_b else None
                seq = GuardedSequence(idx, idx, meshes, a, b)
                try:
                    report = validate_clean(st, seq)
                except NotATwister:
                    return None
                return seq if report.clean else None

            d = slots[pos]
            for cand in pool:
                if cand in used:
                    continue
                added = []
                ok = True
                for d2, v2 in assign.items():
                    if d <= d2:
                        key = key_for(d, d2)
                        t = cache.pair(cand, v2)
                    else:
                        key = key_for(d2, d)
                        t = cache.pair(v2, cand)
                    if key in tables:
                        if tables[key] != t:
                            ok = False
                            break
                    else:
                        tables[key] = t
                        added.append(key)
                if ok:
                    assign[d] = cand
                    used.add(cand)
                    if end_checks(pos):
                        got = rec(pos + 1)
                        if got is not None:
                            return got
                    del assign[d]
                    used.remove(cand)
                for key in added:
                    del tables[key]
            return None

        return rec(0)

    for h in range(1, max_len + 1):
        for with_a, with_b in ((True, True), (True, False), (False, True), (False, False)):
            found = attempt(h, with_a, with_b)
            if found is not None:
                return found
    return None
