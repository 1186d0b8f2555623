"""Finite tree-ordered weakly sparse structures.

Derived graphs, fundamental graphs over GF(2), tree-ordered minors and
sparsification, twist machinery, rack pipelines, and desk-scale sparsity
oracles, with text formats and a command line front end.
"""

from importlib import resources

from .core import (
    GRAPH_SIGNATURE,
    AtomicType,
    MarkSet,
    OrderRel,
    Signature,
    TreeOrder,
    TreeOrderedStructure,
    atp,
    induced,
    iso,
    lca,
    order_rel,
    otp,
    otp_pair,
    structure,
    tows_graph,
)
from .derive import gaifman, incidence, mark_tinc2, starify, tgaif, tinc, tinc_decode
from .errors import (
    DecodeFailure,
    ElementNotFound,
    FormatError,
    InvalidBasisChange,
    InvalidCore,
    InvalidMarking,
    NotACover,
    PatternNotMatched,
    SignatureMismatch,
    SizeBoundExceeded,
    TowsError,
)
from .graphs import (
    BipartiteGraph,
    Graph,
    OrderedBipartite,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    graph_iso,
    induced_subgraph_iso,
    path_graph,
    subdivide,
)
from .matroid import (
    Flattening,
    FundamentalGraph,
    Gf2Vector,
    change_basis,
    flatten,
    fundamental_cycle,
    lambda_equivalent,
    lambda_general,
    lambda_graph,
)
from .minors import (
    contract_cover,
    delete_tuple,
    delete_vertex,
    enum_cont,
    enum_minors,
    minor_poset_check,
    mon,
    shrink,
    sp,
    sp_all,
)
from .racks import (
    GroundingSpec,
    RackSpec,
    grounding,
    host,
    implied_params,
    mark_predicates,
    rack,
    verify_pipeline,
)
from .sparsity import (
    biclique_number,
    depth1_minors,
    has_biclique,
    induced_clique_subdivision,
    is_minor,
    naive_biclique_number,
    red_width,
    tww_exact,
)
from .twists import (
    Core,
    GuardedSequence,
    LabeledTwist,
    MatchType,
    Mesh,
    NotATwister,
    StarType,
    build_twist,
    core_of,
    find_twist,
    matching_type,
    mesh_class,
    pair_class,
    star_type,
    validate_clean,
    validate_core,
    validate_twister,
)

__version__ = "0.1.0"

SHIPPED_CORES = ("core_t1", "core_t2", "core_t3")


def shipped_core_text(name: str) -> str:
    """Text of a shipped sample core (core_t1, core_t2, or core_t3)."""
    if not name.endswith(".core"):
        name = name + ".core"
    return resources.files("tows_lab.cores").joinpath(name).read_text()


def shipped_core(name: str) -> Core:
    from .formats import parse_core

    return parse_core(shipped_core_text(name))
