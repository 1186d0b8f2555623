"""Line-based text formats, the JSON mirror, and DOT export.

All emitters are canonical: parsing an emitted stream and emitting again
reproduces it byte for byte.
"""

from __future__ import annotations

import json

from .core import MarkSet, Signature, TreeOrder, TreeOrderedStructure
from .errors import FormatError
from .graphs import Graph, OrderedBipartite
from .matroid import FundamentalGraph
from .twists import CELLS2, Core, LabeledTwist

__all__ = [
    "parse",
    "parse_stream",
    "parse_structure",
    "parse_graph",
    "parse_obgraph",
    "parse_core",
    "parse_twist",
    "parse_fund",
    "parse_sequence",
    "emit",
    "emit_tows",
    "emit_graph",
    "emit_obgraph",
    "emit_fund",
    "emit_core",
    "emit_twist",
    "emit_sequence",
    "emit_json",
    "emit_dot",
]

_HEADERS = ("tows", "graph", "obgraph", "fund", "core", "twist", "seq")


def _tokenize(text):
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line.split())
    return lines


def _check_token(tok):
    if not tok or any(c.isspace() for c in tok) or "#" in tok:
        raise FormatError(f"invalid token {tok!r}")
    return tok


def _parse_signature(tokens):
    entries = []
    for tok in tokens:
        if "/" not in tok:
            raise FormatError(f"signature entry {tok!r} missing '/'")
        name, arity = tok.split("/", 1)
        symmetric = arity.endswith("s")
        if symmetric:
            arity = arity[:-1]
        if not arity.isdigit():
            raise FormatError(f"bad arity in {tok!r}")
        entries.append((name, int(arity), symmetric))
    return Signature(tuple(entries))


def _signature_tokens(sig: Signature):
    return [
        f"{name}/{arity}{'s' if symmetric else ''}"
        for name, arity, symmetric in sig.entries
    ]


def _parse_tows_lines(lines):
    signature = None
    universe = []
    root = None
    parent = {}
    relations = {}
    marks = {}
    for parts in lines:
        kw = parts[0]
        if kw == "tows":
            continue
        if kw == "signature":
            signature = _parse_signature(parts[1:])
        elif kw == "universe":
            universe.extend(parts[1:])
        elif kw == "root":
            root = parts[1]
        elif kw == "parent":
            if len(parts) != 3:
                raise FormatError(f"parent line needs child and parent: {parts}")
            parent[parts[1]] = parts[2]
        elif kw == "rel":
            relations.setdefault(parts[1], []).append(tuple(parts[2:]))
        elif kw == "mark":
            marks.setdefault(parts[1], set()).update(parts[2:])
        else:
            raise FormatError(f"unknown keyword {kw!r} in tows block")
    if signature is None:
        raise FormatError("tows block misses the signature line")
    if root is None:
        raise FormatError("tows block misses the root line")
    order = TreeOrder(tuple(universe), root, parent)
    structure = TreeOrderedStructure(order, signature, relations)
    markset = MarkSet(marks)
    markset.validate(structure)
    return structure, markset


def parse_structure(text):
    lines = _tokenize(text)
    if not lines or lines[0][0] != "tows":
        raise FormatError("expected a 'tows 1' header")
    return _parse_tows_lines(lines)


def _parse_graph_lines(lines):
    vertices = []
    edges = []
    for parts in lines:
        kw = parts[0]
        if kw == "graph":
            continue
        if kw == "universe":
            vertices.extend(parts[1:])
        elif kw == "edge":
            if len(parts) != 3:
                raise FormatError(f"edge line needs two endpoints: {parts}")
            edges.append((parts[1], parts[2]))
        else:
            raise FormatError(f"unknown keyword {kw!r} in graph block")
    return Graph(tuple(vertices), edges)


def parse_graph(text):
    lines = _tokenize(text)
    if not lines or lines[0][0] != "graph":
        raise FormatError("expected a 'graph 1' header")
    return _parse_graph_lines(lines)


def _parse_obgraph_lines(lines):
    part_a, part_b, edges = [], [], []
    for parts in lines:
        kw = parts[0]
        if kw == "obgraph":
            continue
        if kw == "partA":
            part_a.extend(parts[1:])
        elif kw == "partB":
            part_b.extend(parts[1:])
        elif kw == "edge":
            edges.append((parts[1], parts[2]))
        else:
            raise FormatError(f"unknown keyword {kw!r} in obgraph block")
    return OrderedBipartite(tuple(part_a), tuple(part_b), edges)


def parse_obgraph(text):
    lines = _tokenize(text)
    if not lines or lines[0][0] != "obgraph":
        raise FormatError("expected an 'obgraph 1' header")
    return _parse_obgraph_lines(lines)


def _parse_fund_lines(lines):
    covers, zs = [], []
    slots = 1
    adj = []
    for parts in lines:
        kw = parts[0]
        if kw == "fund":
            continue
        if kw == "slots":
            slots = int(parts[1])
        elif kw == "partY":
            covers.extend(tok[2:] if tok.startswith("y:") else tok for tok in parts[1:])
        elif kw == "partZ":
            zs.extend(tok[2:] if tok.startswith("z:") else tok for tok in parts[1:])
        elif kw == "adj":
            slot = parts[1]
            if not slot.startswith("E"):
                raise FormatError(f"bad adjacency slot {slot!r}")
            y = parts[2][2:] if parts[2].startswith("y:") else parts[2]
            z = parts[3][2:] if parts[3].startswith("z:") else parts[3]
            adj.append((int(slot[1:]), y, z))
        else:
            raise FormatError(f"unknown keyword {kw!r} in fund block")
    cover_pos = {c: i for i, c in enumerate(covers)}
    nbhd = {z: [0] * slots for z in zs}
    for slot, y, z in adj:
        if z not in nbhd or y not in cover_pos:
            raise FormatError(f"adjacency mentions unknown vertex: {(slot, y, z)}")
        nbhd[z][slot - 1] |= 1 << cover_pos[y]
    return FundamentalGraph(covers, zs, {z: tuple(v) for z, v in nbhd.items()}, slots)


def parse_fund(text):
    lines = _tokenize(text)
    if not lines or lines[0][0] != "fund":
        raise FormatError("expected a 'fund 1' header")
    return _parse_fund_lines(lines)


def _split_core_lines(lines):
    meta = {}
    tows_lines = []
    layers = []
    for parts in lines:
        kw = parts[0]
        if kw in ("core", "twist"):
            meta["kind"] = kw
        elif kw == "type":
            meta["type"] = int(parts[1])
        elif kw == "length":
            meta["length"] = int(parts[1])
        elif kw == "order":
            meta["order"] = int(parts[1])
        elif kw == "layer":
            layers.append(parts[1:])
        else:
            tows_lines.append(parts)
    if "type" not in meta or "length" not in meta:
        raise FormatError("core/twist block misses type or length")
    return meta, tows_lines, layers


def _parse_core_lines(lines):
    meta, tows_lines, layers = _split_core_lines(lines)
    structure, _ = _parse_tows_lines(tows_lines)
    order = meta.get("order", 2)
    h = meta["length"]
    a = {}
    b = {}
    meshes = {}
    for lay in layers:
        if lay[0] == "A":
            a[int(lay[1])] = lay[2]
        elif lay[0] == "B":
            b[int(lay[1])] = lay[2]
        elif lay[0] == "M":
            s, i, j = int(lay[1]), int(lay[2]), int(lay[3])
            meshes[(s, i, j)] = lay[4]
        else:
            raise FormatError(f"unknown layer kind {lay[0]!r}")
    return meta, structure, order, h, a, b, meshes


def parse_core(text) -> Core:
    lines = _tokenize(text)
    if not lines or lines[0][0] not in ("core", "twist"):
        raise FormatError("expected a 'core 1' header")
    meta, structure, order, h, a, b, meshes = _parse_core_lines(lines)
    if order != 2:
        raise FormatError("a core file must have order 2")
    mesh_tuples = []
    for s in range(1, h + 1):
        try:
            mesh_tuples.append(tuple(meshes[(s, i, j)] for i, j in CELLS2))
        except KeyError as err:
            raise FormatError(f"mesh {s} misses cell {err}") from None
    a_t = tuple(a[i] for i in (1, 2)) if a else None
    b_t = tuple(b[j] for j in (1, 2)) if b else None
    return Core(structure, meta["type"], h, a_t, b_t, tuple(mesh_tuples))


def parse_twist(text) -> LabeledTwist:
    lines = _tokenize(text)
    if not lines or lines[0][0] != "twist":
        raise FormatError("expected a 'twist 1' header")
    meta, structure, order, h, a, b, meshes = _parse_core_lines(lines)
    mesh_nested = tuple(
        tuple(
            tuple(meshes[(s, i, j)] for j in range(1, order + 1))
            for i in range(1, order + 1)
        )
        for s in range(1, h + 1)
    )
    a_t = tuple(a[i] for i in range(1, order + 1)) if a else None
    b_t = tuple(b[j] for j in range(1, order + 1)) if b else None
    return LabeledTwist(structure, order, meta["type"], h, a_t, b_t, mesh_nested)


def parse_sequence(text):
    lines = _tokenize(text)
    if not lines or lines[0][0] != "seq":
        raise FormatError("expected a 'seq 1' header")
    merges = []
    for parts in lines[1:]:
        if parts[0] != "merge" or len(parts) != 3:
            raise FormatError(f"bad merge line: {parts}")
        merges.append((parts[1], parts[2]))
    return merges


def parse(text):
    """Parse a single object of any supported kind."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return from_json(json.loads(text))
    lines = _tokenize(text)
    if not lines:
        raise FormatError("empty input")
    head = lines[0][0]
    if head == "tows":
        return _parse_tows_lines(lines)
    if head == "graph":
        return _parse_graph_lines(lines)
    if head == "obgraph":
        return _parse_obgraph_lines(lines)
    if head == "fund":
        return _parse_fund_lines(lines)
    if head == "core":
        return parse_core(text)
    if head == "twist":
        return parse_twist(text)
    if head == "seq":
        return parse_sequence(text)
    raise FormatError(f"unknown header {head!r}")


def parse_stream(text):
    """Parse a stream of blocks separated by their header lines."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return [from_json(json.loads(text))]
    blocks = []
    current = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()[0]
        if head in _HEADERS and current:
            blocks.append("\n".join(current))
            current = []
        current.append(raw)
    if current:
        blocks.append("\n".join(current))
    return [parse(block) for block in blocks]


def emit_tows(structure: TreeOrderedStructure, marks: MarkSet = None) -> str:
    out = ["tows 1"]
    out.append("signature " + " ".join(_signature_tokens(structure.signature)))
    out.append("universe " + " ".join(_check_token(v) for v in structure.universe))
    out.append(f"root {structure.root}")
    for v in structure.universe:
        if v != structure.root:
            out.append(f"parent {v} {structure.order.parent[v]}")
    for name in structure.signature.symbols:
        for t in structure.tuples(name):
            out.append(f"rel {name} " + " ".join(t))
    if marks is not None:
        idx = structure.order.index
        for name in marks.names():
            vals = sorted(marks.get(name), key=idx)
            out.append(f"mark {name} " + " ".join(vals))
    return "\n".join(out) + "\n"


def emit_graph(g: Graph) -> str:
    out = ["graph 1"]
    out.append("universe " + " ".join(_check_token(v) for v in g.vertices))
    for u, v in g.sorted_edges():
        out.append(f"edge {u} {v}")
    return "\n".join(out) + "\n"


def emit_obgraph(g: OrderedBipartite) -> str:
    out = ["obgraph 1"]
    out.append("partA " + " ".join(g.part_a))
    out.append("partB " + " ".join(g.part_b))
    for a, b in g.sorted_edges():
        out.append(f"edge {a} {b}")
    return "\n".join(out) + "\n"


def emit_fund(f: FundamentalGraph) -> str:
    out = ["fund 1", f"slots {f.slots}"]
    out.append("partY " + " ".join(f"y:{c}" for c in f.covers))
    out.append("partZ " + " ".join(f"z:{z}" for z in f.zs))
    for slot, y, z in f.adjacency():
        out.append(f"adj E{slot} y:{y} z:{z}")
    return "\n".join(out) + "\n"


def _emit_layers(a, b, meshes, order):
    out = []
    if a is not None:
        for i, elem in enumerate(a, start=1):
            out.append(f"layer A {i} {elem}")
    for s, mesh in enumerate(meshes, start=1):
        if order == 2:
            for (i, j), elem in zip(CELLS2, mesh):
                out.append(f"layer M {s} {i} {j} {elem}")
        else:
            for i in range(1, order + 1):
                for j in range(1, order + 1):
                    out.append(f"layer M {s} {i} {j} {mesh[i - 1][j - 1]}")
    if b is not None:
        for j, elem in enumerate(b, start=1):
            out.append(f"layer B {j} {elem}")
    return out


def emit_core(core: Core) -> str:
    out = ["core 1", f"type {core.core_type}", f"length {core.length}"]
    out.append(emit_tows(core.base).rstrip("\n"))
    out.extend(_emit_layers(core.a, core.b, core.meshes, 2))
    return "\n".join(out) + "\n"


def emit_twist(t: LabeledTwist) -> str:
    out = [
        "twist 1",
        f"type {t.core_type}",
        f"length {t.length}",
        f"order {t.order}",
    ]
    out.append(emit_tows(t.structure).rstrip("\n"))
    out.extend(_emit_layers(t.a, t.b, t.meshes, t.order))
    return "\n".join(out) + "\n"


def emit_sequence(merges) -> str:
    out = ["seq 1"]
    out.extend(f"merge {u} {v}" for u, v in merges)
    return "\n".join(out) + "\n"


def to_json(obj, marks: MarkSet = None):
    if isinstance(obj, TreeOrderedStructure):
        return {
            "version": 1,
            "kind": "tows",
            "signature": [list(e) for e in obj.signature.entries],
            "universe": list(obj.universe),
            "root": obj.root,
            "parent": {
                v: obj.order.parent[v] for v in obj.universe if v != obj.root
            },
            "relations": {
                name: [list(t) for t in obj.tuples(name)]
                for name in obj.signature.symbols
            },
            "marks": {
                name: sorted(marks.get(name), key=obj.order.index)
                for name in (marks.names() if marks else [])
            },
        }
    if isinstance(obj, OrderedBipartite):
        return {
            "version": 1,
            "kind": "obgraph",
            "signature": [["E", 2, True]],
            "universe": list(obj.part_a) + list(obj.part_b),
            "root": None,
            "parent": {},
            "relations": {"E": [list(e) for e in obj.sorted_edges()]},
            "marks": {"A": list(obj.part_a), "B": list(obj.part_b)},
        }
    if isinstance(obj, Graph):
        return {
            "version": 1,
            "kind": "graph",
            "signature": [["E", 2, True]],
            "universe": list(obj.vertices),
            "root": None,
            "parent": {},
            "relations": {"E": [list(e) for e in obj.sorted_edges()]},
            "marks": {},
        }
    raise FormatError(f"no JSON mirror for {type(obj).__name__}")


def from_json(data):
    kind = data.get("kind")
    if kind == "tows":
        signature = Signature(tuple(tuple(e) for e in data["signature"]))
        order = TreeOrder(tuple(data["universe"]), data["root"], data["parent"])
        structure = TreeOrderedStructure(
            order,
            signature,
            {name: [tuple(t) for t in ts] for name, ts in data["relations"].items()},
        )
        marks = MarkSet({name: vals for name, vals in data.get("marks", {}).items()})
        marks.validate(structure)
        return structure, marks
    if kind == "graph":
        return Graph(
            tuple(data["universe"]),
            [tuple(e) for e in data["relations"].get("E", [])],
        )
    if kind == "obgraph":
        return OrderedBipartite(
            tuple(data["marks"]["A"]),
            tuple(data["marks"]["B"]),
            [tuple(e) for e in data["relations"].get("E", [])],
        )
    raise FormatError(f"unknown JSON kind {kind!r}")


def emit_json(obj, marks: MarkSet = None) -> str:
    return json.dumps(to_json(obj, marks), separators=(",", ":")) + "\n"


def emit_dot(obj, marks: MarkSet = None) -> str:
    """DOT export: bold arcs for covers, plain lines for E, box gadgets for
    higher-arity tuples."""
    lines = ["digraph tows {"]
    if isinstance(obj, TreeOrderedStructure):
        for v in obj.universe:
            lines.append(f'  "{v}";')
        for v in obj.universe:
            if v != obj.root:
                lines.append(f'  "{obj.order.parent[v]}" -> "{v}" [style=bold];')
        for name, arity, symmetric in obj.signature.entries:
            for i, t in enumerate(obj.tuples(name)):
                if symmetric:
                    lines.append(
                        f'  "{t[0]}" -> "{t[1]}" [dir=none, color=blue];'
                    )
                else:
                    gadget = f"{name}:{i}"
                    lines.append(f'  "{gadget}" [shape=box, label="{name}"];')
                    for pos, e in enumerate(t, start=1):
                        lines.append(
                            f'  "{gadget}" -> "{e}" [dir=none, label="{pos}"];'
                        )
    elif isinstance(obj, Graph):
        for v in obj.vertices:
            lines.append(f'  "{v}";')
        for u, v in obj.sorted_edges():
            lines.append(f'  "{u}" -> "{v}" [dir=none];')
    else:
        raise FormatError(f"no DOT export for {type(obj).__name__}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit(obj, marks: MarkSet = None) -> str:
    """Emit an object in its natural text format."""
    if isinstance(obj, TreeOrderedStructure):
        return emit_tows(obj, marks)
    if isinstance(obj, OrderedBipartite):
        return emit_obgraph(obj)
    if isinstance(obj, Graph):
        return emit_graph(obj)
    if isinstance(obj, FundamentalGraph):
        return emit_fund(obj)
    if isinstance(obj, Core):
        return emit_core(obj)
    if isinstance(obj, LabeledTwist):
        return emit_twist(obj)
    raise FormatError(f"cannot emit {type(obj).__name__}")
