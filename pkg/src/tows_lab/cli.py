"""tows-lab command line front end.

Exit codes: 0 success / property true, 1 property false or validation
failure, 2 usage error, 3 size bound exceeded.  The argument '-' means
standard input.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources

from . import derive, formats, matroid, minors, racks, sparsity, twists
from .core import MarkSet, Signature, TreeOrderedStructure
from .errors import FormatError, SizeBoundExceeded, TowsError
from .graphs import BipartiteGraph, Graph, OrderedBipartite

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_BOUND = 3


def _read(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except FileNotFoundError:
        # shipped core shorthand (core_t1, core_t2, core_t3)
        name = path if path.endswith(".core") else path + ".core"
        try:
            return resources.files("tows_lab.cores").joinpath(name).read_text()
        except FileNotFoundError:
            raise FormatError(f"no such file: {path}") from None


def _load(path):
    return formats.parse(_read(path))


def _load_structure(path):
    obj = _load(path)
    if isinstance(obj, tuple) and isinstance(obj[0], TreeOrderedStructure):
        return obj
    if isinstance(obj, twists.LabeledTwist):
        return obj.structure, MarkSet()
    raise FormatError("expected a tows block")


def _load_graph(path):
    obj = _load(path)
    if isinstance(obj, Graph):
        return obj
    if isinstance(obj, OrderedBipartite):
        return obj.as_graph()
    if isinstance(obj, tuple) and isinstance(obj[0], TreeOrderedStructure):
        st = obj[0]
        if st.is_graph():
            return Graph(st.universe, st.relations["E"])
    raise FormatError("expected a graph block")


def _load_bipartite(path):
    obj = _load(path)
    if isinstance(obj, OrderedBipartite):
        return obj
    if isinstance(obj, Graph):
        # two-color the graph; usable when it is bipartite and connected-ish
        raise FormatError("groundings and racks need obgraph input or part marks")
    raise FormatError("expected an obgraph block")


def _emit(obj, marks=None, fmt="native"):
    if fmt in (None, "native"):
        return formats.emit(obj, marks) if marks is not None else formats.emit(obj)
    if fmt == "tows":
        return formats.emit_tows(obj, marks)
    if fmt == "graph":
        if isinstance(obj, TreeOrderedStructure):
            obj = Graph(obj.universe, obj.relations.get("E", ()))
        return formats.emit_graph(obj)
    if fmt == "json":
        return formats.emit_json(obj, marks)
    if fmt == "dot":
        return formats.emit_dot(obj, marks)
    raise FormatError(f"unknown format {fmt!r}")


def _print(text):
    sys.stdout.write(text)


def _build_parser():
    ap = argparse.ArgumentParser(prog="tows-lab", description=__doc__)
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized commands")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a file")
    p.add_argument("file")

    for name in ("tgaif", "tinc"):
        p = sub.add_parser(name)
        p.add_argument("file")
        p.add_argument("--format", default="native")
        if name == "tinc":
            p.add_argument("--twice", action="store_true")
            p.add_argument("--mark", action="store_true")

    p = sub.add_parser("decode")
    p.add_argument("file")
    p.add_argument("--signature", default=None, help="target signature, e.g. E/2s,R/3")
    p.add_argument("--format", default="native")

    p = sub.add_parser("starify")
    p.add_argument("file")
    p.add_argument("--marks", default="A", help="mark name holding the part minima")
    p.add_argument("--format", default="native")

    p = sub.add_parser("lambda")
    p.add_argument("file")
    p.add_argument("--general", action="store_true")
    p.add_argument("--format", default="native")

    p = sub.add_parser("shrink")
    p.add_argument("file")
    p.add_argument("--format", default="native")

    p = sub.add_parser("sp")
    p.add_argument("file")
    p.add_argument("--all", action="store_true")
    p.add_argument("--format", default="native")

    p = sub.add_parser("minors")
    p.add_argument("file")
    p.add_argument("--induced-only", action="store_true")
    p.add_argument("--format", default="native")

    p = sub.add_parser("poset-check")
    p.add_argument("file")

    p = sub.add_parser("twist")
    p.add_argument("core_file")
    p.add_argument("n", type=int)
    p.add_argument("--format", default="native")

    p = sub.add_parser("core-of")
    p.add_argument("file")

    p = sub.add_parser("validate-twister")
    p.add_argument("file")
    p.add_argument("--labels", default=None, help="file with layer lines")

    p = sub.add_parser("find-twist")
    p.add_argument("file")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--max-len", type=int, default=3)

    p = sub.add_parser("grounding")
    p.add_argument("graph")
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--nr", default="", help="comma separated layer indices")

    p = sub.add_parser("rack")
    p.add_argument("obgraph")
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--nr", default="")
    p.add_argument("--ca", default="")
    p.add_argument("--cb", default="")

    p = sub.add_parser("host")
    p.add_argument("core_file")
    p.add_argument("graph")
    p.add_argument("--emit-marks", action="store_true")

    p = sub.add_parser("verify-pipeline")
    p.add_argument("core_file")
    p.add_argument("graph")

    p = sub.add_parser("check")
    csub = p.add_subparsers(dest="check_kind", required=True)
    c = csub.add_parser("biclique")
    c.add_argument("file")
    c.add_argument("--t", type=int, default=None)
    c = csub.add_parser("subdivision")
    c.add_argument("file")
    c.add_argument("--t", type=int, required=True)
    c.add_argument("--n", type=int, required=True)
    c = csub.add_parser("minor")
    c.add_argument("h_file")
    c.add_argument("g_file")

    p = sub.add_parser("tww")
    p.add_argument("file")
    p.add_argument("--sequence", default=None)

    p = sub.add_parser("selftest")
    p.add_argument("--criteria", default=None, help="comma separated criterion numbers")

    p = sub.add_parser("convert")
    p.add_argument("file")
    p.add_argument("--format", required=True)
    return ap


def _parse_intset(text):
    return frozenset(int(tok) for tok in text.split(",") if tok.strip() != "")


def _cmd(args):
    if args.command == "validate":
        _load(args.file)
        _print("ok\n")
        return EXIT_OK

    if args.command == "tgaif":
        st, marks = _load_structure(args.file)
        _print(_emit(derive.tgaif(st), None, args.format))
        return EXIT_OK

    if args.command == "tinc":
        st, marks = _load_structure(args.file)
        if args.twice and args.mark:
            out, out_marks = derive.mark_tinc2(st)
            _print(_emit(out, out_marks, args.format))
        elif args.twice:
            _print(_emit(derive.tinc(derive.tinc(st)), None, args.format))
        else:
            _print(_emit(derive.tinc(st), None, args.format))
        return EXIT_OK

    if args.command == "decode":
        st, marks = _load_structure(args.file)
        signature = None
        if args.signature:
            signature = formats._parse_signature(args.signature.split(","))
        _print(_emit(derive.tinc_decode(st, marks, signature), None, args.format))
        return EXIT_OK

    if args.command == "starify":
        st, marks = _load_structure(args.file)
        _print(_emit(derive.starify(st, marks.get(args.marks)), None, args.format))
        return EXIT_OK

    if args.command == "lambda":
        st, _ = _load_structure(args.file)
        if args.general:
            out = matroid.lambda_general(st)
        else:
            out = matroid.lambda_graph(st)
        if args.format == "dot":
            _print(formats.emit_dot(out.as_graph()))
        else:
            _print(formats.emit_fund(out))
        return EXIT_OK

    if args.command == "shrink":
        st, marks = _load_structure(args.file)
        out = minors.shrink(st, marks.get("V"), marks.get("D"))
        _print(_emit(out, None, args.format))
        return EXIT_OK

    if args.command == "sp":
        st, marks = _load_structure(args.file)
        if args.all:
            for g in minors.sp_all(st):
                _print(_emit(g, None, args.format))
        else:
            _print(_emit(minors.sp(st, marks.get("V"), marks.get("D")), None, args.format))
        return EXIT_OK

    if args.command == "minors":
        st, _ = _load_structure(args.file)
        outs = minors.enum_cont(st) if args.induced_only else minors.enum_minors(st)
        for out in outs:
            _print(_emit(out, None, args.format))
        return EXIT_OK

    if args.command == "poset-check":
        st, _ = _load_structure(args.file)
        ok = minors.minor_poset_check(st)
        _print(("true" if ok else "false") + "\n")
        return EXIT_OK if ok else EXIT_FALSE

    if args.command == "twist":
        core = formats.parse_core(_read(args.core_file))
        out = twists.build_twist(core, args.n)
        if args.format in ("native", None):
            _print(formats.emit_twist(out))
        else:
            _print(_emit(out.structure, None, args.format))
        return EXIT_OK

    if args.command == "core-of":
        t = formats.parse_twist(_read(args.file))
        _print(formats.emit_core(twists.core_of(t)))
        return EXIT_OK

    if args.command == "validate-twister":
        text = _read(args.file)
        if args.labels:
            st, _ = _load_structure(args.file)
            labeled = formats.parse_twist(_read(args.labels))
            seq = labeled.sequence()
        else:
            labeled = formats.parse_twist(text)
            st = labeled.structure
            seq = labeled.sequence()
        report = twists.validate_twister(st, seq)
        for line in report.lines():
            _print(line + "\n")
        if report.passed:
            clean = twists.validate_clean(st, seq)
            _print(f"preclean-type: {clean.preclean_type}\n")
            _print(f"clean: {'true' if clean.clean else 'false'}\n")
            for reason in clean.reasons:
                _print(f"reason: {reason}\n")
            return EXIT_OK if clean.clean else EXIT_FALSE
        return EXIT_FALSE

    if args.command == "find-twist":
        st, _ = _load_structure(args.file)
        found = twists.find_twist(st, args.max_len, args.order)
        if found is None:
            _print("none\n")
            return EXIT_FALSE
        for s, mesh in enumerate(found.meshes, start=1):
            for (i, j), elem in mesh.cells:
                _print(f"layer M {s} {i} {j} {elem}\n")
        if found.a is not None:
            for i, elem in zip(found.rows, found.a):
                _print(f"layer A {i} {elem}\n")
        if found.b is not None:
            for j, elem in zip(found.cols, found.b):
                _print(f"layer B {j} {elem}\n")
        return EXIT_OK

    if args.command == "grounding":
        obj = _load(args.graph)
        if isinstance(obj, Graph):
            raise FormatError("grounding needs an obgraph (bipartite with parts)")
        spec = racks.GroundingSpec(args.h, _parse_intset(args.nr))
        _print(formats.emit_tows(racks.grounding(obj, spec)))
        return EXIT_OK

    if args.command == "rack":
        g = _load_bipartite(args.obgraph)
        spec = racks.RackSpec(
            args.h, _parse_intset(args.nr), _parse_intset(args.ca), _parse_intset(args.cb)
        )
        _print(formats.emit_tows(racks.rack(g, spec)))
        return EXIT_OK

    if args.command == "host":
        core = formats.parse_core(_read(args.core_file))
        g = _load(args.graph)
        st, marks = racks.host(core, g)
        _print(formats.emit_tows(st, marks if args.emit_marks else None))
        return EXIT_OK

    if args.command == "verify-pipeline":
        core = formats.parse_core(_read(args.core_file))
        g = _load(args.graph)
        spec = racks.implied_params(core)
        _print(f"implied: {spec}\n")
        ok = racks.verify_pipeline(core, g)
        _print(("true" if ok else "false") + "\n")
        return EXIT_OK if ok else EXIT_FALSE

    if args.command == "check":
        if args.check_kind == "biclique":
            g = _load_graph(args.file)
            value = sparsity.biclique_number(g)
            _print(f"{value}\n")
            if args.t is not None:
                return EXIT_OK if value >= args.t else EXIT_FALSE
            return EXIT_OK
        if args.check_kind == "subdivision":
            g = _load_graph(args.file)
            ok = sparsity.induced_clique_subdivision(g, args.t, args.n)
            _print(("true" if ok else "false") + "\n")
            return EXIT_OK if ok else EXIT_FALSE
        if args.check_kind == "minor":
            h = _load_graph(args.h_file)
            g = _load_graph(args.g_file)
            ok = sparsity.is_minor(h, g)
            _print(("true" if ok else "false") + "\n")
            return EXIT_OK if ok else EXIT_FALSE

    if args.command == "tww":
        g = _load_graph(args.file)
        if args.sequence:
            merges = formats.parse_sequence(_read(args.sequence))
            _print(f"{sparsity.red_width(g, merges)}\n")
        else:
            _print(f"{sparsity.tww_exact(g)}\n")
        return EXIT_OK

    if args.command == "selftest":
        from .selftest import run_selftest

        wanted = None
        if args.criteria:
            wanted = {int(tok) for tok in args.criteria.split(",")}
        ok = run_selftest(seed=args.seed, criteria=wanted, out=sys.stdout)
        return EXIT_OK if ok else EXIT_FALSE

    if args.command == "convert":
        obj = _load(args.file)
        marks = None
        if isinstance(obj, tuple):
            obj, marks = obj
        _print(_emit(obj, marks, args.format))
        return EXIT_OK

    raise FormatError(f"unknown command {args.command!r}")


def dispatch(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else EXIT_OK
    try:
        return _cmd(args)
    except SizeBoundExceeded as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BOUND
    except TowsError as err:
        # malformed input or failed validation
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FALSE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
