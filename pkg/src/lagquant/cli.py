"""Command line entry point ``wq``.

Subcommands::

    wq weyl mul|bracket A B        normal-ordered product or commutator
    wq weyl sigma MATRIX           quadratic element of a symplectic matrix
    wq weyl degree A               filtration degree
    wq module lift DATA.json       lift a candidate action to a generator
    wq star assoc STAR.json        associativity defect on low monomials
    wq star beta1 SRC DST MAP      solve for the first-order transition field
    wq cech c1 ATLAS BUNDLE        reduced first Chern class
    wq cech obstruction SCENARIO   reduced obstruction class along Y
    wq cech restrict SCENARIO      reduced restrictions of period coefficients
    wq check SCENARIO              quantizability verdict

Scenario arguments accept a JSON path or the name of a bundled scenario.
Exit codes: 0 success or quantizable, 1 computation failure, 2 invalid
input, 3 not integrable or not quantizable, 4 inconclusive.
"""

import argparse
import json
import os
import sys
from itertools import combinations_with_replacement

from . import quantcheck
from .cechdr import Atlas, LineBundle, Overlap, chern_class, class_reduce, lagrangian_embeddings
from .cechdr import obstruction_class, restrict_2form_class
from .coeffring import ScalarSeries, parse_series
from .errors import InvalidScenario, LagQuantError, NotIntegrable, ParseError
from .lagmodule import ModuleData, lift_module, module_element
from .starprod import OVERLAP_CAP, StarProduct, assoc_defect, solve_beta1
from .weyl import SpMatrix, filtration_degree, infer_rank, parse_weyl, sigma_embed, weyl_bracket, weyl_mul


class InputError(Exception):
    pass


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=False))


def _scenario(arg, order=None):
    if arg in quantcheck.BUNDLED and not os.path.exists(arg):
        return quantcheck.load_bundled(arg, order)
    return quantcheck.load_scenario(_read_json(arg), order)


# ---------------------------------------------------------------------------
# weyl


def cmd_weyl(args):
    if args.op in ("mul", "bracket"):
        if len(args.operands) != 2:
            raise InputError(f"weyl {args.op} takes two literals")
        n = args.n or max(infer_rank(t) for t in args.operands)
        u, v = (parse_weyl(t, n) for t in args.operands)
        out = weyl_mul(u, v) if args.op == "mul" else weyl_bracket(u, v)
        print(out)
    elif args.op == "sigma":
        if len(args.operands) != 1:
            raise InputError("weyl sigma takes one matrix, e.g. '[[1,0],[0,-1]]'")
        try:
            entries = json.loads(args.operands[0])
        except json.JSONDecodeError as exc:
            raise InputError(f"matrix is not valid JSON: {exc}") from None
        print(sigma_embed(SpMatrix(entries)))
    elif args.op == "degree":
        if len(args.operands) != 1:
            raise InputError("weyl degree takes one literal")
        print(filtration_degree(parse_weyl(args.operands[0], args.n)))
    return 0


# ---------------------------------------------------------------------------
# module


def cmd_module(args):
    data = _read_json(args.data)
    try:
        n = int(data["n"])
        fs = tuple(module_element(str(f), n, x_degree_cap=int(data.get("x_degree_cap", 6)),
                                  hbar_order=int(data.get("hbar_order", 4))) for f in data["f"])
        module_data = ModuleData(n, fs)
    except (KeyError, TypeError) as exc:
        raise InputError(f"module data needs 'n' and a list 'f': {exc}") from None
    try:
        result = lift_module(module_data)
    except NotIntegrable as exc:
        _emit({"integrable": False, "error": str(exc)})
        return 3
    _emit({"integrable": True, **result.to_json()})
    return 0


# ---------------------------------------------------------------------------
# star


def _monomials(variables, max_degree):
    out = []
    for d in range(max_degree + 1):
        for combo in combinations_with_replacement(range(len(variables)), d):
            exps = [0] * len(variables)
            for i in combo:
                exps[i] += 1
            out.append(ScalarSeries(variables, {(tuple(exps), 0): 1}, x_degree_cap=OVERLAP_CAP,
                                    hbar_order=10))
    return out


def cmd_star(args):
    if args.op == "assoc":
        if len(args.files) != 1:
            raise InputError("star assoc takes one star-product file")
        star = StarProduct.from_json(_read_json(args.files[0]))
        monos = _monomials(star.variables, args.degree)
        failures = []
        checked = 0
        for f in monos:
            for g in monos:
                for h in monos:
                    checked += 1
                    defect = assoc_defect(star, f, g, h)
                    if not defect.is_zero():
                        failures.append({"f": str(f), "g": str(g), "h": str(h), "defect": str(defect)})
        _emit({"chart": star.chart.name, "order": star.order, "triples_checked": checked,
               "associative": not failures, "failures": failures[:20]})
        return 0 if not failures else 1
    if len(args.files) != 3:
        raise InputError("star beta1 takes SRC DST MAP files")
    src = StarProduct.from_json(_read_json(args.files[0]))
    dst_data = _read_json(args.files[1])
    mp = _read_json(args.files[2])
    inv = frozenset(mp.get("invertible", ()))
    dst = StarProduct.from_json(dst_data)
    dst = StarProduct(dst.chart.with_invertible(inv | dst.chart.invertible), dst.alphas, dst.order)
    try:
        coord_map = {v: parse_series(str(mp["map"][v]), dst.chart.coordinates, invertible=dst.chart.invertible,
                                     x_degree_cap=OVERLAP_CAP) for v in src.chart.coordinates}
    except KeyError as exc:
        raise InputError(f"map file must express every source coordinate: missing {exc}") from None
    sol = solve_beta1(src, dst, coord_map, degree=args.degree)
    _emit(sol.to_json())
    return 0


# ---------------------------------------------------------------------------
# cech


def _atlas(data):
    try:
        charts = {c["name"]: tuple(c["coordinates"]) for c in data["charts"]}
        overlaps = []
        for ov in data.get("overlaps", []):
            inv = frozenset(ov.get("invertible", ()))
            m = {v: parse_series(str(ov["map"][v]), charts[ov["from"]], invertible=inv, x_degree_cap=OVERLAP_CAP)
                 for v in charts[ov["to"]]}
            overlaps.append(Overlap(ov["from"], ov["to"], m, inv))
    except (KeyError, TypeError) as exc:
        raise InputError(f"atlas needs charts with name/coordinates and overlaps from/to/map: {exc}") from None
    atlas = Atlas(charts, overlaps)
    atlas.check_cocycle()
    return atlas


def cmd_cech(args):
    if args.op == "c1":
        if len(args.files) != 2:
            raise InputError("cech c1 takes ATLAS BUNDLE files")
        atlas = _atlas(_read_json(args.files[0]))
        bundle = _read_json(args.files[1])
        transitions = {}
        for key, text in bundle.items():
            src, dst = quantcheck._pair(key)
            ov = atlas.overlap(src, dst)
            if ov is None:
                raise InputError(f"bundle names the missing overlap {key}")
            transitions[(src, dst)] = parse_series(str(text), atlas.coordinates[src], invertible=ov.invertible,
                                                   x_degree_cap=OVERLAP_CAP)
        reduced = class_reduce(atlas, chern_class(atlas, LineBundle(transitions)))
        _emit({"c1": reduced.to_json(), "total": str(reduced.total())})
        return 0
    if len(args.files) != 1:
        raise InputError(f"cech {args.op} takes one scenario")
    scenario = _scenario(args.files[0])
    if args.op == "obstruction":
        fields, reports = quantcheck.resolve_transitions(scenario)
        yat, at = obstruction_class(scenario.ambient, scenario.stars, fields, scenario.lagrangian, scenario.omega)
        _emit({"At": class_reduce(yat, at).to_json(), "transitions": reports})
        return 0
    embeddings = lagrangian_embeddings(scenario.ambient, scenario.lagrangian)
    out = []
    for period in scenario.periods:
        yat, cls = restrict_2form_class(scenario.ambient, period["forms"], embeddings, period["primitives"])
        out.append({"index": period["index"], "restriction": class_reduce(yat, cls, derham=True).to_json()})
    yat, cls = restrict_2form_class(scenario.ambient, scenario.omega, embeddings)
    _emit({"omega": class_reduce(yat, cls, derham=True).to_json(), "periods": out})
    return 0


# ---------------------------------------------------------------------------
# check


def cmd_check(args):
    verdict = quantcheck.run_scenario(_scenario(args.scenario, args.order))
    if args.text:
        print(verdict.to_text())
    else:
        _emit(verdict.to_json())
    return verdict.exit_code


def build_parser():
    parser = argparse.ArgumentParser(prog="wq", description="Quantization checks for Lagrangian subvarieties.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weyl", help="Weyl algebra arithmetic")
    p.add_argument("op", choices=("mul", "bracket", "sigma", "degree"))
    p.add_argument("operands", nargs="+")
    p.add_argument("-n", type=int, default=None, help="number of variable pairs (inferred by default)")
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("module", help="Lagrangian module lifting")
    p.add_argument("op", choices=("lift",))
    p.add_argument("data")
    p.set_defaults(func=cmd_module)

    p = sub.add_parser("star", help="star products and transitions")
    p.add_argument("op", choices=("assoc", "beta1"))
    p.add_argument("files", nargs="+")
    p.add_argument("--degree", type=int, default=None)
    p.set_defaults(func=cmd_star)

    p = sub.add_parser("cech", help="Cech-de Rham classes")
    p.add_argument("op", choices=("c1", "obstruction", "restrict"))
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_cech)

    p = sub.add_parser("check", help="quantizability verdict for a scenario")
    p.add_argument("scenario", help="scenario JSON path or bundled name (" + ", ".join(quantcheck.BUNDLED) + ")")
    p.add_argument("--order", type=int, default=None)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="text", action="store_false", help="JSON verdict (default)")
    fmt.add_argument("--text", dest="text", action="store_true", help="human readable verdict")
    p.set_defaults(func=cmd_check, text=False)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "degree", "unset") is None:
        args.degree = 2 if args.op == "assoc" else 3
    try:
        return args.func(args)
    except InvalidScenario as exc:
        print(f"wq: {exc}", file=sys.stderr)
        for path, msg in sorted(exc.diagnostics.items()):
            print(f"  {path}: {msg}", file=sys.stderr)
        return 2
    except (InputError, ParseError) as exc:
        print(f"wq: {exc}", file=sys.stderr)
        return 2
    except LagQuantError as exc:
        print(f"wq: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
