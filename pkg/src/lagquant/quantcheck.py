"""Scenario files and quantizability verdicts at finite order.

A scenario describes a symplectic surface or 4-fold by Darboux charts, a
Lagrangian subvariety Y by ideal generators, local star products,
first-order transition data, a line bundle on Y and optional period
coefficients.  :func:`run_scenario` evaluates

* whether Y is Lagrangian,
* the class c1(L) - 1/2 c1(K_Y) - At, reduced to canonical coordinates,
* the restriction to Y of every supplied period coefficient,

and combines them into a :class:`Verdict`.
"""

import copy
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .cechdr import (
    AmbientAtlas,
    LineBundle,
    Overlap,
    canonical_bundle,
    chern_class,
    class_reduce,
    lagrangian_embeddings,
    obstruction_class,
    restrict_2form_class,
    restrict_form,
    y_atlas,
)
from .coeffring import DifferentialForm, parse_series
from .errors import InvalidScenario, LagQuantError, MissingData
from .starprod import (
    OVERLAP_CAP,
    Chart,
    StarProduct,
    TransitionMap,
    _test_functions,
    order2_antisymmetric_residual,
    solve_beta1,
)

BUNDLED = ("tA1_trivial", "tP1_Ominus1", "tP1_O0", "tP1_O0_flux")


def _pair(key):
    if "|" not in key:
        raise ValueError(f"overlap key {key!r} must look like 'U0|U1'")
    a, b = key.split("|", 1)
    return a.strip(), b.strip()


@dataclass
class Scenario:
    name: str
    order: int
    ambient: AmbientAtlas
    lagrangian: dict
    omega: dict
    stars: dict
    transitions: dict  # (src, dst) -> {"beta1": "solve" | field dict, "beta2": ...}
    line_bundle: LineBundle
    periods: list = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    def relabel(self, names):
        """The same scenario with charts renamed (old name -> new name)."""
        data = copy.deepcopy(self.raw)
        for ch in data["ambient"]["charts"]:
            ch["name"] = names.get(ch["name"], ch["name"])
        for ov in data["ambient"]["overlaps"]:
            ov["from"] = names.get(ov["from"], ov["from"])
            ov["to"] = names.get(ov["to"], ov["to"])

        def rekey(d):
            out = {}
            for k, v in d.items():
                if "|" in k:
                    a, b = _pair(k)
                    out[f"{names.get(a, a)}|{names.get(b, b)}"] = v
                else:
                    out[names.get(k, k)] = v
            return out

        for key in ("lagrangian", "symplectic_form", "star_products", "transitions", "line_bundle"):
            if key in data:
                data[key] = rekey(data[key])
        for period in data.get("periods", []):
            period["forms"] = rekey(period.get("forms", {}))
            if "primitives" in period:
                period["primitives"] = rekey(period["primitives"])
        return load_scenario(data)


def load_scenario(data, order=None):
    """Validate a scenario dict; raises InvalidScenario with field diagnostics."""
    diag = {}
    if not isinstance(data, dict):
        raise InvalidScenario("scenario must be a JSON object", {"$": "not an object"})
    for key in ("ambient", "lagrangian", "star_products", "line_bundle"):
        if key not in data:
            diag[key] = "missing"
    if diag:
        raise InvalidScenario("scenario is missing required fields", diag)
    name = str(data.get("name", "scenario"))
    s_order = int(order if order is not None else data.get("order", 1))
    if s_order < 1:
        raise InvalidScenario("order must be >= 1", {"order": "must be >= 1"})

    charts = {}
    try:
        for i, ch in enumerate(data["ambient"]["charts"]):
            charts[ch["name"]] = Chart(ch["name"], ch["base"], ch["fiber"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidScenario("bad chart description", {"ambient.charts": str(exc)}) from None
    overlaps = []
    for i, ov in enumerate(data["ambient"].get("overlaps", [])):
        path = f"ambient.overlaps[{i}]"
        try:
            src, dst = ov["from"], ov["to"]
            inv = frozenset(ov.get("invertible", ()))
            coords = charts[src].coordinates
            m = {v: parse_series(str(ov["map"][v]), coords, invertible=inv, x_degree_cap=OVERLAP_CAP)
                 for v in charts[dst].coordinates}
            overlaps.append(Overlap(src, dst, m, inv))
        except (KeyError, LagQuantError, ValueError) as exc:
            diag[path] = f"{type(exc).__name__}: {exc}"
    if diag:
        raise InvalidScenario("bad overlap description", diag)
    try:
        ambient = AmbientAtlas(charts, overlaps)
        ambient.atlas.check_cocycle()
    except (LagQuantError, ValueError) as exc:
        raise InvalidScenario("bad atlas", {"ambient": str(exc)}) from None

    def parse_on(chart_name, text, path, inv=()):
        try:
            return parse_series(str(text), charts[chart_name].coordinates, invertible=inv, x_degree_cap=OVERLAP_CAP)
        except (KeyError, LagQuantError, ValueError) as exc:
            diag[path] = f"{type(exc).__name__}: {exc}"
            return None

    lagrangian = {}
    for cname, gens in data["lagrangian"].items():
        if cname not in charts:
            diag[f"lagrangian.{cname}"] = "unknown chart"
            continue
        lagrangian[cname] = [parse_on(cname, g, f"lagrangian.{cname}[{i}]") for i, g in enumerate(gens)]
    for cname in charts:
        if cname not in lagrangian:
            diag[f"lagrangian.{cname}"] = "missing generators"

    omega = {}
    for cname, chart in charts.items():
        spec = data.get("symplectic_form", {}).get(cname)
        if spec is None:
            omega[cname] = chart.omega()
            continue
        try:
            omega[cname] = DifferentialForm.parse(chart.coordinates, 2, spec, x_degree_cap=OVERLAP_CAP)
        except (LagQuantError, ValueError) as exc:
            diag[f"symplectic_form.{cname}"] = str(exc)
            continue
        if not (omega[cname] - chart.omega()).is_zero():
            diag[f"symplectic_form.{cname}"] = "must equal the Darboux form of the chart's base/fiber pairing"

    stars = {}
    for cname, chart in charts.items():
        spec = data["star_products"].get(cname)
        if spec is None:
            diag[f"star_products.{cname}"] = "missing"
            continue
        try:
            stars[cname] = StarProduct.from_json(spec, chart=chart)
        except (LagQuantError, ValueError, KeyError) as exc:
            diag[f"star_products.{cname}"] = f"{type(exc).__name__}: {exc}"

    transitions = {}
    for key, spec in data.get("transitions", {}).items():
        try:
            pair = _pair(key)
        except ValueError as exc:
            diag[f"transitions.{key}"] = str(exc)
            continue
        ov = ambient.atlas.overlap(*pair)
        if ov is None:
            diag[f"transitions.{key}"] = "no such directed overlap"
            continue
        entry = {"beta1": "solve", "beta2": spec.get("beta2")}
        b1 = spec.get("beta1", "solve")
        if b1 != "solve":
            entry["beta1"] = {v: parse_on(pair[0], txt, f"transitions.{key}.beta1.{v}", ov.invertible)
                              for v, txt in b1.items()}
        transitions[pair] = entry

    lb = {}
    embeddings = None
    if not diag:
        try:
            embeddings = lagrangian_embeddings(ambient, lagrangian)
            yat = y_atlas(ambient, embeddings)
        except LagQuantError as exc:
            diag["lagrangian"] = f"{type(exc).__name__}: {exc}"
    if not diag:
        for key, text in data["line_bundle"].items():
            try:
                pair = _pair(key)
                ov = yat.overlap(*pair)
                if ov is None:
                    raise ValueError("no such directed overlap")
                lb[pair] = parse_series(str(text), yat.coordinates[pair[0]], invertible=ov.invertible,
                                        x_degree_cap=OVERLAP_CAP)
            except (LagQuantError, ValueError) as exc:
                diag[f"line_bundle.{key}"] = f"{type(exc).__name__}: {exc}"

    periods = []
    for i, period in enumerate(data.get("periods", [])):
        path = f"periods[{i}]"
        try:
            index = int(period["index"])
            if index < 2:
                raise ValueError("period indices start at 2; the first coefficient enters through At")
            forms = {}
            for cname, spec in period.get("forms", {}).items():
                forms[cname] = DifferentialForm.parse(charts[cname].coordinates, 2, spec, x_degree_cap=OVERLAP_CAP)
            prims = {}
            for key, spec in period.get("primitives", {}).items():
                pair = _pair(key)
                ov = ambient.atlas.overlap(*pair)
                prims[pair] = DifferentialForm.parse(charts[pair[0]].coordinates, 1, spec,
                                                     invertible=ov.invertible, x_degree_cap=OVERLAP_CAP)
            periods.append({"index": index, "forms": forms, "primitives": prims})
        except (KeyError, LagQuantError, ValueError) as exc:
            diag[path] = f"{type(exc).__name__}: {exc}"
    if diag:
        raise InvalidScenario(f"scenario {name!r} is invalid", diag)
    return Scenario(name, s_order, ambient, lagrangian, omega, stars, transitions, LineBundle(lb), periods,
                    raw=copy.deepcopy(data))


def bundled_path(name):
    return resources.files("lagquant").joinpath("scenarios").joinpath(f"{name}.json")


def load_bundled(name, order=None):
    if name not in BUNDLED:
        raise InvalidScenario(f"unknown bundled scenario {name!r}", {"name": f"choose one of {BUNDLED}"})
    return load_scenario(json.loads(bundled_path(name).read_text()), order)


def load_file(path, order=None):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidScenario(f"{path} is not valid JSON", {"$": str(exc)}) from None
    return load_scenario(data, order)


# ---------------------------------------------------------------------------
# checks


def check_lagrangian(scenario):
    """True iff Y is middle dimensional and omega restricts to zero on every chart."""
    if not scenario.lagrangian or not scenario.omega:
        raise MissingData("ideal generators and symplectic form are required")
    for name, chart in scenario.ambient.charts.items():
        gens = [g for g in scenario.lagrangian.get(name, []) if g is not None]
        if 2 * len(gens) != len(chart.coordinates):
            return False
    try:
        embeddings = lagrangian_embeddings(scenario.ambient, scenario.lagrangian)
    except LagQuantError:
        return False
    for name, emb in embeddings.items():
        if 2 * len(emb.y_coordinates) != len(scenario.ambient.charts[name].coordinates):
            return False
        if not restrict_form(emb, scenario.omega[name]).is_zero():
            return False
    return True


def resolve_transitions(scenario):
    """beta1 per overlap, solving where requested; returns fields and solve reports."""
    fields, reports = {}, {}
    for ov in scenario.ambient.overlaps:
        key = (ov.src, ov.dst)
        spec = scenario.transitions.get(key, {"beta1": "solve"})
        src = scenario.stars[ov.dst]
        dst_chart = scenario.ambient.charts[ov.src].with_invertible(ov.invertible)
        dst = StarProduct(dst_chart, scenario.stars[ov.src].alphas, scenario.stars[ov.src].order)
        if spec["beta1"] == "solve":
            sol = solve_beta1(src, dst, ov.map)
            fields[key] = sol.field
            reports[f"{ov.src}|{ov.dst}"] = {"mode": "solved", **sol.to_json()}
        else:
            beta = spec["beta1"]
            t = TransitionMap(src.chart, dst_chart, ov.map, beta)
            tests = _test_functions(src.chart, 2)
            ok = all(order2_antisymmetric_residual(src, dst, t, f, g).is_zero()
                     for i, f in enumerate(tests) for g in tests[i + 1:])
            if not ok:
                raise InvalidScenario("supplied beta1 does not intertwine the star products",
                                      {f"transitions.{ov.src}|{ov.dst}.beta1": "antisymmetric order-2 residual is nonzero"})
            fields[key] = beta
            reports[f"{ov.src}|{ov.dst}"] = {"mode": "supplied", "beta1": {v: str(c) for v, c in beta.items()},
                                            "order2_antisymmetric_residual_zero": ok}
    return fields, reports


def half_canonical_condition(scenario):
    """Reduced coordinates of c1(L) - 1/2 c1(K_Y) - At, with the parts."""
    embeddings = lagrangian_embeddings(scenario.ambient, scenario.lagrangian)
    yat = y_atlas(scenario.ambient, embeddings)
    fields, reports = resolve_transitions(scenario)
    _yat, at = obstruction_class(scenario.ambient, scenario.stars, fields, scenario.lagrangian, scenario.omega)
    c1_l = chern_class(yat, scenario.line_bundle)
    c1_k = chern_class(yat, canonical_bundle(yat))
    total = c1_l - c1_k.scale(Fraction(1, 2)) - at
    parts = {
        "c1_L": class_reduce(yat, c1_l),
        "c1_K": class_reduce(yat, c1_k),
        "At": class_reduce(yat, at),
    }
    return class_reduce(yat, total), parts, reports


@dataclass
class Verdict:
    name: str
    order: int
    lagrangian_ok: bool
    chern_condition: dict
    period_conditions: list
    quantizable_at_order: bool
    status: str
    report: dict

    @property
    def exit_code(self):
        return {"quantizable": 0, "not_quantizable": 3, "inconclusive": 4}[self.status]

    def to_json(self):
        return {
            "name": self.name,
            "order": self.order,
            "lagrangian_ok": self.lagrangian_ok,
            "chern_condition": self.chern_condition,
            "period_conditions": self.period_conditions,
            "quantizable_at_order": self.quantizable_at_order,
            "status": self.status,
            "report": self.report,
        }

    def to_text(self):
        lines = [f"scenario {self.name} at order {self.order}: {self.status}"]
        lines.append(f"  Lagrangian: {'yes' if self.lagrangian_ok else 'no'}")
        cc = self.chern_condition
        if cc is not None:
            coords = ", ".join(f"{k} = {v}" for k, v in cc.items()) or "0"
            lines.append(f"  c1(L) - 1/2 c1(K_Y) - At: {coords}")
            parts = self.report.get("classes", {})
            for label in ("c1_L", "c1_K", "At"):
                if label in parts:
                    val = ", ".join(f"{k} = {v}" for k, v in parts[label].items()) or "0"
                    lines.append(f"    {label}: {val}")
        for pc in self.period_conditions:
            coords = ", ".join(f"{k} = {v}" for k, v in pc["coordinates"].items()) or "0"
            lines.append(f"  restriction of period {pc['index']}: {coords}")
        for note in self.report.get("failed", []):
            lines.append(f"  failed: {note}")
        for note in self.report.get("unchecked", []):
            lines.append(f"  not checkable: {note}")
        return "\n".join(lines)


def run_scenario(scenario):
    """Evaluate every checkable condition and assemble the verdict."""
    report = {"checked": [], "failed": [], "unchecked": [], "notes": []}
    lag_ok = check_lagrangian(scenario)
    report["checked"].append("Y is Lagrangian")
    chern = None
    periods_out = []
    if not lag_ok:
        report["failed"].append("Y is not Lagrangian (omega does not vanish on Y or wrong dimension)")
    else:
        reduced, parts, reports = half_canonical_condition(scenario)
        chern = reduced.to_json()
        report["classes"] = {k: v.to_json() for k, v in parts.items()}
        report["transitions"] = reports
        report["checked"].append("Chern condition c1(L) - 1/2 c1(K_Y) = At")
        if not reduced.is_zero():
            report["failed"].append("Chern condition c1(L) - 1/2 c1(K_Y) = At does not hold")
        embeddings = lagrangian_embeddings(scenario.ambient, scenario.lagrangian)
        for period in sorted(scenario.periods, key=lambda p: p["index"]):
            yat, cls = restrict_2form_class(scenario.ambient, period["forms"], embeddings, period["primitives"])
            red = class_reduce(yat, cls, derham=True)
            periods_out.append({"index": period["index"], "coordinates": red.to_json(), "zero": red.is_zero()})
            report["checked"].append(f"restriction of period coefficient {period['index']} vanishes")
            if not red.is_zero():
                report["failed"].append(f"restriction of period coefficient {period['index']} is nonzero")
    supplied = {p["index"] for p in scenario.periods}
    for i in range(2, scenario.order + 2):
        if i not in supplied:
            report["unchecked"].append(f"period coefficient {i} was not supplied")
    report["notes"].append("the first period coefficient enters only through At")
    report["notes"].append("finite-order conditions are necessary checks; no existence of a quantized bundle is proved")
    report["notes"].append("obstructions from the finer filtration on the Weyl algebra beyond first order are not computed")
    ok = lag_ok and chern is not None and not chern and all(p["zero"] for p in periods_out)
    if not ok:
        status = "not_quantizable"
    elif report["unchecked"]:
        status = "inconclusive"
    else:
        status = "quantizable"
    return Verdict(scenario.name, scenario.order, lag_ok, chern, periods_out, ok, status, report)
