"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
All checks are exact rational arithmetic; randomness is seeded.
"""

import random
import sys
import time
from fractions import Fraction
from itertools import combinations_with_replacement

import pytest

from lagquant.cechdr import (
    AmbientAtlas,
    Atlas,
    LineBundle,
    Overlap,
    canonical_bundle,
    chern_class,
    class_reduce,
    obstruction_class,
)
from lagquant.coeffring import ScalarSeries, parse_series
from lagquant.errors import NotIntegrable
from lagquant.lagmodule import (
    act,
    lift_module,
    random_integrable_data,
    random_nonintegrable_data,
    random_parabolic,
    sigma_weight_report,
    unit,
    verify_error_identity,
)
from lagquant.quantcheck import load_bundled, run_scenario
from lagquant.starprod import Chart, add_fields, assoc_defect, is_hamiltonian, moyal, solve_beta1
from lagquant.weyl import WeylElement, random_sp, sigma_embed, weyl_bracket

CAP = 40
RESULTS = {}


def report(number, ok, detail, **counts):
    RESULTS[number] = {"ok": ok, "detail": detail, "counts": counts}
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    capman = _CAPTURE.get("manager")
    if capman is not None:
        with capman.global_and_fixture_disabled():
            print(line)
    else:
        print(line)
    sys.stdout.flush()
    return ok


_CAPTURE = {}


@pytest.fixture(autouse=True)
def _uncaptured(request):
    _CAPTURE["manager"] = request.config.pluginmanager.getplugin("capturemanager")
    yield
    _CAPTURE.pop("manager", None)


# ---------------------------------------------------------------------------
# helpers


def random_x_polynomial(rng, n, max_degree=5, n_terms=5):
    terms = {}
    for _ in range(n_terms):
        exps = [0] * n
        for _ in range(rng.randint(0, max_degree)):
            exps[rng.randrange(n)] += 1
        key = (tuple(exps), (0,) * n, rng.randint(0, 1))
        terms[key] = terms.get(key, 0) + Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return WeylElement(n, terms)


def random_weyl(rng, n, max_degree=3, n_terms=4):
    terms = {}
    for _ in range(n_terms):
        a, b = [0] * n, [0] * n
        for _ in range(rng.randint(0, max_degree)):
            (a if rng.random() < 0.5 else b)[rng.randrange(n)] += 1
        key = (tuple(a), tuple(b), rng.randint(0, 1))
        terms[key] = terms.get(key, 0) + Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return WeylElement(n, terms)


def x_derivative(f, i):
    out = {}
    for (a, b, k), c in f.terms.items():
        if a[i]:
            a2 = list(a)
            a2[i] -= 1
            out[(tuple(a2), b, k + 1)] = c * a[i]
    return WeylElement(f.n, out)


def random_module_element(rng, n):
    variables = tuple(f"x{i}" for i in range(1, n + 1))
    terms = {}
    for _ in range(4):
        exps = tuple(rng.randint(0, 3) for _ in range(n))
        terms[(exps, rng.randint(0, 2))] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return ScalarSeries(variables, terms, x_degree_cap=12, hbar_order=6)


def projective_line():
    s = parse_series("t^-1", ["t"], invertible=["t"], x_degree_cap=CAP)
    return Atlas({"U0": ("t",), "U1": ("s",)}, [Overlap("U0", "U1", {"s": s}, {"t"})])


def o_of(d):
    return LineBundle({("U0", "U1"): parse_series(f"t^{d}" if d else "1", ["t"], invertible=["t"], x_degree_cap=CAP)})


# ---------------------------------------------------------------------------
# criteria


def test_criterion_01_weyl_identities():
    rng = random.Random(101)
    n = 3
    ok = True
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            expected = WeylElement.hbar(n) if i == j else WeylElement.zero(n)
            ok &= weyl_bracket(WeylElement.y(n, j), WeylElement.x(n, i)) == expected
    comm = 0
    for _ in range(50):
        f = random_x_polynomial(rng, n)
        for i in range(1, n + 1):
            yi = WeylElement.y(n, i)
            ok &= (yi * f - f * yi) == x_derivative(f, i - 1)
        comm += 1
    assoc = 0
    for _ in range(100):
        u, v, w = (random_weyl(rng, 2) for _ in range(3))
        ok &= (u * v) * w == u * (v * w)
        assoc += 1
    assert report(1, ok, f"[y_j, x_i] = delta h for i, j <= 3; commutation on {comm} f; associativity on {assoc} triples",
                  commutation=comm, associativity=assoc)


def test_criterion_02_sigma_homomorphism():
    rng = random.Random(202)
    ok = True
    pairs = 0
    for _ in range(50):
        a, b = random_sp(rng, 2), random_sp(rng, 2)
        ok &= (sigma_embed(a.bracket(b)) - weyl_bracket(sigma_embed(a), sigma_embed(b))).drop_central().is_zero()
        for w in WeylElement.generators(2):
            ok &= weyl_bracket(sigma_embed(a), w) == a.apply(w)
        pairs += 1
    assert report(2, ok, f"sigma([a,b]) = [sigma a, sigma b] and [sigma a, w] = a(w) on {pairs} sp(4) pairs",
                  pairs=pairs)


def test_criterion_03_sigma_weight():
    rng = random.Random(303)
    ok = True
    mismatch_with_restricted = 0
    count = 0
    for _ in range(50):
        n = rng.randint(1, 3)
        a = random_parabolic(rng, n)
        rep = sigma_weight_report(a)
        acted = act(sigma_embed(a), unit(n))
        ok &= acted == unit(n).scale(rep.half_trace_g)
        ok &= rep.value == rep.half_trace_g
        ok &= rep.half_trace_restricted == -rep.half_trace_g
        mismatch_with_restricted += rep.value != rep.half_trace_restricted
        count += 1
    assert report(3, ok, f"act(sigma(a), 1) = 1/2 Tr(g) on {count} parabolic a; "
                         f"half-trace of a on span(y) reported alongside; it is -1/2 Tr(g) "
                         f"and differs from the action in {mismatch_with_restricted} cases",
                  samples=count)


def test_criterion_04_lift_module():
    rng = random.Random(404)
    ok = True
    lifted = refused = 0
    for _ in range(100):
        n = rng.randint(1, 3)
        data = random_integrable_data(rng, n, x_degree_cap=6, hbar_order=4)
        result = lift_module(data)
        ok &= all(data.y_action(j, result.m).is_zero() for j in range(1, n + 1))
        lifted += 1
    for _ in range(20):
        data = random_nonintegrable_data(rng, rng.randint(2, 3), x_degree_cap=6, hbar_order=4)
        try:
            lift_module(data)
            ok = False
        except NotIntegrable:
            refused += 1
    assert report(4, ok, f"{lifted} integrable data lifted with y_j(m) = 0; {refused}/20 non-integrable refused",
                  integrable=lifted, nonintegrable=20)


def test_criterion_05_error_identity():
    rng = random.Random(505)
    ok = True
    count = 0
    for _ in range(50):
        n = rng.randint(1, 3)
        ok &= verify_error_identity(random_parabolic(rng, n), random_module_element(rng, n))
        count += 1
    assert report(5, ok, f"sigma(a) v = theta_M(a) v + 1/2 Tr(g) v on {count} samples", samples=count)


def test_criterion_06_moyal_associativity():
    chart = Chart("U", ("q",), ("p",))
    star = moyal(4, chart)
    monos = []
    for d in range(5):
        for combo in combinations_with_replacement(range(2), d):
            e = [0, 0]
            for i in combo:
                e[i] += 1
            monos.append(ScalarSeries(chart.coordinates, {(tuple(e), 0): 1}, x_degree_cap=CAP, hbar_order=10))
    ok = True
    count = 0
    for f in monos:
        for g in monos:
            for h in monos:
                ok &= assoc_defect(star, f, g, h).is_zero()
                count += 1
    assert report(6, ok, f"Moyal associativity to h^4 on {count} triples of monomials of degree <= 4",
                  triples=count)


def test_criterion_07_chern_arithmetic():
    atlas = projective_line()
    values = {d: class_reduce(atlas, chern_class(atlas, o_of(d))).total() for d in range(-3, 4)}
    k = class_reduce(atlas, chern_class(atlas, canonical_bundle(atlas))).total()
    ok = all(v == d for d, v in values.items()) and k == -2
    assert report(7, ok, f"c1(O(d)) = {[str(values[d]) for d in range(-3, 4)]} for d = -3..3; c1(K) = {k}",
                  degrees=len(values))


def _single_chart(n):
    base = tuple(f"q{i}" for i in range(1, n + 1))
    fiber = tuple(f"p{i}" for i in range(1, n + 1))
    chart = Chart("U", base, fiber)
    amb = AmbientAtlas({"U": chart}, [])
    lag = {"U": [chart.series(p) for p in fiber]}
    yat, cls = obstruction_class(amb, {"U": moyal(2, chart)}, {}, lag, {"U": chart.omega()})
    return class_reduce(yat, cls)


def test_criterion_08_single_chart_obstruction():
    reduced = {n: _single_chart(n) for n in (1, 2)}
    ok = all(r.is_zero() for r in reduced.values())
    assert report(8, ok, "At = 0 for Moyal on the cotangent bundles of A^1 and A^2 along the zero section",
                  dimensions=len(reduced))


def _cotangent_p1(names=("U0", "U1")):
    a, b = names
    u0, u1 = Chart(a, ("t",), ("p",)), Chart(b, ("s",), ("q",))
    m = {"s": parse_series("t^-1", ("t", "p"), invertible=["t"], x_degree_cap=CAP),
         "q": parse_series("-t^2 p", ("t", "p"), invertible=["t"], x_degree_cap=CAP)}
    amb = AmbientAtlas({a: u0, b: u1}, [Overlap(a, b, m, {"t"})])
    lag = {a: [u0.series("p")], b: [u1.series("q")]}
    omega = {a: u0.omega(), b: u1.omega()}
    stars = {a: moyal(2, u0), b: moyal(2, u1)}
    return amb, lag, omega, stars


def test_criterion_09_projective_line_obstruction():
    amb, lag, omega, stars = _cotangent_p1()
    u0 = amb.charts["U0"].with_invertible({"t"})
    sol = solve_beta1(stars["U1"], moyal(2, u0), amb.overlaps[0].map)

    def reduced(amb_, lag_, omega_, stars_, key, beta):
        yat, cls = obstruction_class(amb_, stars_, {key: beta}, lag_, omega_)
        return class_reduce(yat, cls)

    base = reduced(amb, lag, omega, stars, ("U0", "U1"), sol.field)
    gauges = [k for k in sol.kernel if is_hamiltonian(u0, k)]
    rng = random.Random(909)
    mixes = []
    for _ in range(5):
        combo = {}
        for k in rng.sample(gauges, 3):
            combo = add_fields(combo, {v: c.scale(rng.randint(-3, 3) or 1) for v, c in k.items()})
        mixes.append(combo)
    ok = sol.residual_order1_zero and sol.residual_order2_zero
    tested = 0
    for g in gauges + mixes:
        ok &= reduced(amb, lag, omega, stars, ("U0", "U1"), add_fields(sol.field, g)) == base
        tested += 1
    amb2, lag2, omega2, stars2 = _cotangent_p1(("V", "W"))
    relabeled = reduced(amb2, lag2, omega2, stars2, ("V", "W"), sol.field)
    ok &= sorted(relabeled.values()) == sorted(base.values())
    assert report(9, ok, f"beta1 solved (kernel dim {sol.kernel_dimension}); class {base.to_json() or 0} "
                         f"unchanged under {tested} Hamiltonian gauges and under relabeling",
                  gauges=tested)


def test_criterion_10_bundled_verdicts():
    expected = {"tP1_Ominus1": True, "tP1_O0": False, "tA1_trivial": True}
    got = {name: run_scenario(load_bundled(name)).quantizable_at_order for name in expected}
    atlas = projective_line()
    c1 = lambda L: class_reduce(atlas, chern_class(atlas, L)).total()
    half_canonical = c1(o_of(-1)) - Fraction(1, 2) * c1(o_of(-2))
    ok = got == expected and half_canonical == 0
    assert report(10, ok, f"verdicts {got}; c1(O(-1)) - 1/2 c1(O(-2)) = {half_canonical}",
                  scenarios=len(got))


def test_criterion_11_nothing_deferred():
    # every criterion above ran at its stated scale; none was reduced or skipped
    stated = {
        1: {"commutation": 50, "associativity": 100},
        2: {"pairs": 50},
        3: {"samples": 50},
        4: {"integrable": 100, "nonintegrable": 20},
        5: {"samples": 50},
        7: {"degrees": 7},
        8: {"dimensions": 2},
        10: {"scenarios": 3},
    }
    missing = [n for n in range(1, 11) if n not in RESULTS]
    short = [n for n, want in stated.items()
             if n in RESULTS and any(RESULTS[n]["counts"].get(k, 0) < v for k, v in want.items())]
    gauges_ok = RESULTS.get(9, {}).get("counts", {}).get("gauges", 0) >= 5
    triples_ok = RESULTS.get(6, {}).get("counts", {}).get("triples", 0) >= 210
    ok = not missing and not short and gauges_ok and triples_ok
    assert report(11, ok, "no numerical headline claims; criteria 1-10 all ran at full stated scale"
                          + (f" (missing {missing}, short {short})" if missing or short else ""))


if __name__ == "__main__":
    start = time.time()
    failures = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion_")):
        try:
            fn()
        except AssertionError:
            failures += 1
    print(f"{11 - failures}/11 criteria passed in {time.time() - start:.1f}s")
    sys.exit(1 if failures else 0)
