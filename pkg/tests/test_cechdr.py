from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lagquant.cechdr import (
    AmbientAtlas,
    Atlas,
    CechClass,
    LineBundle,
    Overlap,
    canonical_bundle,
    check_line_bundle,
    chern_class,
    class_reduce,
    lagrangian_embeddings,
    obstruction_class,
    restrict_2form_class,
    y_atlas,
)
from lagquant.coeffring import DifferentialForm, parse_series
from lagquant.errors import GluingDefect, NotCocycle, NotLagrangian
from lagquant.starprod import Chart, add_fields, hamiltonian_field, moyal, solve_beta1

CAP = 40


def lseries(text, var="t"):
    return parse_series(text, [var], invertible=[var], x_degree_cap=CAP)


def projective_line():
    return Atlas({"U0": ("t",), "U1": ("s",)}, [Overlap("U0", "U1", {"s": lseries("t^-1")}, {"t"})])


def bundle(d):
    return LineBundle({("U0", "U1"): lseries(f"t^{d}" if d else "1")})


@pytest.mark.parametrize("d", range(-3, 4))
def test_chern_class_of_line_bundles_on_the_projective_line(d):
    red = class_reduce(projective_line(), chern_class(projective_line(), bundle(d)))
    assert red.total() == d


def test_canonical_bundle_has_degree_minus_two():
    atlas = projective_line()
    K = canonical_bundle(atlas)
    assert K.transitions[("U0", "U1")] == lseries("-t^-2")
    assert class_reduce(atlas, chern_class(atlas, K)).total() == -2


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_chern_class_is_additive(a, b):
    atlas = projective_line()
    lhs = class_reduce(atlas, chern_class(atlas, bundle(a).tensor(bundle(b))))
    rhs = class_reduce(atlas, chern_class(atlas, bundle(a)) + chern_class(atlas, bundle(b)))
    assert lhs == rhs and lhs.total() == a + b


def test_scaling_a_transition_by_a_constant_does_not_change_c1():
    atlas = projective_line()
    L = LineBundle({("U0", "U1"): lseries("5 t^2")})
    assert class_reduce(atlas, chern_class(atlas, L)).total() == 2


def test_exact_xi_reduces_to_zero():
    atlas = projective_line()
    c = CechClass({}, {("U0", "U1"): DifferentialForm.parse(["t"], 1, {"t": "t^-3 + 2 t"}, ["t"], x_degree_cap=CAP)})
    assert class_reduce(atlas, c).is_zero()


def test_reduction_is_invariant_under_relabeling():
    atlas = projective_line()
    c = chern_class(atlas, bundle(-1))
    names = {"U0": "A", "U1": "B"}
    assert class_reduce(atlas.relabel(names), c.relabel(names)).total() == -1


def test_inconsistent_triple_overlap_is_rejected():
    x = lambda text, v: parse_series(text, [v], x_degree_cap=CAP)
    atlas = Atlas({"U0": ("a",), "U1": ("b",), "U2": ("c",)}, [
        Overlap("U0", "U1", {"b": x("a + 1", "a")}),
        Overlap("U1", "U2", {"c": x("b + 1", "b")}),
        Overlap("U0", "U2", {"c": x("a + 5", "a")}),
    ])
    with pytest.raises(NotCocycle):
        atlas.check_cocycle()


# ---------------------------------------------------------------------------
# cotangent bundle of the projective line


def cotangent_p1():
    u0, u1 = Chart("U0", ("t",), ("p",)), Chart("U1", ("s",), ("q",))
    m = {"s": parse_series("t^-1", ("t", "p"), invertible=["t"], x_degree_cap=CAP),
         "q": parse_series("-t^2 p", ("t", "p"), invertible=["t"], x_degree_cap=CAP)}
    amb = AmbientAtlas({"U0": u0, "U1": u1}, [Overlap("U0", "U1", m, {"t"})])
    lag = {"U0": [u0.series("p")], "U1": [u1.series("q")]}
    omega = {"U0": u0.omega(), "U1": u1.omega()}
    stars = {"U0": moyal(2, u0), "U1": moyal(2, u1)}
    return amb, lag, omega, stars


def _at(amb, lag, omega, stars, beta):
    yat, cls = obstruction_class(amb, stars, {("U0", "U1"): beta}, lag, omega)
    return class_reduce(yat, cls)


def test_zero_section_atlas_is_the_projective_line():
    amb, lag, _, _ = cotangent_p1()
    yat = y_atlas(amb, lagrangian_embeddings(amb, lag))
    assert yat.overlap("U0", "U1").map["s"] == lseries("t^-1")


def test_ideal_not_preserved_by_transition_is_not_lagrangian():
    amb, _, _, _ = cotangent_p1()
    u0, u1 = amb.charts["U0"], amb.charts["U1"]
    with pytest.raises(NotLagrangian):
        y_atlas(amb, lagrangian_embeddings(amb, {"U0": [u0.series("p")], "U1": [u1.series("q - 1")]}))


def test_obstruction_class_is_gauge_independent_and_flux_shifts_it():
    amb, lag, omega, stars = cotangent_p1()
    u0 = amb.charts["U0"].with_invertible({"t"})
    sol = solve_beta1(stars["U1"], moyal(2, u0), amb.overlaps[0].map)
    base = _at(amb, lag, omega, stars, sol.field)
    assert base.is_zero()
    for text in ("t p", "p^2", "t^-1 p", "t^3", "t^-2 p^2"):
        gauge = hamiltonian_field(u0, u0.series(text))
        assert _at(amb, lag, omega, stars, add_fields(sol.field, gauge)) == base
    flux = {"t": u0.series("0"), "p": u0.series("t^-1")}
    assert _at(amb, lag, omega, stars, add_fields(sol.field, flux)).total() == 1


def test_wrong_sign_convention_fails_to_glue():
    # two copies of the cotangent bundle of the plane, the second carrying the
    # product conjugated by a non-Hamiltonian field; only one sign of xi glues
    from lagquant.starprod import conjugate_by_field

    c0 = Chart("U0", ("q1", "q2"), ("p1", "p2"))
    c1 = Chart("U1", ("q1", "q2"), ("p1", "p2"))
    beta = {"q1": c0.series("q2 p1"), "q2": c0.series("p1 p2"),
            "p1": c0.series("q1^2 q2 + p2"), "p2": c0.series("q1 q2^2")}
    ident = {v: c0.series(v) for v in c1.coordinates}
    amb = AmbientAtlas({"U0": c0, "U1": c1}, [Overlap("U0", "U1", ident)])
    stars = {"U0": moyal(2, c0), "U1": conjugate_by_field(moyal(2, c0), beta)}
    lag = {n: [c.series("p1"), c.series("p2")] for n, c in amb.charts.items()}
    omega = {n: c.omega() for n, c in amb.charts.items()}
    yat, cls = obstruction_class(amb, stars, {("U0", "U1"): beta}, lag, omega)
    assert class_reduce(yat, cls).is_zero()
    with pytest.raises(GluingDefect):
        obstruction_class(amb, stars, {("U0", "U1"): beta}, lag, omega, xi_sign=1)


def test_restriction_of_the_symplectic_form_vanishes():
    amb, lag, omega, _ = cotangent_p1()
    yat, cls = restrict_2form_class(amb, omega, lagrangian_embeddings(amb, lag))
    assert class_reduce(yat, cls, derham=True).is_zero()
