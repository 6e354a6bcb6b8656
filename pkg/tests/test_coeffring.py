from fractions import Fraction

import pytest
from hypothesis import given

from conftest import series
from lagquant.coeffring import (
    DifferentialForm,
    ScalarSeries,
    exp_series,
    integrate_path,
    parse_series,
    solve_primitive,
    substitute,
)
from lagquant.errors import NotClosed, ParseError

XY = ("x1", "x2")


def test_parse_and_print_round_trip():
    f = parse_series("3 x1^2 x2 - 1/2 h + x2 h^2", XY)
    assert str(f) == str(parse_series(str(f), XY))
    assert f.coefficient((2, 1), 0) == 3
    assert f.coefficient((0, 0), 1) == Fraction(-1, 2)


def test_parse_rejects_garbage():
    with pytest.raises(ParseError):
        parse_series("x1 +* 2", XY)


def test_laurent_inverse_of_invertible_variable():
    t = parse_series("t", ["t"], invertible=["t"])
    assert (t * t.inverse()) == ScalarSeries.constant(["t"], 1)
    assert str(parse_series("t^-2", ["t"], invertible=["t"]) * t) == "t^-1"


def test_inverse_of_unit_series():
    u = parse_series("1 + x1 + h", XY, x_degree_cap=8, hbar_order=5)
    assert (u * u.inverse()) == u.constant_like(1)


@given(series(), series(), series())
def test_ring_axioms(f, g, h):
    assert f + g == g + f
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h


@given(series(), series())
def test_leibniz_rule(f, g):
    d = lambda s: s.differentiate("x1")
    assert d(f * g) == d(f) * g + f * d(g)


@given(series())
def test_differentiate_then_integrate_along_path(f):
    prim = integrate_path([f.differentiate(v) for v in XY], XY)
    assert (prim - f).differentiate("x1") == prim.zero_like()
    assert (prim - f).differentiate("x2") == prim.zero_like()


def test_integrate_rejects_non_closed_form():
    with pytest.raises(NotClosed):
        integrate_path([parse_series("x2", XY), parse_series("0", XY)], XY)


def test_exp_series_is_a_homomorphism_on_nilpotents():
    a = parse_series("x1 h", XY, hbar_order=6)
    b = parse_series("x2^2 h", XY, hbar_order=6)
    assert exp_series(a + b) == exp_series(a) * exp_series(b)


def test_substitute_composes_maps():
    f = parse_series("s^2 + s", ["s"], invertible=["s"])
    g = substitute(f, {"s": parse_series("t^-1", ["t"], invertible=["t"])}, ["t"], invertible=["t"])
    assert str(g) == str(parse_series("t^-1 + t^-2", ["t"], invertible=["t"]))


@given(series())
def test_d_squared_vanishes(f):
    zero = DifferentialForm(XY, 0, {(): f})
    assert zero.d().d().is_zero()


def test_interior_product_of_darboux_form():
    w = DifferentialForm.parse(("q", "p"), 2, {"q,p": "1"})
    one = ScalarSeries.constant(("q", "p"), 1)
    beta = {"p": one}
    assert w.interior(beta) == DifferentialForm.parse(("q", "p"), 1, {"q": "-1"})


def test_pullback_of_dt_under_inversion():
    dt = DifferentialForm.parse(["s"], 1, {"s": "1"}, invertible=["s"])
    pulled = dt.pullback({"s": parse_series("t^-1", ["t"], invertible=["t"])}, ["t"], invertible=["t"])
    assert pulled == DifferentialForm.parse(["t"], 1, {"t": "-t^-2"}, invertible=["t"])


def test_solve_primitive_finds_laurent_primitives_and_detects_residues():
    exact = DifferentialForm.parse(["t"], 1, {"t": "t^-2"}, invertible=["t"])
    prim = solve_primitive(exact)
    assert prim is not None and prim.d() == exact
    assert solve_primitive(DifferentialForm.parse(["t"], 1, {"t": "t^-1"}, invertible=["t"])) is None


def test_json_round_trip():
    f = parse_series("x1^3 h - 2/3 x2", XY)
    assert ScalarSeries.from_json(f.to_json()) == f
