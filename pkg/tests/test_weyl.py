import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import weyl_elements
from lagquant.coeffring import parse_series
from lagquant.errors import NotSymplectic, ValidityExhausted, ZeroElement
from lagquant.weyl import (
    SpMatrix,
    WeylElement,
    filtration_degree,
    parse_weyl,
    poisson_bracket,
    quantize_symmetric,
    random_sp,
    reorder_coefficient,
    semiclassical_bracket,
    sigma_embed,
    weyl_bracket,
    weyl_mul,
    weyl_symmetrize,
    weyl_symmetrize_bruteforce,
)


def test_canonical_commutation_relations():
    n = 3
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            br = weyl_bracket(WeylElement.y(n, j), WeylElement.x(n, i))
            assert br == (WeylElement.hbar(n) if i == j else WeylElement.zero(n))
            assert weyl_bracket(WeylElement.x(n, i), WeylElement.x(n, j)).is_zero()
            assert weyl_bracket(WeylElement.y(n, i), WeylElement.y(n, j)).is_zero()


def test_reordering_table_against_repeated_swaps():
    # y^b x^c in one variable pair, computed by multiplying single letters
    for b in range(5):
        for c in range(5):
            w = WeylElement.constant(1, 1)
            for _ in range(b):
                w = w * WeylElement.y(1, 1)
            for _ in range(c):
                w = w * WeylElement.x(1, 1)
            for k in range(min(b, c) + 1):
                assert w.coefficient((c - k,), (b - k,), k) == reorder_coefficient(b, c, k)


@pytest.mark.parametrize("a,b", [((1,), (1,)), ((2,), (1,)), ((2,), (2,)), ((1, 1), (1, 0)), ((1, 0), (1, 2))])
def test_symmetrization_closed_form(a, b):
    assert weyl_symmetrize(a, b) == weyl_symmetrize_bruteforce(a, b)


@given(weyl_elements(), weyl_elements(), weyl_elements())
def test_associativity(u, v, w):
    assert (u * v) * w == u * (v * w)


@given(weyl_elements(), weyl_elements(), weyl_elements())
def test_jacobi_identity(u, v, w):
    total = weyl_bracket(u, weyl_bracket(v, w)) + weyl_bracket(v, weyl_bracket(w, u)) + weyl_bracket(w, weyl_bracket(u, v))
    assert total.is_zero()


@given(weyl_elements(max_hbar=0))
def test_y_acts_as_h_times_derivative_on_x_polynomials(u):
    # restrict to x-only elements
    f = WeylElement(2, {(a, (0, 0), k): c for (a, b, k), c in u.terms.items() if not any(b)})
    for i in (1, 2):
        lhs = WeylElement.y(2, i) * f - f * WeylElement.y(2, i)
        expected = {}
        for (a, b, k), c in f.terms.items():
            if a[i - 1]:
                a2 = list(a)
                a2[i - 1] -= 1
                expected[(tuple(a2), b, k + 1)] = c * a[i - 1]
        assert lhs == WeylElement(2, expected)


@given(weyl_elements(max_hbar=0), weyl_elements(max_hbar=0))
def test_semiclassical_limit_is_the_poisson_bracket(u, v):
    f, g = u.symbol(), v.symbol()
    uq, vq = quantize_symmetric(f, 2), quantize_symmetric(g, 2)
    assert semiclassical_bracket(uq, vq) == poisson_bracket(f, g, 2)


def test_parse_and_print():
    w = parse_weyl("y1 x1")
    assert str(w) == "x1 y1 + h"
    assert parse_weyl(str(w)) == w
    assert WeylElement.from_json(w.to_json()) == w


def test_filtration_degree():
    assert filtration_degree(parse_weyl("x1 y1 + h")) == 2
    assert filtration_degree(parse_weyl("x1 + h^3")) == 1
    with pytest.raises(ZeroElement):
        filtration_degree(WeylElement.zero(1))


def test_validity_is_tracked_and_exhaustion_raises():
    # both factors are known only through h^-1
    u = parse_weyl("y1^2 h^-1", hbar_order=-1)
    v = parse_weyl("x1^2 h^-1", hbar_order=-1)
    br = weyl_bracket(u, v)
    assert br.hbar_order == -1 and br == parse_weyl("4 x1 y1 h^-1", hbar_order=-1)
    with pytest.raises(ValidityExhausted):
        weyl_mul(u, v)


def test_sigma_rejects_non_symplectic_matrices():
    with pytest.raises(NotSymplectic):
        SpMatrix([[1, 0], [0, 1]])


@given(st.integers(0, 10_000))
def test_sigma_is_a_lie_homomorphism(seed):
    rng = random.Random(seed)
    a, b = random_sp(rng, 2), random_sp(rng, 2)
    lhs = sigma_embed(a.bracket(b))
    rhs = weyl_bracket(sigma_embed(a), sigma_embed(b))
    assert (lhs - rhs).drop_central().is_zero()
    for w in WeylElement.generators(2):
        assert weyl_bracket(sigma_embed(a), w) == a.apply(w)


def test_sigma_of_the_diagonal_generator():
    # g = [[1]]: the Euler-type element (x y + y x) / 2h
    s = sigma_embed(SpMatrix.from_blocks([[1]]))
    assert s == parse_weyl("x1 y1 h^-1 + 1/2")
    assert weyl_bracket(s, WeylElement.x(1, 1)) == WeylElement.x(1, 1)
    assert weyl_bracket(s, WeylElement.y(1, 1)) == WeylElement.y(1, 1).scale(Fraction(-1))
