from fractions import Fraction

from hypothesis import settings, strategies as st

from lagquant.coeffring import ScalarSeries
from lagquant.weyl import WeylElement

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

coefficients = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def series(draw, variables=("x1", "x2"), max_degree=3, max_hbar=2, max_terms=5):
    """Small polynomial series in the given variables."""
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = tuple(draw(st.integers(0, max_degree)) for _ in variables)
        k = draw(st.integers(0, max_hbar))
        terms[(exps, k)] = terms.get((exps, k), 0) + draw(coefficients)
    return ScalarSeries(variables, terms, x_degree_cap=12, hbar_order=6)


@st.composite
def weyl_elements(draw, n=2, max_degree=2, max_hbar=1, max_terms=4):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        a = tuple(draw(st.integers(0, max_degree)) for _ in range(n))
        b = tuple(draw(st.integers(0, max_degree)) for _ in range(n))
        k = draw(st.integers(0, max_hbar))
        key = (a, b, k)
        terms[key] = terms.get(key, Fraction(0)) + draw(coefficients)
    return WeylElement(n, terms, hbar_order=10**6)
