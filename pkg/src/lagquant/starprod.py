"""Star products on Darboux charts, associativity checks and first-order transitions.

A chart has base coordinates ``q1..`` and fiber coordinates ``p1..`` paired
so that the Poisson bivector is ``P = sum_i (d/dq_i ^ d/dp_i)``, i.e.
``{q_i, p_i} = 1``.  A star product is stored as bidifferential operators
``alpha_k`` with ``f * g = fg + sum_k h^k alpha_k(f, g)``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial

from .coeffring import DifferentialForm, ScalarSeries, parse_series, solve_primitive, substitute
from .errors import ChartMismatch, NoSolution, NotSymplectic, NotWeylNormalized
from .linalg import solve_affine

OVERLAP_CAP = 40


@dataclass(frozen=True)
class Chart:
    """Named Darboux coordinates; ``invertible`` lists Laurent coordinates."""

    name: str
    base: tuple
    fiber: tuple
    invertible: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "fiber", tuple(self.fiber))
        object.__setattr__(self, "invertible", frozenset(self.invertible))
        if len(self.base) != len(self.fiber):
            raise ValueError("a Darboux chart needs as many fiber as base coordinates")

    @property
    def coordinates(self):
        return self.base + self.fiber

    def with_invertible(self, invertible):
        return Chart(self.name, self.base, self.fiber, frozenset(invertible))

    def series(self, text, **opts):
        opts.setdefault("x_degree_cap", OVERLAP_CAP)
        return parse_series(str(text), self.coordinates, invertible=self.invertible, **opts)

    def omega(self):
        """The symplectic form sum dq_i ^ dp_i."""
        comps = {(q, p): ScalarSeries.constant(self.coordinates, 1) for q, p in zip(self.base, self.fiber)}
        return DifferentialForm(self.coordinates, 2, comps, self.invertible)


def _unit_index(variables, name, n=1):
    return tuple(n if v == name else 0 for v in variables)


def _add_index(a, b):
    return tuple(x + y for x, y in zip(a, b))


class BidiffOp:
    """Finite sum of ``c(x) d^alpha f d^beta g`` over multi-index pairs."""

    __slots__ = ("variables", "terms", "invertible")

    def __init__(self, variables, terms=None, invertible=()):
        self.variables = tuple(variables)
        self.invertible = frozenset(invertible)
        table = {}
        for (alpha, beta), c in (terms or {}).items():
            alpha, beta = tuple(alpha), tuple(beta)
            if len(alpha) != len(self.variables) or len(beta) != len(self.variables):
                raise ValueError("multi-index length does not match the chart")
            if not isinstance(c, ScalarSeries):
                c = ScalarSeries.constant(self.variables, c, x_degree_cap=10**6, hbar_order=10**6,
                                          invertible=self.invertible)
            c = c.embed(self.variables, self.invertible)
            key = (alpha, beta)
            table[key] = table[key] + c if key in table else c
        self.terms = {k: c for k, c in table.items() if not c.is_zero()}

    def apply(self, f, g):
        f = f.embed(self.variables, self.invertible)
        g = g.embed(self.variables, self.invertible)
        df, dg = {}, {}
        total = None
        for (alpha, beta), c in sorted(self.terms.items()):
            if alpha not in df:
                df[alpha] = f.partial(alpha)
            if beta not in dg:
                dg[beta] = g.partial(beta)
            term = c * df[alpha] * dg[beta]
            total = term if total is None else total + term
        if total is None:
            return (f * g).zero_like()
        return total

    def swap(self):
        return BidiffOp(self.variables, {(b, a): c for (a, b), c in self.terms.items()}, self.invertible)

    def __add__(self, other):
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms[k] + c if k in terms else c
        return BidiffOp(self.variables, terms, self.invertible | other.invertible)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return BidiffOp(self.variables, {k: v.scale(c) for k, v in self.terms.items()}, self.invertible)

    def compose_constant(self, other):
        """Product of constant-coefficient operators: indices add, coefficients multiply."""
        terms = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                key = (_add_index(a1, a2), _add_index(b1, b2))
                c = c1 * c2
                terms[key] = terms[key] + c if key in terms else c
        return BidiffOp(self.variables, terms, self.invertible)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, BidiffOp):
            return NotImplemented
        return self.variables == other.variables and (self - other).is_zero()

    __hash__ = None

    def to_json(self):
        return [{"left": list(a), "right": list(b), "coeff": str(c)} for (a, b), c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, variables, data, invertible=()):
        terms = {}
        for entry in data:
            coeff = parse_series(str(entry["coeff"]), variables, invertible=invertible, x_degree_cap=OVERLAP_CAP)
            key = (tuple(entry["left"]), tuple(entry["right"]))
            terms[key] = terms[key] + coeff if key in terms else coeff
        return cls(variables, terms, invertible)

    def __repr__(self):
        return f"BidiffOp({self.to_json()})"


def poisson_op(chart):
    """The bivector P as a bidifferential operator: P(f, g) = sum f_q g_p - f_p g_q."""
    v = chart.coordinates
    terms = {}
    for q, p in zip(chart.base, chart.fiber):
        terms[(_unit_index(v, q), _unit_index(v, p))] = 1
        terms[(_unit_index(v, p), _unit_index(v, q))] = -1
    return BidiffOp(v, terms, chart.invertible)


def poisson(chart, f, g):
    return poisson_op(chart).apply(f, g)


class StarProduct:
    """Star product data on one chart up to a finite hbar-order."""

    def __init__(self, chart, alphas, order=None):
        self.chart = chart
        self.alphas = {int(k): op for k, op in alphas.items()}
        self.order = max(self.alphas, default=0) if order is None else order
        if self.order < 1:
            raise ValueError("a star product needs order >= 1")
        v = chart.coordinates
        for k in range(1, self.order + 1):
            self.alphas.setdefault(k, BidiffOp(v, {}, chart.invertible))

    @property
    def variables(self):
        return self.chart.coordinates

    def alpha(self, k):
        return self.alphas[k]

    @property
    def weyl_normalized(self):
        return self.alphas[1] == poisson_op(self.chart).scale(Fraction(1, 2))

    def poisson_axiom_holds(self):
        a1 = self.alphas[1]
        return a1 - a1.swap() == poisson_op(self.chart)

    def antisymmetric(self, k):
        a = self.alphas[k]
        return a - a.swap()

    def symmetrized(self, k):
        """Copy with alpha_k replaced by its symmetric part."""
        alphas = dict(self.alphas)
        a = self.alphas[k]
        alphas[k] = (a + a.swap()).scale(Fraction(1, 2))
        return StarProduct(self.chart, alphas, self.order)

    def with_alpha(self, k, op):
        alphas = dict(self.alphas)
        alphas[k] = op
        return StarProduct(self.chart, alphas, max(self.order, k))

    def to_json(self):
        return {
            "chart": self.chart.name,
            "base": list(self.chart.base),
            "fiber": list(self.chart.fiber),
            "order": self.order,
            "alphas": {str(k): op.to_json() for k, op in sorted(self.alphas.items())},
        }

    @classmethod
    def from_json(cls, data, chart=None):
        if chart is None:
            chart = Chart(data.get("chart", "U"), data["base"], data["fiber"], data.get("invertible", ()))
        if data.get("moyal") or data.get("type") == "moyal":
            return moyal(int(data.get("order", 2)), chart)
        alphas = {int(k): BidiffOp.from_json(chart.coordinates, v, chart.invertible)
                  for k, v in data.get("alphas", {}).items()}
        return cls(chart, alphas, data.get("order"))


def moyal(order, chart):
    """Moyal product: alpha_k = P^k / (2^k k!)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    p = poisson_op(chart)
    alphas = {}
    power = p
    for k in range(1, order + 1):
        if k > 1:
            power = power.compose_constant(p)
        alphas[k] = power.scale(Fraction(1, 2 ** k * factorial(k)))
    return StarProduct(chart, alphas, order)


def _check_chart(s, *fs):
    out = []
    for f in fs:
        if not set(f.variables) <= set(s.variables):
            raise ChartMismatch(f"series in {f.variables} is not on chart {s.variables}")
        out.append(f.embed(s.variables, s.chart.invertible))
    return out


def star_apply(s, f, g):
    """f * g = fg + sum_{k <= order} h^k alpha_k(f, g), truncated at the order."""
    f, g = _check_chart(s, f, g)
    total = f * g
    for k in range(1, s.order + 1):
        total = total + s.alphas[k].apply(f, g).shift_hbar(k)
    low = min(f.lowest_hbar_power(), 0) + min(g.lowest_hbar_power(), 0)
    return total.truncate(hbar_order=s.order + low)


def assoc_defect(s, f, g, h):
    """(f * g) * h - f * (g * h) up to the order of ``s``."""
    f, g, h = _check_chart(s, f, g, h)
    return star_apply(s, star_apply(s, f, g), h) - star_apply(s, f, star_apply(s, g, h))


# ---------------------------------------------------------------------------
# transitions


def apply_field(field, F):
    """Derivative of F along the vector field ``{variable: component}``."""
    total = F.zero_like()
    for v, comp in field.items():
        if comp is None or comp.is_zero():
            continue
        total = total + comp * F.differentiate(v)
    return total


def field_is_zero(field):
    return all(c is None or c.is_zero() for c in field.values())


def add_fields(*fields):
    out = {}
    for fld in fields:
        for v, c in fld.items():
            out[v] = out[v] + c if v in out else c
    return out


def scale_field(field, c):
    return {v: comp.scale(c) for v, comp in field.items()}


def hamiltonian_field(chart, H):
    """X_H with iota_{X_H} omega = -dH for omega = sum dq ^ dp, i.e. X_H = sum H_p d_q - H_q d_p."""
    out = {}
    for q, p in zip(chart.base, chart.fiber):
        out[q] = H.differentiate(p)
        out[p] = -H.differentiate(q)
    return out


@dataclass
class TransitionMap:
    """Overlap transition T(f) = phi^*(f) + h beta1(phi^* f) + h^2 beta2(phi^* f).

    ``coord_map`` expresses the source chart coordinates in the destination
    coordinates; ``beta1`` is a vector field in destination coordinates and
    ``beta2`` an optional differential operator ``{multi-index: series}``.
    """

    src: Chart
    dst: Chart
    coord_map: dict
    beta1: dict = field(default_factory=dict)
    beta2: dict = field(default_factory=dict)

    def pullback(self, f):
        return substitute(f, self.coord_map, self.dst.coordinates, invertible=self.dst.invertible,
                          x_degree_cap=OVERLAP_CAP)

    def apply(self, f):
        F = self.pullback(f)
        out = F + apply_field(self.beta1, F).shift_hbar(1)
        for alpha, c in self.beta2.items():
            out = out + (c * F.partial(alpha)).shift_hbar(2)
        return out


def check_symplectic(src, dst, coord_map):
    """Raise NotSymplectic unless P_dst(phi^*u, phi^*v) = phi^*P_src(u, v) on coordinates."""
    t = TransitionMap(src, dst, coord_map)
    coords = src.coordinates
    for i, u in enumerate(coords):
        for w in coords[i + 1:]:
            U = src.series(u)
            W = src.series(w)
            lhs = poisson(dst, t.pullback(U), t.pullback(W))
            rhs = t.pullback(poisson(src, U, W))
            if not (lhs - rhs).is_zero():
                raise NotSymplectic(f"the map does not preserve the bracket {{{u}, {w}}}: {lhs} vs {rhs}")


def _test_functions(chart, max_degree=2):
    v = chart.coordinates
    out = []
    for d in range(0, max_degree + 1):
        for combo in combinations_with_replacement(range(len(v)), d):
            exps = [0] * len(v)
            for i in combo:
                exps[i] += 1
            out.append(ScalarSeries(v, {(tuple(exps), 0): 1}, x_degree_cap=OVERLAP_CAP, hbar_order=10,
                                    invertible=chart.invertible))
    return out


def order1_residual(s_src, s_dst, t, f, g):
    """Coefficient of h in T(f *_src g) - T(f) *_dst T(g)."""
    F, G = t.pullback(f), t.pullback(g)
    lhs = t.pullback(s_src.alphas[1].apply(f, g)) + apply_field(t.beta1, F * G)
    rhs = s_dst.alphas[1].apply(F, G) + apply_field(t.beta1, F) * G + F * apply_field(t.beta1, G)
    return lhs - rhs


def order2_antisymmetric_residual(s_src, s_dst, t, f, g):
    """Antisymmetric part of the h^2 intertwining equation.

    E(f, g) = phi^* alpha2_src(f, g) + beta(phi^* alpha1_src(f, g))
              - alpha2_dst(F, G) - alpha1_dst(beta F, G) - alpha1_dst(F, beta G),
    and the residual is E(f, g) - E(g, f).  Terms involving beta2 or
    beta(F) beta(G) are symmetric and drop out.
    """
    def E(a, b):
        A, B = t.pullback(a), t.pullback(b)
        val = t.pullback(s_src.alphas[2].apply(a, b)) + apply_field(t.beta1, t.pullback(s_src.alphas[1].apply(a, b)))
        val = val - s_dst.alphas[2].apply(A, B)
        val = val - s_dst.alphas[1].apply(apply_field(t.beta1, A), B)
        val = val - s_dst.alphas[1].apply(A, apply_field(t.beta1, B))
        return val

    return E(f, g) - E(g, f)


@dataclass
class Beta1Solution:
    field: dict
    kernel: list
    ansatz: list
    residual_order1_zero: bool
    residual_order2_zero: bool

    @property
    def kernel_dimension(self):
        return len(self.kernel)

    def support(self):
        return sum(len(c.terms) for c in self.field.values())

    def to_json(self):
        return {
            "beta1": {v: str(c) for v, c in self.field.items()},
            "kernel_dimension": self.kernel_dimension,
            "kernel": [{v: str(c) for v, c in k.items()} for k in self.kernel],
            "ansatz_size": len(self.ansatz),
            "order1_residual_zero": self.residual_order1_zero,
            "order2_antisymmetric_residual_zero": self.residual_order2_zero,
        }


def _ansatz(chart, degree):
    v = chart.coordinates
    ranges = []
    for name in v:
        lo = -degree if name in chart.invertible else 0
        ranges.append(range(lo, degree + 1))
    from itertools import product

    monos = []
    for e in product(*ranges):
        if sum(x for x in e if x > 0) <= degree:
            monos.append(tuple(e))
    return [(var, e) for var in v for e in sorted(monos, key=lambda e: (sum(map(abs, e)), e))]


def solve_beta1(s_src, s_dst, coord_map, degree=3, test_degree=2):
    """Solve for a derivation beta1 intertwining two star products.

    The order-1 equation holds for every derivation once the map is
    symplectic and both products are Weyl normalized, so the unknowns are
    fixed by the antisymmetric order-2 equation.  The ansatz is all vector
    fields whose components are Laurent monomials of degree at most
    ``degree``; the returned field is the basic solution of the exact linear
    system (free unknowns set to zero) and ``kernel`` spans its null space.
    """
    for s in (s_src, s_dst):
        if not s.weyl_normalized:
            raise NotWeylNormalized(f"star product on {s.chart.name} is not Weyl normalized")
        if s.order < 2:
            raise ValueError("solve_beta1 needs star products of order >= 2")
    check_symplectic(s_src.chart, s_dst.chart, coord_map)
    dst = s_dst.chart
    ansatz = _ansatz(dst, degree)
    tests = _test_functions(s_src.chart, test_degree)
    pairs = [(tests[i], tests[j]) for i in range(len(tests)) for j in range(i + 1, len(tests))]
    zero_t = TransitionMap(s_src.chart, dst, coord_map)

    def basis_field(idx):
        var, e = ansatz[idx]
        return {var: ScalarSeries(dst.coordinates, {(e, 0): 1}, x_degree_cap=OVERLAP_CAP, hbar_order=10,
                                  invertible=dst.invertible)}

    rows_by_key = {}
    rhs_by_key = {}
    for pi, (f, g) in enumerate(pairs):
        base = order2_antisymmetric_residual(s_src, s_dst, zero_t, f, g)
        for mono, c in base.terms.items():
            rhs_by_key[(pi, mono)] = -c
        for j in range(len(ansatz)):
            t = TransitionMap(s_src.chart, dst, coord_map, basis_field(j))
            val = order2_antisymmetric_residual(s_src, s_dst, t, f, g) - base
            for mono, c in val.terms.items():
                rows_by_key.setdefault((pi, mono), {})[j] = c
    keys = sorted(set(rows_by_key) | set(rhs_by_key), key=repr)
    rows = [rows_by_key.get(k, {}) for k in keys]
    rhs = [rhs_by_key.get(k, 0) for k in keys]
    particular, kernel_vecs = solve_affine(rows, rhs, len(ansatz))

    def to_field(vec):
        comps = {}
        for (var, e), c in zip(ansatz, vec):
            if c:
                comps.setdefault(var, {})[(e, 0)] = c
        return {var: ScalarSeries(dst.coordinates, comps.get(var, {}), x_degree_cap=OVERLAP_CAP, hbar_order=10,
                                  invertible=dst.invertible) for var in dst.coordinates}

    beta = to_field(particular)
    kernel = [to_field(v) for v in kernel_vecs]
    t = TransitionMap(s_src.chart, dst, coord_map, beta)
    r1 = all(order1_residual(s_src, s_dst, t, f, g).is_zero() for f, g in pairs)
    if not r1:
        raise NoSolution("order-1 intertwining fails; the products do not induce the same bracket")
    r2 = all(order2_antisymmetric_residual(s_src, s_dst, t, f, g).is_zero() for f, g in pairs)
    return Beta1Solution(field=beta, kernel=kernel, ansatz=ansatz, residual_order1_zero=r1, residual_order2_zero=r2)


def is_hamiltonian(chart, vector_field):
    """Whether iota_X omega is exact among Laurent forms (X is then a gauge direction)."""
    form = chart.omega().interior(vector_field)
    if not form.is_closed():
        return False
    return solve_primitive(form) is not None


def conjugate_by_field(star, beta):
    """Order-2 star product f *' g = T^-1(T f * T g) for T = 1 + h beta.

    Its coefficients are alpha1' = alpha1 and
    alpha2'(f, g) = alpha2(f, g) - 1/2 (L_beta P)(df, dg) + beta(f) beta(g),
    valid when alpha1 = P/2 with constant P.
    """
    if not star.weyl_normalized:
        raise NotWeylNormalized("conjugation formula assumes a Weyl normalized product")
    v = star.variables
    inv = star.chart.invertible
    beta = {w: c.embed(v, inv) for w, c in beta.items()}
    P = poisson_op(star.chart)
    extra = {}

    def add(key, c):
        extra[key] = extra[key] + c if key in extra else c

    for (alpha, gamma), c in P.terms.items():
        u = v[alpha.index(1)]
        w_ = v[gamma.index(1)]
        for w, bw in beta.items():
            e_w = _unit_index(v, w)
            # -1/2 L_beta P contributes +1/2 P^{uv} (d_u beta^w d_w f d_v g + d_v beta^w d_u f d_w g)
            add((e_w, gamma), (c * bw.differentiate(u)).scale(Fraction(1, 2)))
            add((alpha, e_w), (c * bw.differentiate(w_)).scale(Fraction(1, 2)))
    for w1, b1 in beta.items():
        for w2, b2 in beta.items():
            add((_unit_index(v, w1), _unit_index(v, w2)), b1 * b2)
    alpha2 = star.alphas[2] + BidiffOp(v, extra, inv)
    return StarProduct(star.chart, {1: star.alphas[1], 2: alpha2}, 2)
