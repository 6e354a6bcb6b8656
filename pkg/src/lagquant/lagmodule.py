"""The basic module M = k[[x, h]] of the Weyl algebra, and lifting of module data.

An element of M is stored as a :class:`ScalarSeries` in ``x1..xn`` (no y
variables, no negative hbar powers) and stands for ``v * 1_M``.  The
generator ``x_i`` acts by multiplication and ``y_j`` acts by ``h d/dx_j``.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .coeffring import ScalarSeries, exp_series, integrate_path
from .errors import IllDefinedAction, NotClosed, NotIntegrable, NotParabolic
from .weyl import SigmaWeight, SpMatrix, WeylElement, sigma_embed, symplectic_defect, theta_D

_HUGE = 10**6


def module_variables(n):
    return tuple(f"x{i}" for i in range(1, n + 1))


def module_element(text_or_series, n, **opts):
    """Coerce a literal or series into an element of M over x1..xn."""
    from .coeffring import parse_series

    if isinstance(text_or_series, ScalarSeries):
        v = text_or_series.embed(module_variables(n))
    else:
        v = parse_series(str(text_or_series), module_variables(n), **opts)
    _check_module_element(v)
    return v


def unit(n, x_degree_cap=_HUGE, hbar_order=_HUGE):
    """The generator 1_M."""
    return ScalarSeries.constant(module_variables(n), 1, x_degree_cap=x_degree_cap, hbar_order=hbar_order)


def _check_module_element(v):
    if any(k < 0 for _, k in v.terms):
        raise IllDefinedAction("module elements have no negative hbar powers")


def _x_monomial(variables, a, k, c):
    return ScalarSeries(variables, {(tuple(a), k): c}, x_degree_cap=_HUGE, hbar_order=_HUGE,
                        min_hbar_power=min(k, 0))


def act(u, v):
    """Action of a Weyl element (possibly with h^-1 terms) on v * 1_M."""
    n = u.n
    variables = module_variables(n)
    v = v.embed(variables)
    _check_module_element(v)
    if not u.terms:
        return v.zero_like().with_caps(hbar_order=min(u.hbar_order, v.hbar_order))
    derivs = {}
    total = None
    shifts = []
    for (a, b, k), c in u.items():
        if b not in derivs:
            dv = v
            for j, e in enumerate(b):
                for _ in range(e):
                    dv = dv.differentiate(variables[j])
            derivs[b] = dv
        shift = k + sum(b)
        shifts.append(shift)
        term = derivs[b].shift_hbar(shift) * _x_monomial(variables, a, 0, c)
        total = term if total is None else total + term
    order = min(u.hbar_order, v.hbar_order + min(shifts))
    total = total.with_caps(hbar_order=min(order, total.hbar_order))
    bad = [key for key in total.terms if key[1] < 0]
    if bad:
        raise IllDefinedAction(f"the h^-1 part of {u} does not cancel on {v}")
    return total._like(total.terms, min_hbar_power=0)


def series_to_weyl(v, n):
    """View an element of k[[x, h]] as the Weyl element v(x) (x factors only)."""
    v = v.embed(module_variables(n))
    z = (0,) * n
    return WeylElement(n, {(e, z, k): c for (e, k), c in v.terms.items()}, v.hbar_order)


def parabolic(g, s=None):
    """Parabolic matrix [[g, 0], [s, -g^T]] stabilizing span(y1..yn).

    In the column convention of :class:`SpMatrix` this is the stabilizer of
    span(y); its sigma image is 1/2 sum g_ij (x_i y_j + y_j x_i) + 1/2 sum s_ij y_i y_j
    divided by h.
    """
    return SpMatrix.from_blocks(g, None, s)


def _require_parabolic(a):
    if symplectic_defect(a):
        raise NotParabolic("matrix is not in sp(2n)")
    if not a.is_parabolic():
        raise NotParabolic("matrix does not preserve span(y1..yn): its upper-right block is nonzero")


def sigma_weight_report(a):
    """Evaluate sigma(a) on 1_M directly and compare with trace formulas."""
    _require_parabolic(a)
    n = a.n
    out = act(sigma_embed(a), unit(n))
    value = out.constant_term()
    if not (out - out.constant_like(value)).is_zero():
        raise NotParabolic(f"sigma(a) does not act on 1_M by a scalar: {out}")
    half = Fraction(1, 2)
    g_trace = sum(a.block("g")[i][i] for i in range(n))
    return SigmaWeight(value=value, half_trace_g=half * g_trace,
                       half_trace_restricted=half * a.restricted_trace())


def sigma_weight(a):
    """The scalar by which sigma(a) acts on 1_M."""
    return sigma_weight_report(a).value


def theta_M(a, v):
    """theta_M(a)(u 1_M) := theta_D(a)(u) 1_M."""
    return act(theta_D(a, series_to_weyl(v, a.n)), unit(a.n))


def verify_error_identity(a, v):
    """Check act(sigma(a), v) == theta_M(a)(v) + sigma_weight(a) v."""
    _require_parabolic(a)
    v = v.embed(module_variables(a.n))
    lhs = act(sigma_embed(a), v)
    rhs = theta_M(a, v) + v.scale(sigma_weight(a))
    return lhs == rhs


# ---------------------------------------------------------------------------
# module data and lifting


@dataclass(frozen=True)
class ModuleData:
    """Candidate action y_j(1_M) = f_j 1_M on k[[x, h]], with f_j divisible by h."""

    n: int
    f: tuple

    def __post_init__(self):
        if len(self.f) != self.n:
            raise ValueError(f"expected {self.n} components, got {len(self.f)}")
        variables = module_variables(self.n)
        fs = []
        for j, fj in enumerate(self.f):
            fj = fj.embed(variables)
            for (e, k) in fj.terms:
                if k < 1:
                    raise ValueError(f"f_{j + 1} = {fj} is not divisible by h")
            fs.append(fj)
        object.__setattr__(self, "f", tuple(fs))

    @classmethod
    def trivial(cls, n, x_degree_cap=6, hbar_order=4):
        z = ScalarSeries.zero(module_variables(n), x_degree_cap=x_degree_cap, hbar_order=hbar_order)
        return cls(n, tuple(z for _ in range(n)))

    def y_action(self, j, v):
        """y_j acting on v under this data: h dv/dx_j + f_j v (j is 1-based)."""
        var = module_variables(self.n)[j - 1]
        return v.differentiate(var).shift_hbar(1) + self.f[j - 1] * v

    def to_json(self):
        return {"n": self.n, "f": [str(fj) for fj in self.f]}


@dataclass(frozen=True)
class LiftResult:
    g: ScalarSeries
    m: ScalarSeries
    residuals: tuple = field(default=())

    @property
    def verified(self):
        return all(r.is_zero() for r in self.residuals)

    def to_json(self):
        return {
            "g": str(self.g),
            "m": str(self.m),
            "verification": {
                "y_j(m)": [str(r) for r in self.residuals],
                "all_zero": self.verified,
                "x_degree_cap": self.m.x_degree_cap,
                "hbar_order": self.m.hbar_order,
            },
        }


def integrability_defect(data):
    """List of (i, j, dg_j/dx_i - dg_i/dx_j) for the pairs where it is nonzero."""
    variables = module_variables(data.n)
    gs = [fj.shift_hbar(-1) for fj in data.f]
    out = []
    for i in range(data.n):
        for j in range(i + 1, data.n):
            diff = gs[j].differentiate(variables[i]) - gs[i].differentiate(variables[j])
            if not diff.is_zero():
                out.append((i + 1, j + 1, diff))
    return out


def commutator_defect(data):
    """The full check y_i y_j (1_M) - y_j y_i (1_M) under the data action."""
    if not data.n:
        return []
    one = unit(data.n).with_caps(data.f[0].x_degree_cap, data.f[0].hbar_order)
    out = []
    for i in range(1, data.n + 1):
        for j in range(i + 1, data.n + 1):
            d = data.y_action(i, data.y_action(j, one)) - data.y_action(j, data.y_action(i, one))
            if not d.is_zero():
                out.append((i, j, d))
    return out


def lift_module(data):
    """Construct m = exp(-g) 1_M with y_j(m) = 0 for all j.

    Steps: g_j = f_j / h, check dg_j/dx_i = dg_i/dx_j, integrate to g with
    no constant term, exponentiate, then verify the annihilation exactly.
    """
    n = data.n
    variables = module_variables(n)
    if n == 0:
        one = ScalarSeries.constant((), 1)
        return LiftResult(g=one.zero_like(), m=one, residuals=())
    bad = integrability_defect(data)
    if bad:
        i, j, diff = bad[0]
        raise NotIntegrable(f"d g_{j}/dx{i} - d g_{i}/dx{j} = {diff} is nonzero")
    gs = [fj.shift_hbar(-1)._like(fj.shift_hbar(-1).terms, min_hbar_power=0) for fj in data.f]
    try:
        g = integrate_path(gs, variables)
    except NotClosed as exc:  # pragma: no cover - guarded above
        raise NotIntegrable(str(exc)) from None
    m = exp_series(-g)
    residuals = tuple(data.y_action(j, m) for j in range(1, n + 1))
    if not all(r.is_zero() for r in residuals):
        raise NotIntegrable("lifted generator is not annihilated; the data is inconsistent")
    return LiftResult(g=g, m=m, residuals=residuals)


def twist_action(data, a):
    """Twist data by the closed 1-form sum a_j dx_j: f_j -> f_j + h a_j."""
    if len(a) != data.n:
        raise ValueError("need one component per variable")
    variables = module_variables(data.n)
    a = [aj.embed(variables) for aj in a]
    for i in range(data.n):
        for j in range(i + 1, data.n):
            lhs = a[j].differentiate(variables[i])
            rhs = a[i].differentiate(variables[j])
            if not (lhs - rhs).is_zero():
                raise NotClosed(f"d a_{j + 1}/dx{i + 1} = {lhs} differs from d a_{i + 1}/dx{j + 1} = {rhs}")
    return ModuleData(data.n, tuple(fj + aj.shift_hbar(1) for fj, aj in zip(data.f, a)))


# ---------------------------------------------------------------------------
# random generators used by tests and notebooks


def random_potential(rng, n, x_degree_cap=6, hbar_order=4, n_terms=4, coeff_range=3):
    """Sparse polynomial in x1..xn and h with no constant term."""
    variables = module_variables(n)
    terms = {}
    for _ in range(n_terms):
        deg = rng.randint(1, max(1, x_degree_cap))
        exps = [0] * n
        for _ in range(deg):
            exps[rng.randrange(n)] += 1
        k = rng.randint(0, max(hbar_order - 1, 0))
        c = Fraction(rng.randint(-coeff_range, coeff_range), rng.randint(1, 3))
        terms[(tuple(exps), k)] = terms.get((tuple(exps), k), 0) + c
    return ScalarSeries(variables, terms, x_degree_cap=x_degree_cap + 1, hbar_order=hbar_order - 1)


def random_integrable_data(rng, n, x_degree_cap=6, hbar_order=4):
    """Integrable data f_j = h d(phi)/dx_j, obtained by twisting trivial data."""
    phi = random_potential(rng, n, x_degree_cap, hbar_order)
    a = [phi.differentiate(v) for v in module_variables(n)]
    a = [aj.with_caps(x_degree_cap=x_degree_cap, hbar_order=hbar_order - 1) for aj in a]
    return twist_action(ModuleData.trivial(n, x_degree_cap, hbar_order), a)


def random_nonintegrable_data(rng, n, x_degree_cap=6, hbar_order=4):
    """Integrable data plus an antisymmetric perturbation c (x2 dx1 - x1 dx2) h."""
    if n < 2:
        raise ValueError("non-integrable data needs n >= 2")
    base = random_integrable_data(rng, n, x_degree_cap, hbar_order)
    variables = module_variables(n)
    i, j = rng.sample(range(n), 2)
    c = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))
    k = rng.randint(1, max(1, hbar_order - 1))
    fs = list(base.f)
    xi = ScalarSeries.variable(variables, variables[i], x_degree_cap=x_degree_cap, hbar_order=hbar_order)
    xj = ScalarSeries.variable(variables, variables[j], x_degree_cap=x_degree_cap, hbar_order=hbar_order)
    fs[i] = fs[i] + xj.shift_hbar(k).scale(c)
    fs[j] = fs[j] - xi.shift_hbar(k).scale(c)
    return ModuleData(n, tuple(fs))


def random_parabolic(rng, n, lo=-2, hi=2):
    g = [[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)]
    s = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            s[i][j] = s[j][i] = rng.randint(lo, hi)
    return parabolic(g, s)


def default_rng(seed=0):
    return random.Random(seed)
