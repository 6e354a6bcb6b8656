"""Exact truncated series over the rationals, and differential forms on charts.

A :class:`ScalarSeries` is a finite table of rational coefficients keyed by
``(exponents, hbar_power)``.  It carries two validity bounds: terms of total
x-degree above ``x_degree_cap`` or of hbar-power above ``hbar_order`` are
unknown and never stored.  Variables listed in ``invertible`` may carry
negative exponents (Laurent coordinates on chart overlaps).
"""

import math
from fractions import Fraction
from itertools import combinations

from . import literal
from .errors import (
    IncompatibleVariables,
    NonInvertibleImage,
    NonNilpotentConstantTerm,
    NotClosed,
    ParseError,
    UnknownVariable,
)

DEFAULT_X_CAP = 24
DEFAULT_HBAR_ORDER = 8
NEGATIVE_FLOOR = -12
MIN_HBAR_FLOOR = -2
HBAR = "h"


def _frac(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        raise TypeError("floating point coefficients are not accepted; use Fraction")
    return Fraction(c)


def sort_key(key):
    """Canonical monomial order: graded lex in variable order, then hbar power."""
    exps, k = key
    return (sum(exps), tuple(-e for e in exps), k)


class ScalarSeries:
    __slots__ = ("variables", "invertible", "terms", "x_degree_cap", "hbar_order", "min_hbar_power")

    def __init__(self, variables, terms=None, *, x_degree_cap=DEFAULT_X_CAP,
                 hbar_order=DEFAULT_HBAR_ORDER, min_hbar_power=0, invertible=()):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise IncompatibleVariables(f"repeated variable in {variables}")
        if HBAR in variables:
            raise IncompatibleVariables(f"{HBAR!r} is reserved for the deformation parameter")
        invertible = frozenset(invertible)
        if not invertible <= set(variables):
            raise UnknownVariable(f"invertible variables {sorted(invertible - set(variables))} not in {variables}")
        if min_hbar_power < MIN_HBAR_FLOOR:
            raise ValueError(f"min_hbar_power {min_hbar_power} below floor {MIN_HBAR_FLOOR}")
        self.variables = variables
        self.invertible = invertible
        self.x_degree_cap = x_degree_cap
        self.hbar_order = hbar_order
        self.min_hbar_power = min_hbar_power
        inv_idx = [v in invertible for v in variables]
        table = {}
        for (exps, k), c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != len(variables):
                raise ValueError(f"exponent {exps} does not match variables {variables}")
            if k < min_hbar_power:
                raise ValueError(f"hbar power {k} below min_hbar_power {min_hbar_power}")
            for e, inv in zip(exps, inv_idx):
                if e < 0 and (not inv or e < NEGATIVE_FLOOR):
                    raise ValueError(f"negative exponent {exps} not allowed for {variables}")
            if sum(exps) > x_degree_cap or k > hbar_order:
                continue
            c = _frac(c)
            if c:
                table[(exps, k)] = table.get((exps, k), 0) + c
        self.terms = {key: c for key, c in table.items() if c}

    # construction helpers -------------------------------------------------
    def _like(self, terms, **kw):
        opts = dict(x_degree_cap=self.x_degree_cap, hbar_order=self.hbar_order,
                    min_hbar_power=self.min_hbar_power, invertible=self.invertible)
        opts.update(kw)
        return ScalarSeries(self.variables, terms, **opts)

    @classmethod
    def constant(cls, variables, c, **kw):
        return cls(variables, {((0,) * len(tuple(variables)), 0): c}, **kw)

    @classmethod
    def zero(cls, variables, **kw):
        return cls(variables, {}, **kw)

    @classmethod
    def variable(cls, variables, name, **kw):
        variables = tuple(variables)
        if name == HBAR:
            return cls(variables, {((0,) * len(variables), 1): 1}, **kw)
        if name not in variables:
            raise UnknownVariable(f"unknown variable {name!r}; expected one of {variables}")
        exps = tuple(int(v == name) for v in variables)
        return cls(variables, {(exps, 0): 1}, **kw)

    @classmethod
    def monomial(cls, variables, exps, k=0, c=1, **kw):
        return cls(variables, {(tuple(exps), k): c}, **kw)

    def zero_like(self):
        return self._like({})

    def constant_like(self, c):
        return self._like({((0,) * len(self.variables), 0): c})

    def with_caps(self, x_degree_cap=None, hbar_order=None):
        return self._like(self.terms,
                          x_degree_cap=self.x_degree_cap if x_degree_cap is None else x_degree_cap,
                          hbar_order=self.hbar_order if hbar_order is None else hbar_order)

    # inspection -------------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: sort_key(kv[0]))

    def coefficient(self, exps, k=0):
        return self.terms.get((tuple(exps), k), Fraction(0))

    def constant_term(self):
        return self.coefficient((0,) * len(self.variables), 0)

    def lowest_hbar_power(self):
        return min((k for _, k in self.terms), default=0)

    def lowest_degree(self):
        return min((sum(e) for e, _ in self.terms), default=0)

    def hbar_powers(self):
        return sorted({k for _, k in self.terms})

    def hbar_part(self, k):
        """The coefficient of hbar^k, as a series with hbar power 0."""
        return self._like({(e, 0): c for (e, kk), c in self.terms.items() if kk == k},
                          min_hbar_power=min(0, self.min_hbar_power),
                          hbar_order=max(self.hbar_order - k, 0))

    def free_of(self, name):
        i = self.variables.index(name)
        return all(e[i] == 0 for e, _ in self.terms)

    # alignment --------------------------------------------------------------
    def embed(self, variables, invertible=()):
        """Re-express in a larger variable list (which must contain ours)."""
        variables = tuple(variables)
        if variables == self.variables and set(invertible) <= self.invertible:
            return self
        missing = [v for v in self.variables if v not in variables]
        if missing:
            raise IncompatibleVariables(f"cannot embed {self.variables} into {variables}")
        pos = [variables.index(v) for v in self.variables]
        terms = {}
        for (exps, k), c in self.terms.items():
            new = [0] * len(variables)
            for p, e in zip(pos, exps):
                new[p] = e
            terms[(tuple(new), k)] = c
        return ScalarSeries(variables, terms, x_degree_cap=self.x_degree_cap,
                            hbar_order=self.hbar_order, min_hbar_power=self.min_hbar_power,
                            invertible=self.invertible | frozenset(invertible))

    def _coerce(self, other):
        if isinstance(other, ScalarSeries):
            return other
        if isinstance(other, (int, Fraction)):
            return self._like({((0,) * len(self.variables), 0): other},
                              x_degree_cap=max(self.x_degree_cap, 0) + 10**6,
                              hbar_order=self.hbar_order + 10**6, min_hbar_power=0)
        return NotImplemented

    @staticmethod
    def align(a, b):
        if a.variables == b.variables:
            if a.invertible == b.invertible:
                return a, b
            inv = a.invertible | b.invertible
            return a.embed(a.variables, inv), b.embed(b.variables, inv)
        if set(a.variables) <= set(b.variables):
            inv = a.invertible | b.invertible
            return a.embed(b.variables, inv), b.embed(b.variables, inv)
        if set(b.variables) <= set(a.variables):
            inv = a.invertible | b.invertible
            return a.embed(a.variables, inv), b.embed(a.variables, inv)
        raise IncompatibleVariables(f"variables {a.variables} and {b.variables} are incompatible")

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = ScalarSeries.align(self, other)
        terms = dict(a.terms)
        for key, c in b.terms.items():
            terms[key] = terms.get(key, 0) + c
        return a._like(terms, x_degree_cap=min(a.x_degree_cap, b.x_degree_cap),
                       hbar_order=min(a.hbar_order, b.hbar_order),
                       min_hbar_power=min(a.min_hbar_power, b.min_hbar_power))

    __radd__ = __add__

    def __neg__(self):
        return self._like({key: -c for key, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = _frac(c)
        return self._like({key: c * v for key, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, ScalarSeries):
            return NotImplemented
        a, b = ScalarSeries.align(self, other)
        da, db = min(a.lowest_degree(), 0), min(b.lowest_degree(), 0)
        ma, mb = min(a.lowest_hbar_power(), 0), min(b.lowest_hbar_power(), 0)
        cap = min(a.x_degree_cap + db, b.x_degree_cap + da)
        order = min(a.hbar_order + mb, b.hbar_order + ma)
        floor = max(MIN_HBAR_FLOOR, a.min_hbar_power + b.min_hbar_power)
        terms = {}
        b_items = list(b.terms.items())
        for (ea, ka), ca in a.terms.items():
            sa = sum(ea)
            for (eb, kb), cb in b_items:
                k = ka + kb
                if k > order or sa + sum(eb) > cap:
                    continue
                key = (tuple(x + y for x, y in zip(ea, eb)), k)
                terms[key] = terms.get(key, 0) + ca * cb
        return a._like(terms, x_degree_cap=cap, hbar_order=order, min_hbar_power=floor)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = self.constant_like(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def shift_hbar(self, k):
        """Multiply by hbar^k (k may be negative); validity shifts with it."""
        return self._like({(e, kk + k): c for (e, kk), c in self.terms.items()},
                          hbar_order=self.hbar_order + k,
                          min_hbar_power=max(MIN_HBAR_FLOOR, min(self.min_hbar_power + k, 0)))

    def truncate(self, x_degree_cap=None, hbar_order=None):
        return self.with_caps(
            x_degree_cap=self.x_degree_cap if x_degree_cap is None else min(x_degree_cap, self.x_degree_cap),
            hbar_order=self.hbar_order if hbar_order is None else min(hbar_order, self.hbar_order))

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        try:
            return (self - other).is_zero()
        except IncompatibleVariables:
            return False

    __hash__ = None

    def inverse(self):
        """Multiplicative inverse of a unit.

        A unit is either a series with nonzero constant term, or a Laurent
        monomial in invertible variables times such a series (``s + s^2``).
        """
        if not self.terms:
            raise NonInvertibleImage("zero is not invertible")
        zero = (0,) * len(self.variables)
        candidates = [(e, k) for (e, k) in self.terms if k == 0]
        if not candidates:
            raise NonInvertibleImage(f"{self} has no hbar^0 part and is not invertible")
        low = min(sum(e) for e, _ in candidates)
        leading = [e for e, _ in candidates if sum(e) == low]
        if len(leading) != 1:
            raise NonInvertibleImage(f"{self} has no unique leading monomial")
        lead = leading[0]
        if lead != zero:
            for v, e in zip(self.variables, lead):
                if e and v not in self.invertible:
                    raise NonInvertibleImage(f"leading monomial of {self} involves non-invertible {v}")
        c = self.terms[(lead, 0)]
        inv_lead = self._like({(tuple(-e for e in lead), 0): 1 / c},
                              x_degree_cap=self.x_degree_cap + 10**6, hbar_order=self.hbar_order + 10**6)
        rest = self._like({key: v for key, v in self.terms.items() if key != (lead, 0)})
        rest = rest.with_caps(x_degree_cap=self.x_degree_cap - low)
        r = rest * self._like({(tuple(-e for e in lead), 0): 1 / c},
                              x_degree_cap=self.x_degree_cap + 10**6, hbar_order=self.hbar_order + 10**6)
        for (e, k) in r.terms:
            if sum(e) <= 0 and k <= 0:
                raise NonInvertibleImage(f"{self} is not a unit times an invertible monomial")
        # 1/(1+r) = sum (-r)^j; each power raises degree or hbar power
        total = r.constant_like(1)
        term = r.constant_like(1)
        bound = r.x_degree_cap + r.hbar_order - min(r.lowest_degree(), 0) + 2
        for _ in range(bound + 1):
            term = term * (-r)
            if term.is_zero():
                break
            total = total + term
        out = total * inv_lead
        return out.with_caps(x_degree_cap=min(out.x_degree_cap, self.x_degree_cap - 2 * low),
                             hbar_order=min(out.hbar_order, self.hbar_order))

    # calculus ---------------------------------------------------------------
    def differentiate(self, var):
        """Formal partial derivative.  The x-cap drops by one because unknown
        terms of degree cap+1 differentiate into degree cap."""
        if var not in self.variables:
            raise UnknownVariable(f"unknown variable {var!r}; expected one of {self.variables}")
        i = self.variables.index(var)
        terms = {}
        for (e, k), c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                terms[(tuple(ne), k)] = c * e[i]
        return self._like(terms, x_degree_cap=self.x_degree_cap - 1)

    def partial(self, multi_index):
        """Apply d^alpha for a multi-index over ``self.variables``."""
        out = self
        for v, n in zip(self.variables, multi_index):
            for _ in range(n):
                out = out.differentiate(v)
        return out

    # presentation -----------------------------------------------------------
    def _monomial_str(self, exps, k):
        parts = []
        for v, e in zip(self.variables, exps):
            if e == 1:
                parts.append(v)
            elif e:
                parts.append(f"{v}^{e}")
        if k == 1:
            parts.append(HBAR)
        elif k:
            parts.append(f"{HBAR}^{k}")
        return " ".join(parts)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for (exps, k), c in self.items():
            mono = self._monomial_str(exps, k)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if mono:
                coef = "" if mag == 1 else f"{mag} "
                body = coef + mono
            else:
                body = str(mag)
            out.append((sign, body))
        text = ("-" if out[0][0] == "-" else "") + out[0][1]
        for sign, body in out[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"ScalarSeries({self.variables}, '{self}', x_cap={self.x_degree_cap}, hbar_order={self.hbar_order})"

    def to_terms(self):
        """Canonical JSON list of ``[exponents, hbar_power, numerator, denominator]``."""
        return [[list(e), k, c.numerator, c.denominator] for (e, k), c in self.items()]

    def to_json(self):
        return {
            "variables": list(self.variables),
            "invertible": sorted(self.invertible),
            "x_degree_cap": self.x_degree_cap,
            "hbar_order": self.hbar_order,
            "min_hbar_power": self.min_hbar_power,
            "terms": self.to_terms(),
        }

    @classmethod
    def from_json(cls, data):
        terms = {(tuple(e), k): Fraction(n, d) for e, k, n, d in data["terms"]}
        return cls(data["variables"], terms, x_degree_cap=data.get("x_degree_cap", DEFAULT_X_CAP),
                   hbar_order=data.get("hbar_order", DEFAULT_HBAR_ORDER),
                   min_hbar_power=data.get("min_hbar_power", min([k for _, k in terms] + [0])),
                   invertible=data.get("invertible", ()))


class _SeriesRing:
    """Adapter that lets :func:`literal.evaluate` build ScalarSeries."""

    def __init__(self, variables, **opts):
        self.variables = tuple(variables)
        self.opts = opts

    def const(self, c):
        return ScalarSeries.constant(self.variables, c, **self.opts)

    def var(self, name):
        if name == HBAR:
            opts = dict(self.opts)
            return ScalarSeries(self.variables, {((0,) * len(self.variables), 1): 1}, **opts)
        if name not in self.variables:
            raise UnknownVariable(f"unknown variable {name!r}; expected one of {self.variables}")
        return ScalarSeries.variable(self.variables, name, **self.opts)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def scale(self, a, c):
        return a.scale(c)

    def pow(self, a, n):
        if n < 0 and len(a.terms) == 1:
            (e, k), c = next(iter(a.terms.items()))
            if k == 0:
                bad = [v for v, x in zip(a.variables, e) if x and v not in a.invertible]
                if bad:
                    raise ParseError(f"negative power of non-invertible variable {bad[0]!r}")
                return a._like({(tuple(x * n for x in e), 0): Fraction(c) ** n})
            if not any(e):
                lo = k * n
                return a._like({(e, lo): Fraction(c) ** n}, min_hbar_power=max(MIN_HBAR_FLOOR, min(lo, 0)))
        return a ** n


def literal_names(text):
    """Variable names appearing in a literal, in order of first appearance."""
    names = []
    for kind, val in literal.tokenize(text):
        if kind == "name" and val != HBAR and val not in names:
            names.append(val)
    return names


def parse_series(text, variables=None, *, invertible=(), x_degree_cap=DEFAULT_X_CAP,
                 hbar_order=DEFAULT_HBAR_ORDER, min_hbar_power=None):
    """Parse a series literal such as ``"3/2 x1^2 y2 h - x1"``."""
    if variables is None:
        variables = literal_names(text)
    if min_hbar_power is None:
        min_hbar_power = MIN_HBAR_FLOOR
    ring = _SeriesRing(variables, invertible=invertible, x_degree_cap=x_degree_cap,
                       hbar_order=hbar_order, min_hbar_power=min_hbar_power)
    out = literal.evaluate(literal.parse(text), ring)
    floor = max(MIN_HBAR_FLOOR, min(out.lowest_hbar_power(), 0))
    return out._like(out.terms, min_hbar_power=floor)


# ---------------------------------------------------------------------------
# operations from the contract


def differentiate(f, var):
    return f.differentiate(var)


def integrate_path(gs, variables):
    """Potential G with dG/dx_j = g_j, no constant term and no pure-hbar terms.

    Uses the radial homotopy formula, so G lies in the ideal generated by
    the variables.  Raises NotClosed if some mixed partials disagree.
    """
    variables = tuple(variables)
    if len(gs) != len(variables):
        raise ValueError("need one component per variable")
    if not gs:
        raise ValueError("empty gradient")
    base = gs[0]
    for g in gs[1:]:
        base, _ = ScalarSeries.align(base, g)
    gs = [g.embed(base.variables, base.invertible) for g in gs]
    for v in variables:
        if v not in base.variables:
            raise UnknownVariable(f"unknown variable {v!r}")
    for g in gs:
        for (e, _), _c in g.terms.items():
            if any(x < 0 for x in e):
                raise ValueError("integrate_path needs polynomial (non-Laurent) components")
    for i, j in combinations(range(len(variables)), 2):
        lhs = gs[j].differentiate(variables[i])
        rhs = gs[i].differentiate(variables[j])
        if not (lhs - rhs).is_zero():
            raise NotClosed(
                f"d{variables[i]} g_{variables[j]} = {lhs} differs from d{variables[j]} g_{variables[i]} = {rhs}")
    terms = {}
    cap = min(g.x_degree_cap for g in gs) + 1
    for j, v in enumerate(variables):
        pos = base.variables.index(v)
        for (e, k), c in gs[j].terms.items():
            ne = list(e)
            ne[pos] += 1
            key = (tuple(ne), k)
            terms[key] = terms.get(key, 0) + c / (sum(e) + 1)
    return ScalarSeries(base.variables, terms, x_degree_cap=cap,
                        hbar_order=min(g.hbar_order for g in gs),
                        min_hbar_power=min(g.min_hbar_power for g in gs), invertible=base.invertible)


def exp_series(g):
    """exp(g) for g nilpotent modulo the caps (no constant term)."""
    zero = (0,) * len(g.variables)
    if g.coefficient(zero, 0):
        raise NonNilpotentConstantTerm(f"exp needs zero constant term, got {g.constant_term()}")
    for (e, k) in g.terms:
        if any(x < 0 for x in e) or k < 0 or (sum(e) == 0 and k == 0):
            raise NonNilpotentConstantTerm(f"exp argument {g} is not nilpotent modulo the caps")
    total = g.constant_like(1)
    term = g.constant_like(1)
    for n in range(1, g.x_degree_cap + g.hbar_order + 2):
        term = (term * g).scale(Fraction(1, n))
        if term.is_zero():
            break
        total = total + term
    return total


def substitute(f, assignment, target_variables=None, *, invertible=None,
               x_degree_cap=None, hbar_order=None):
    """Compose ``f`` with ``assignment`` (variable name -> ScalarSeries).

    Variables of ``f`` missing from the assignment must exist in the target
    ring and map to themselves.  Negative exponents require the image to be
    a unit (see :meth:`ScalarSeries.inverse`).  Passing ``x_degree_cap``
    asserts that ``f`` is exact below that degree; Laurent images can lower
    degrees, so no cap can be derived from a truncated ``f`` in general.
    """
    images = dict(assignment)
    if target_variables is None:
        probe = next(iter(images.values()), None)
        target_variables = probe.variables if probe is not None else f.variables
    target_variables = tuple(target_variables)
    if invertible is None:
        invertible = frozenset().union(*[im.invertible for im in images.values()]) if images else f.invertible
        invertible = frozenset(v for v in invertible if v in target_variables)
        invertible |= frozenset(v for v in f.invertible if v in target_variables and v not in images)
    cap = f.x_degree_cap if x_degree_cap is None else x_degree_cap
    order = f.hbar_order if hbar_order is None else hbar_order
    opts = dict(x_degree_cap=cap, hbar_order=order, invertible=invertible,
                min_hbar_power=max(MIN_HBAR_FLOOR, min(f.min_hbar_power, 0)))
    for v in f.variables:
        if v in images:
            continue
        if v not in target_variables:
            raise UnknownVariable(f"no image for variable {v!r}")
        images[v] = ScalarSeries.variable(target_variables, v, **opts)
    resolved = {}
    for v in f.variables:
        im = images[v]
        if not isinstance(im, ScalarSeries):
            im = ScalarSeries.constant(target_variables, im, **opts)
        resolved[v] = im.embed(target_variables, invertible)
    powers = {}

    def power(v, e):
        key = (v, e)
        if key not in powers:
            if e == 0:
                powers[key] = ScalarSeries.constant(target_variables, 1, **opts)
            elif e > 0:
                powers[key] = power(v, e - 1) * resolved[v] if e > 1 else resolved[v]
            else:
                if (v, -1) not in powers:
                    try:
                        powers[(v, -1)] = resolved[v].inverse()
                    except NonInvertibleImage as exc:
                        raise NonInvertibleImage(f"image of {v} is not invertible: {exc}") from None
                powers[key] = power(v, e + 1) * powers[(v, -1)] if e < -1 else powers[(v, -1)]
        return powers[key]

    total = ScalarSeries.zero(target_variables, **opts)
    for (e, k), c in f.terms.items():
        term = ScalarSeries(target_variables, {((0,) * len(target_variables), k): c}, **{**opts, "hbar_order": order})
        for v, x in zip(f.variables, e):
            if x:
                term = term * power(v, x)
        total = total + term
    return total.with_caps(x_degree_cap=min(total.x_degree_cap, cap), hbar_order=min(total.hbar_order, order))


# ---------------------------------------------------------------------------
# differential forms


def _canonical_index(idx):
    """Sort an index tuple; returns (sign, sorted) or (0, None) on repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class DifferentialForm:
    """A 0-, 1- or 2-form on a chart with ScalarSeries coefficients.

    Components are keyed by sorted tuples of variable names ordered by their
    position in ``variables``.
    """

    __slots__ = ("variables", "degree", "components", "invertible")

    def __init__(self, variables, degree, components=None, invertible=()):
        variables = tuple(variables)
        if degree not in (0, 1, 2):
            raise ValueError("only forms of degree 0, 1, 2 are supported")
        self.variables = variables
        self.degree = degree
        self.invertible = frozenset(invertible)
        comps = {}
        order = {v: i for i, v in enumerate(variables)}
        for key, coeff in (components or {}).items():
            if isinstance(key, str):
                key = tuple(s.strip() for s in key.split(",") if s.strip()) if key else ()
            key = tuple(key)
            if len(key) != degree:
                raise ValueError(f"component {key} has wrong length for a {degree}-form")
            for v in key:
                if v not in order:
                    raise UnknownVariable(f"unknown variable {v!r} in form component")
            sign, skey = _canonical_index([order[v] for v in key])
            if sign == 0:
                continue
            if not isinstance(coeff, ScalarSeries):
                coeff = ScalarSeries.constant(variables, coeff, invertible=self.invertible)
            coeff = coeff.embed(variables, self.invertible)
            self.invertible |= coeff.invertible
            name_key = tuple(variables[i] for i in skey)
            comps[name_key] = comps[name_key] + coeff.scale(sign) if name_key in comps else coeff.scale(sign)
        self.components = {k: c for k, c in comps.items() if not c.is_zero()}

    @classmethod
    def zero(cls, variables, degree, invertible=()):
        return cls(variables, degree, {}, invertible)

    @classmethod
    def parse(cls, variables, degree, spec, invertible=(), **opts):
        """Build from ``{"t,p": "1"}`` style component literals."""
        comps = {}
        for key, text in spec.items():
            comps[key] = text if isinstance(text, ScalarSeries) else parse_series(
                str(text), variables, invertible=invertible, **opts)
        return cls(variables, degree, comps, invertible)

    def component(self, *names):
        order = {v: i for i, v in enumerate(self.variables)}
        sign, skey = _canonical_index([order[v] for v in names])
        if sign == 0:
            return ScalarSeries.zero(self.variables, invertible=self.invertible)
        key = tuple(self.variables[i] for i in skey)
        c = self.components.get(key)
        if c is None:
            return ScalarSeries.zero(self.variables, invertible=self.invertible)
        return c.scale(sign)

    def is_zero(self):
        return not self.components

    def _check(self, other):
        if not isinstance(other, DifferentialForm):
            raise TypeError("expected a DifferentialForm")
        if other.variables != self.variables or other.degree != self.degree:
            raise IncompatibleVariables("forms live on different charts or have different degrees")

    def __add__(self, other):
        self._check(other)
        comps = dict(self.components)
        for k, c in other.components.items():
            comps[k] = comps[k] + c if k in comps else c
        return DifferentialForm(self.variables, self.degree, comps, self.invertible | other.invertible)

    def __neg__(self):
        return DifferentialForm(self.variables, self.degree,
                                {k: -c for k, c in self.components.items()}, self.invertible)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if isinstance(c, ScalarSeries):
            return DifferentialForm(self.variables, self.degree,
                                    {k: v * c for k, v in self.components.items()}, self.invertible | c.invertible)
        return DifferentialForm(self.variables, self.degree,
                                {k: v.scale(c) for k, v in self.components.items()}, self.invertible)

    def __eq__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        try:
            return (self - other).is_zero()
        except IncompatibleVariables:
            return False

    __hash__ = None

    def d(self):
        """Exterior derivative; None when it would exceed the chart dimension."""
        if self.degree + 1 > len(self.variables) or self.degree == 2:
            if len(self.variables) > 2 and self.components:
                raise ValueError("3-forms are not represented")
            return None
        comps = {}
        for key, c in self.components.items():
            for v in self.variables:
                if v in key:
                    continue
                dc = c.differentiate(v)
                if dc.is_zero():
                    continue
                comps.setdefault((v,) + key, []).append(dc)
        if self.degree == 0 and not self.components:
            return DifferentialForm(self.variables, 1, {}, self.invertible)
        out = {}
        for key, parts in comps.items():
            total = parts[0]
            for p in parts[1:]:
                total = total + p
            out[key] = total
        return DifferentialForm(self.variables, self.degree + 1, out, self.invertible)

    def is_closed(self):
        if self.degree == 2:
            return self._d2_is_zero()
        dd = self.d()
        return dd is None or dd.is_zero()

    def _d2_is_zero(self):
        for a, b, c in combinations(self.variables, 3):
            total = (self.component(b, c).differentiate(a) - self.component(a, c).differentiate(b)
                     + self.component(a, b).differentiate(c))
            if not total.is_zero():
                return False
        return True

    def interior(self, field):
        """Contract with a vector field given as ``{variable: ScalarSeries}``."""
        if self.degree == 0:
            raise ValueError("cannot contract a 0-form")
        comps = {}
        for key, c in self.components.items():
            if self.degree == 1:
                comp = field.get(key[0])
                if comp is not None:
                    comps.setdefault((), []).append(c * comp)
            else:
                a, b = key
                if field.get(a) is not None:
                    comps.setdefault((b,), []).append(c * field[a])
                if field.get(b) is not None:
                    comps.setdefault((a,), []).append(-(c * field[b]))
        out = {}
        for key, parts in comps.items():
            total = parts[0]
            for p in parts[1:]:
                total = total + p
            out[key] = total
        return DifferentialForm(self.variables, self.degree - 1, out, self.invertible)

    def pullback(self, assignment, target_variables, invertible=(), **opts):
        """Pull back along a map whose components are ``assignment`` (source
        variable -> series in the target variables)."""
        target_variables = tuple(target_variables)
        images = {}
        for v in self.variables:
            if v in assignment:
                images[v] = assignment[v]
            elif v in target_variables:
                images[v] = ScalarSeries.variable(target_variables, v, invertible=invertible)
            else:
                raise UnknownVariable(f"no image for {v!r}")
        jac = {v: {w: images[v].embed(target_variables, invertible).differentiate(w) for w in target_variables}
               for v in self.variables}
        comps = {}
        for key, c in self.components.items():
            pc = substitute(c, images, target_variables, invertible=frozenset(invertible) or None, **opts)
            if self.degree == 0:
                comps[()] = pc
            elif self.degree == 1:
                for w in target_variables:
                    comps[(w,)] = comps[(w,)] + pc * jac[key[0]][w] if (w,) in comps else pc * jac[key[0]][w]
            else:
                a, b = key
                for w1, w2 in combinations(target_variables, 2):
                    minor = jac[a][w1] * jac[b][w2] - jac[a][w2] * jac[b][w1]
                    term = pc * minor
                    comps[(w1, w2)] = comps[(w1, w2)] + term if (w1, w2) in comps else term
        inv = frozenset(invertible)
        for c in comps.values():
            inv |= c.invertible
        return DifferentialForm(target_variables, self.degree, comps, inv)

    def to_json(self):
        return {",".join(k): str(c) for k, c in sorted(self.components.items())}

    def __str__(self):
        if not self.components:
            return "0"
        parts = []
        for key, c in sorted(self.components.items()):
            basis = "^".join("d" + v for v in key)
            parts.append(f"({c}) {basis}" if basis else f"({c})")
        return " + ".join(parts)

    def __repr__(self):
        return f"DifferentialForm({self.degree}, {self})"


def binomial(n, k):
    return math.comb(n, k)


# ---------------------------------------------------------------------------
# primitives of closed forms by exact linear algebra


def monomial_box(variables, invertible, supports, pad=1, floor=NEGATIVE_FLOOR):
    """All exponent vectors in the bounding box of ``supports`` widened by ``pad``.

    Non-invertible variables keep non-negative exponents.
    """
    from itertools import product as _product

    variables = tuple(variables)
    supports = [tuple(s) for s in supports] or [(0,) * len(variables)]
    ranges = []
    for i, v in enumerate(variables):
        lo = min(s[i] for s in supports) - pad
        hi = max(s[i] for s in supports) + pad
        lo = max(lo, floor) if v in invertible else max(lo, 0)
        ranges.append(range(lo, hi + 1))
    return [tuple(e) for e in _product(*ranges)]


def solve_primitive(form, pad=1, x_degree_cap=None):
    """Find a form ``lam`` of one degree lower with ``d lam == form``.

    Searches Laurent monomials in a box around the support of ``form``.
    Returns ``None`` if no primitive exists in that space.  Only hbar-free
    coefficients are supported.
    """
    from .errors import NoSolution
    from .linalg import solve_affine

    if form.degree == 0:
        raise ValueError("0-forms have no primitive")
    variables = form.variables
    inv = form.invertible
    supports = [e for c in form.components.values() for (e, _k) in c.terms]
    hks = {k for c in form.components.values() for (_e, k) in c.terms}
    if form.is_zero():
        return DifferentialForm.zero(variables, form.degree - 1, inv)
    box = monomial_box(variables, inv, supports, pad)
    if form.degree == 1:
        slots = [()]
    else:
        slots = [(v,) for v in variables]
    unknowns = [(slot, e, k) for slot in slots for e in box for k in sorted(hks)]
    cap = max(sum(e) for e in box) + 2 if x_degree_cap is None else x_degree_cap
    opts = dict(x_degree_cap=cap, hbar_order=max(hks) + 1, invertible=inv,
                min_hbar_power=max(MIN_HBAR_FLOOR, min(min(hks), 0)))
    columns = []
    for slot, e, k in unknowns:
        piece = DifferentialForm(variables, form.degree - 1,
                                 {slot: ScalarSeries(variables, {(e, k): 1}, **opts)}, inv).d()
        columns.append(piece)
    index = {}
    rows = {}

    def row_for(key):
        if key not in index:
            index[key] = len(index)
            rows[index[key]] = {}
        return index[key]

    for j, piece in enumerate(columns):
        for comp, c in piece.components.items():
            for mono, val in c.terms.items():
                rows[row_for((comp, mono))][j] = val
    rhs = {}
    for comp, c in form.components.items():
        for mono, val in c.terms.items():
            rhs[row_for((comp, mono))] = val
    ordered_rows = [rows[i] for i in range(len(index))]
    b = [rhs.get(i, 0) for i in range(len(index))]
    try:
        sol, _kernel = solve_affine(ordered_rows, b, len(unknowns))
    except NoSolution:
        return None
    comps = {}
    for (slot, e, k), c in zip(unknowns, sol):
        if c:
            comps.setdefault(slot, {})[(e, k)] = c
    return DifferentialForm(variables, form.degree - 1,
                            {slot: ScalarSeries(variables, t, **opts) for slot, t in comps.items()}, inv)
