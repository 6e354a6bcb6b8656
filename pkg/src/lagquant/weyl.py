"""The homogeneous Weyl algebra in normal order, and the sp(2n) embedding.

Elements are finite sums of normal-ordered monomials ``x^a y^b h^k`` with
all x factors to the left of all y factors and ``[y_j, x_i] = delta_ij h``.
Powers ``k >= -1`` are allowed, so elements of ``h^-1 D`` are represented as
well.  Every element carries ``hbar_order``: coefficients of ``h^k`` with
``k > hbar_order`` are unknown.
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product

from . import literal
from .coeffring import ScalarSeries, _frac
from .errors import (
    NotSymplectic,
    ParseError,
    RankMismatch,
    UnknownVariable,
    ValidityExhausted,
    ZeroElement,
)

DEFAULT_HBAR_ORDER = 8
EXACT = 10**6  # validity used for exact literals such as sigma images

_MAX_TABLE = 12
# REORDER[b][c][k] = C(b,k) C(c,k) k!, the coefficient of h^k x^(c-k) y^(b-k) in y^b x^c
REORDER = [[[math.comb(b, k) * math.comb(c, k) * math.factorial(k) for k in range(min(b, c) + 1)]
            for c in range(_MAX_TABLE + 1)] for b in range(_MAX_TABLE + 1)]


def reorder_coefficient(b, c, k):
    if b <= _MAX_TABLE and c <= _MAX_TABLE:
        return REORDER[b][c][k]
    return math.comb(b, k) * math.comb(c, k) * math.factorial(k)


def _key_order(key):
    a, b, k = key
    return (sum(a) + sum(b) + 2 * k, tuple(-e for e in a), tuple(-e for e in b), k)


class WeylElement:
    __slots__ = ("n", "terms", "hbar_order")

    def __init__(self, n, terms=None, hbar_order=DEFAULT_HBAR_ORDER):
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = n
        self.hbar_order = hbar_order
        table = {}
        for (a, b, k), c in (terms or {}).items():
            a, b = tuple(a), tuple(b)
            if len(a) != n or len(b) != n:
                raise RankMismatch(f"monomial {(a, b)} does not have {n} pairs")
            c = _frac(c)
            if not c:
                continue
            if any(e < 0 for e in a + b):
                raise ValueError("negative exponent in a Weyl monomial")
            if k < -1:
                raise ValueError(f"hbar power {k} below -1")
            if k > hbar_order:
                continue
            table[(a, b, k)] = table.get((a, b, k), 0) + c
        self.terms = {key: c for key, c in table.items() if c}

    # constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, n, hbar_order=EXACT):
        return cls(n, {}, hbar_order)

    @classmethod
    def constant(cls, n, c, hbar_order=EXACT):
        z = (0,) * n
        return cls(n, {(z, z, 0): c}, hbar_order)

    @classmethod
    def hbar(cls, n, power=1, hbar_order=EXACT):
        z = (0,) * n
        return cls(n, {(z, z, power): 1}, hbar_order)

    @classmethod
    def x(cls, n, i, hbar_order=EXACT):
        """Generator x_i (1-based index)."""
        a = tuple(int(j == i - 1) for j in range(n))
        return cls(n, {(a, (0,) * n, 0): 1}, hbar_order)

    @classmethod
    def y(cls, n, i, hbar_order=EXACT):
        """Generator y_i (1-based index)."""
        b = tuple(int(j == i - 1) for j in range(n))
        return cls(n, {((0,) * n, b, 0): 1}, hbar_order)

    @classmethod
    def generators(cls, n, hbar_order=EXACT):
        """The list x1..xn, y1..yn."""
        return [cls.x(n, i, hbar_order) for i in range(1, n + 1)] + \
               [cls.y(n, i, hbar_order) for i in range(1, n + 1)]

    def _like(self, terms, hbar_order=None):
        return WeylElement(self.n, terms, self.hbar_order if hbar_order is None else hbar_order)

    def with_order(self, hbar_order):
        return self._like(self.terms, hbar_order)

    # inspection -----------------------------------------------------------
    @property
    def is_plain(self):
        return all(k >= 0 for (_, _, k) in self.terms)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def lowest_hbar_power(self):
        return min((k for (_, _, k) in self.terms), default=0)

    def min_degree(self):
        if not self.terms:
            return None
        return min(sum(a) + sum(b) + 2 * k for (a, b, k) in self.terms)

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: _key_order(kv[0]))

    def coefficient(self, a, b, k=0):
        return self.terms.get((tuple(a), tuple(b), k), Fraction(0))

    # arithmetic -----------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, WeylElement):
            raise TypeError("expected a WeylElement")
        if other.n != self.n:
            raise RankMismatch(f"rank {self.n} differs from rank {other.n}")

    def _coerce(self, other):
        if isinstance(other, (int, Fraction)):
            return WeylElement.constant(self.n, other)
        if isinstance(other, WeylElement):
            self._check(other)
            return other
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, 0) + c
        return self._like(terms, min(self.hbar_order, other.hbar_order))

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

    def shift_hbar(self, k):
        """Multiply by h^k."""
        return self._like({(a, b, kk + k): c for (a, b, kk), c in self.terms.items()},
                          self.hbar_order + k)

    def _raw_product(self, other, order):
        n = self.n
        out = {}
        for (a, b, k1), c1 in self.terms.items():
            for (cc, d, k2), c2 in other.terms.items():
                ranges = [range(min(bi, ci) + 1) for bi, ci in zip(b, cc)]
                for ks in product(*ranges):
                    k = k1 + k2 + sum(ks)
                    if k > order:
                        continue
                    coef = c1 * c2
                    for i in range(n):
                        coef *= reorder_coefficient(b[i], cc[i], ks[i])
                    key = (tuple(a[i] + cc[i] - ks[i] for i in range(n)),
                           tuple(b[i] + d[i] - ks[i] for i in range(n)), k)
                    out[key] = out.get(key, 0) + coef
        return out

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, WeylElement):
            return NotImplemented
        return weyl_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, e):
        if not isinstance(e, int) or e < 0:
            return NotImplemented
        out = WeylElement.constant(self.n, 1)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, WeylElement) or other.n == self.n else None
        if other is None or other is NotImplemented:
            return False if other is None else other
        return (self - other).is_zero()

    __hash__ = None

    def drop_central(self):
        """Canonical representative modulo h^-1 k: remove the h^-1 constant."""
        z = (0,) * self.n
        return self._like({key: c for key, c in self.terms.items() if key != (z, z, -1)})

    def symbol(self, variables=None):
        """The h^0 part as a commutative polynomial in x1..xn, y1..yn."""
        variables = tuple(variables or weyl_variables(self.n))
        terms = {(a + b, 0): c for (a, b, k), c in self.terms.items() if k == 0}
        return ScalarSeries(variables, terms, x_degree_cap=10**6, hbar_order=0)

    # presentation -----------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (a, b, k), c in self.items():
            factors = []
            for i, e in enumerate(a):
                if e:
                    factors.append(f"x{i + 1}" + (f"^{e}" if e > 1 else ""))
            for i, e in enumerate(b):
                if e:
                    factors.append(f"y{i + 1}" + (f"^{e}" if e > 1 else ""))
            if k:
                factors.append("h" + (f"^{k}" if k != 1 else ""))
            mag = abs(c)
            mono = " ".join(factors)
            body = (mono if mag == 1 else f"{mag} {mono}") if mono else str(mag)
            parts.append(("-" if c < 0 else "+", body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"WeylElement(n={self.n}, '{self}', hbar_order={self.hbar_order})"

    def to_json(self):
        return {
            "n": self.n,
            "hbar_order": self.hbar_order,
            "terms": [[list(a), list(b), k, c.numerator, c.denominator] for (a, b, k), c in self.items()],
        }

    @classmethod
    def from_json(cls, data):
        terms = {(tuple(a), tuple(b), k): Fraction(p, q) for a, b, k, p, q in data["terms"]}
        return cls(data["n"], terms, data.get("hbar_order", DEFAULT_HBAR_ORDER))


def weyl_variables(n):
    return [f"x{i}" for i in range(1, n + 1)] + [f"y{i}" for i in range(1, n + 1)]


def _validity(u, v, gain=0):
    mu = min(u.lowest_hbar_power(), 0)
    mv = min(v.lowest_hbar_power(), 0)
    return min(u.hbar_order + gain + mv, v.hbar_order + gain + mu)


def _finish(n, terms, order):
    if order < -1:
        raise ValidityExhausted(f"result is only valid to h^{order}, below the representable range")
    out = WeylElement(n, terms, order)
    low = out.lowest_hbar_power()
    if order < -1 or (out.terms and order < low):
        raise ValidityExhausted(f"result is only valid to h^{order}, below its lowest power h^{low}")
    return out


def weyl_mul(u, v):
    """Normal-ordered product."""
    u._check(v)
    order = _validity(u, v)
    return _finish(u.n, u._raw_product(v, order), order)


def weyl_bracket(u, v):
    """Commutator uv - vu.  The leading reordering terms cancel, so the
    result is valid one h-order further than the plain product."""
    u._check(v)
    order = _validity(u, v, gain=1)
    uv = u._raw_product(v, order)
    for key, c in v._raw_product(u, order).items():
        uv[key] = uv.get(key, 0) - c
    return _finish(u.n, uv, order)


def filtration_degree(u):
    """Minimum of |a| + |b| + 2k over the monomials of a plain element."""
    if u.is_zero():
        raise ZeroElement("the zero element has no filtration degree")
    if not u.is_plain:
        raise ValueError("filtration degree is defined for elements of D (no h^-1 terms)")
    return u.min_degree()


# ---------------------------------------------------------------------------
# parsing


_NAME = re.compile(r"^([xy])([1-9][0-9]*)$")


class _WeylRing:
    def __init__(self, n, hbar_order):
        self.n = n
        self.hbar_order = hbar_order

    def const(self, c):
        return WeylElement.constant(self.n, c, self.hbar_order)

    def var(self, name):
        if name == "h":
            return WeylElement.hbar(self.n, 1, self.hbar_order)
        m = _NAME.match(name)
        if not m or int(m.group(2)) > self.n:
            raise UnknownVariable(f"unknown Weyl generator {name!r} for n={self.n}")
        i = int(m.group(2))
        return (WeylElement.x if m.group(1) == "x" else WeylElement.y)(self.n, i, self.hbar_order)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return weyl_mul(a, b)

    def scale(self, a, c):
        return a.scale(c)

    def pow(self, a, e):
        if e < 0:
            z = (0,) * self.n
            if len(a.terms) == 1:
                (aa, bb, k), c = next(iter(a.terms.items()))
                if aa == z and bb == z:
                    return WeylElement(self.n, {(z, z, k * e): Fraction(c) ** e}, self.hbar_order)
            raise ParseError("only h may carry a negative exponent in a Weyl literal")
        return a ** e


def infer_rank(text):
    n = 0
    for kind, val in literal.tokenize(text):
        if kind == "name":
            m = _NAME.match(val)
            if m:
                n = max(n, int(m.group(2)))
            elif val != "h":
                raise UnknownVariable(f"unknown Weyl generator {val!r}")
    return n


def parse_weyl(text, n=None, hbar_order=DEFAULT_HBAR_ORDER):
    """Parse a literal such as ``"y1^2 x1 + 1/2 h"``; factor order matters."""
    if n is None:
        n = max(infer_rank(text), 1)
    # literals are exact; parse without truncation, then cut to the requested order
    return literal.evaluate(literal.parse(text), _WeylRing(n, EXACT)).with_order(hbar_order)


# ---------------------------------------------------------------------------
# sp(2n)


class SpMatrix:
    """A 2n x 2n rational matrix acting on span(x1..xn, y1..yn).

    Column convention: ``a(e_j) = sum_i a[i][j] e_i`` with basis order
    ``(x1..xn, y1..yn)``.  Blocks are ``[[g, h], [c, d]]``; the symplectic
    condition is ``d = -g^T`` with ``h`` and ``c`` symmetric.
    """

    __slots__ = ("n", "entries")

    def __init__(self, entries, check=True):
        rows = [[_frac(v) for v in row] for row in entries]
        size = len(rows)
        if size % 2 or any(len(r) != size for r in rows):
            raise ValueError("an SpMatrix must be square of even size")
        self.n = size // 2
        self.entries = tuple(tuple(r) for r in rows)
        if check:
            bad = symplectic_defect(self)
            if bad:
                raise NotSymplectic(f"matrix violates a^T J + J a = 0 at {bad}")

    @classmethod
    def from_blocks(cls, g, h=None, c=None, d=None, check=True):
        n = len(g)
        zero = [[0] * n for _ in range(n)]
        h = h or zero
        c = c or zero
        if d is None:
            d = [[-g[j][i] for j in range(n)] for i in range(n)]
        rows = [list(g[i]) + list(h[i]) for i in range(n)] + [list(c[i]) + list(d[i]) for i in range(n)]
        return cls(rows, check=check)

    def block(self, name):
        n = self.n
        r0, c0 = {"g": (0, 0), "h": (0, n), "c": (n, 0), "d": (n, n)}[name]
        return [[self.entries[r0 + i][c0 + j] for j in range(n)] for i in range(n)]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other):
        size = 2 * self.n
        return [[sum(self.entries[i][k] * other.entries[k][j] for k in range(size)) for j in range(size)]
                for i in range(size)]

    def bracket(self, other):
        if other.n != self.n:
            raise RankMismatch("sp matrices of different rank")
        ab, ba = self @ other, other @ self
        size = 2 * self.n
        return SpMatrix([[ab[i][j] - ba[i][j] for j in range(size)] for i in range(size)])

    def apply(self, w):
        """Action on a linear element of span(x, y) (a WeylElement)."""
        n = self.n
        vec = linear_coordinates(w)
        out = WeylElement.zero(n)
        gens = WeylElement.generators(n)
        for i in range(2 * n):
            coef = sum(self.entries[i][j] * vec[j] for j in range(2 * n))
            if coef:
                out = out + gens[i].scale(coef)
        return out

    def is_parabolic(self):
        """Whether the matrix preserves the Lagrangian span(y1..yn), i.e. h = 0."""
        return all(v == 0 for row in self.block("h") for v in row)

    def restricted_trace(self):
        """Trace of the restriction to span(y1..yn), which is Tr(d) = -Tr(g)."""
        n = self.n
        return sum(self.entries[n + i][n + i] for i in range(n))

    def __eq__(self, other):
        return isinstance(other, SpMatrix) and self.entries == other.entries

    __hash__ = None

    def __repr__(self):
        return f"SpMatrix({[list(map(str, r)) for r in self.entries]})"


def symplectic_defect(a):
    """First index where a^T J + J a is nonzero, or None."""
    n = a.n
    size = 2 * n

    def J(i, j):
        if i < n and j == i + n:
            return 1
        if i >= n and j == i - n:
            return -1
        return 0

    for i in range(size):
        for j in range(size):
            lhs = sum(a.entries[k][i] * J(k, j) for k in range(size) if J(k, j)) + \
                  sum(J(i, k) * a.entries[k][j] for k in range(size) if J(i, k))
            if lhs:
                return (i, j)
    return None


def linear_coordinates(w):
    """Coefficient vector of a linear element of span(x1..xn, y1..yn)."""
    n = w.n
    vec = [Fraction(0)] * (2 * n)
    for (a, b, k), c in w.terms.items():
        if k != 0 or sum(a) + sum(b) != 1:
            raise ValueError(f"{w} is not a linear combination of generators")
        idx = a.index(1) if sum(a) else n + b.index(1)
        vec[idx] += c
    return vec


def sigma_embed(a):
    """The element h^-1 Q_a of h^-1 D whose bracket realises ``a``.

    Q_a = 1/2 sum g_ij (x_i y_j + y_j x_i) + 1/2 sum c_ij y_i y_j
          - 1/2 sum h_ij x_i x_j
    so that ``[sigma(a), w] = a(w)`` for every generator ``w``.
    """
    if symplectic_defect(a):
        raise NotSymplectic("matrix is not in sp(2n)")
    n = a.n
    g, h, c = a.block("g"), a.block("h"), a.block("c")
    xs = [WeylElement.x(n, i) for i in range(1, n + 1)]
    ys = [WeylElement.y(n, i) for i in range(1, n + 1)]
    q = WeylElement.zero(n)
    half = Fraction(1, 2)
    for i in range(n):
        for j in range(n):
            if g[i][j]:
                q = q + (xs[i] * ys[j] + ys[j] * xs[i]).scale(half * g[i][j])
            if c[i][j]:
                q = q + (ys[i] * ys[j]).scale(half * c[i][j])
            if h[i][j]:
                q = q - (xs[i] * xs[j]).scale(half * h[i][j])
    return q.shift_hbar(-1)


def theta_D(a, u):
    """The derivation u -> [sigma(a), u]."""
    return weyl_bracket(sigma_embed(a), u)


# ---------------------------------------------------------------------------
# symmetrization and the semiclassical bracket


def weyl_symmetrize(exps_x, exps_y, n=None):
    """Weyl-ordered image of the commutative monomial x^a y^b.

    Uses the closed form prod_i sum_k C(a_i,k) C(b_i,k) k! (h/2)^k x^(a-k) y^(b-k).
    """
    n = len(exps_x) if n is None else n
    terms = {}
    for ks in product(*[range(min(ai, bi) + 1) for ai, bi in zip(exps_x, exps_y)]):
        coef = Fraction(1)
        for ai, bi, k in zip(exps_x, exps_y, ks):
            coef *= Fraction(math.comb(ai, k) * math.comb(bi, k) * math.factorial(k), 2 ** k)
        key = (tuple(ai - k for ai, k in zip(exps_x, ks)), tuple(bi - k for bi, k in zip(exps_y, ks)), sum(ks))
        terms[key] = terms.get(key, 0) + coef
    return WeylElement(n, terms, EXACT)


def weyl_symmetrize_bruteforce(exps_x, exps_y):
    """Average of all orderings of the factors; used to check the closed form."""
    n = len(exps_x)
    letters = []
    for i, e in enumerate(exps_x):
        letters += [("x", i + 1)] * e
    for i, e in enumerate(exps_y):
        letters += [("y", i + 1)] * e
    total = WeylElement.zero(n)
    count = 0
    for perm in set(permutations(letters)):
        w = WeylElement.constant(n, 1)
        for kind, i in perm:
            w = w * (WeylElement.x(n, i) if kind == "x" else WeylElement.y(n, i))
        total = total + w
        count += 1
    return total.scale(Fraction(1, count))


def quantize_symmetric(f, n):
    """Weyl-symmetrized image of a commutative polynomial in x1..xn, y1..yn."""
    out = WeylElement.zero(n)
    for (e, k), c in f.terms.items():
        if k:
            raise ValueError("quantize_symmetric expects an h-free polynomial")
        out = out + weyl_symmetrize(e[:n], e[n:], n).scale(c)
    return out


def poisson_bracket(f, g, n):
    """Bracket induced by the commutator: {f, g} = sum_i (df/dy_i dg/dx_i - df/dx_i dg/dy_i).

    With this sign ``(1/h)[f^, g^] = {f, g} mod h`` and ``{y_i, x_j} = delta_ij``.
    """
    total = None
    for i in range(1, n + 1):
        xi, yi = f"x{i}", f"y{i}"
        term = f.differentiate(yi) * g.differentiate(xi) - f.differentiate(xi) * g.differentiate(yi)
        total = term if total is None else total + term
    return total


def semiclassical_bracket(u, v):
    """(1/h)[u, v] reduced modulo h, as a commutative polynomial."""
    br = weyl_bracket(u, v).shift_hbar(-1)
    if not br.is_plain:
        raise ValueError("bracket has a pole after dividing by h")
    return br.symbol()


@dataclass(frozen=True)
class SigmaWeight:
    """Scalar by which sigma(a) acts on the generator 1_M of the basic module.

    ``value`` is what the action produces: half the trace of the g block.
    ``half_trace_restricted`` is half the trace of the induced action on
    span(y), which is ``-value``.
    """

    value: Fraction
    half_trace_g: Fraction
    half_trace_restricted: Fraction


def random_sp(rng, n, lo=-2, hi=2):
    """Random element of sp(2n) with integer entries in [lo, hi].

    ``rng`` is a ``random.Random``; g is arbitrary, h and c symmetric.
    """
    g = [[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)]
    h = [[0] * n for _ in range(n)]
    c = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            h[i][j] = h[j][i] = rng.randint(lo, hi)
            c[i][j] = c[j][i] = rng.randint(lo, hi)
    return SpMatrix.from_blocks(g, h, c)
