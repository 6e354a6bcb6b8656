"""Exact sparse linear algebra over the rationals, backed by sympy's DomainMatrix."""

from fractions import Fraction

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import NoSolution


def _to_frac(x):
    return Fraction(int(x.numerator), int(x.denominator))


def _to_qq(c):
    c = Fraction(c)
    return QQ(c.numerator, c.denominator)


def _matrix(rows, ncols):
    data = {}
    for i, row in enumerate(rows):
        entries = {j: _to_qq(c) for j, c in row.items() if c}
        if entries:
            data[i] = entries
    return DomainMatrix(data, (len(rows), ncols), QQ)


def rref(rows, ncols):
    """Reduced row echelon form of a sparse matrix.

    ``rows`` is a list of ``{column: value}`` dicts.  Returns the nonzero rows
    (as dicts of Fractions) and the tuple of pivot columns.
    """
    if not rows or ncols == 0:
        return [], ()
    reduced, pivots = _matrix(rows, ncols).rref()
    out = []
    for i, row in sorted(reduced.to_sdm().items()):
        out.append({j: _to_frac(v) for j, v in row.items() if v})
    return [r for r in out if r], tuple(pivots)


def solve_affine(rows, rhs, ncols):
    """Solve ``A c = b`` exactly.

    Returns ``(particular, kernel)``: the basic solution with every free
    variable set to zero, and a basis of the null space of ``A``, each as a
    list of Fractions.  Raises NoSolution when the system is inconsistent.
    """
    augmented = []
    for row, b in zip(rows, rhs):
        r = dict(row)
        if b:
            r[ncols] = Fraction(b)
        augmented.append(r)
    reduced, pivots = rref(augmented, ncols + 1)
    if ncols in pivots:
        raise NoSolution("the linear system is inconsistent")
    particular = [Fraction(0)] * ncols
    for row, p in zip(reduced, pivots):
        particular[p] = row.get(ncols, Fraction(0))
    free = [j for j in range(ncols) if j not in set(pivots)]
    kernel = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            if f in row:
                vec[p] = -row[f]
        kernel.append(vec)
    return particular, kernel


class Reducer:
    """Canonical normal form of vectors modulo the span of given generators.

    After reduction a vector is supported on non-pivot coordinates only, so
    two vectors are congruent iff their normal forms are equal.
    """

    def __init__(self, generators, ncols):
        self.ncols = ncols
        self.rows, self.pivots = rref([g for g in generators if g], ncols)

    def reduce(self, vec):
        vec = {j: Fraction(c) for j, c in vec.items() if c}
        for row, p in zip(self.rows, self.pivots):
            c = vec.get(p)
            if c:
                for j, v in row.items():
                    nv = vec.get(j, 0) - c * v
                    if nv:
                        vec[j] = nv
                    else:
                        vec.pop(j, None)
        return vec

    @property
    def free_columns(self):
        piv = set(self.pivots)
        return [j for j in range(self.ncols) if j not in piv]
