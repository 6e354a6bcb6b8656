"""Cech-de Rham classes on small atlases.

Conventions used throughout:

* An overlap is directed ``src -> dst``.  Its ``map`` expresses the ``dst``
  coordinates as series in the ``src`` coordinates, and every form attached
  to the overlap lives in ``src`` coordinates.
* A class in the truncated complex is a pair ``(eta, xi)`` with closed
  2-forms ``eta[i]`` on charts and 1-forms ``xi[(i, j)]`` on overlaps such
  that ``eta[i] - phi^* eta[j] = d xi[(i, j)]``.
* Coboundaries are ``eta[i] += d theta[i]`` and
  ``xi[(i, j)] += theta[i] - phi^* theta[j]`` for polynomial 1-forms
  ``theta``.  In de Rham mode exact forms ``d g`` on overlaps are added too.
* For a line bundle with transition units ``u[(i, j)]`` the Chern class is
  ``xi = du/u``; on the projective line ``dt/t`` is normalized to 1.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .coeffring import DifferentialForm, ScalarSeries, parse_series, solve_primitive, sort_key, substitute
from .errors import (
    GluingDefect,
    NoPrimitive,
    NotAClass,
    NotClosed,
    NotCocycle,
    NotLagrangian,
    NotWeylNormalized,
)
from .linalg import Reducer
from .starprod import OVERLAP_CAP

CAP = OVERLAP_CAP


@dataclass
class Overlap:
    src: str
    dst: str
    map: dict
    invertible: frozenset = frozenset()

    def __post_init__(self):
        self.invertible = frozenset(self.invertible)


@dataclass
class Atlas:
    """Charts (name -> coordinate tuple) and directed overlaps."""

    coordinates: dict
    overlaps: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.coordinates) > 3:
            raise ValueError("atlases are limited to 3 charts")
        self.coordinates = {k: tuple(v) for k, v in self.coordinates.items()}
        seen = set()
        for ov in self.overlaps:
            if ov.src not in self.coordinates or ov.dst not in self.coordinates:
                raise ValueError(f"overlap {ov.src}->{ov.dst} refers to an unknown chart")
            pair = frozenset((ov.src, ov.dst))
            if pair in seen:
                raise ValueError(f"overlap between {ov.src} and {ov.dst} listed twice")
            seen.add(pair)

    def overlap(self, src, dst):
        for ov in self.overlaps:
            if ov.src == src and ov.dst == dst:
                return ov
        return None

    def triples(self):
        """Triples (i, j, k) with overlaps i->j, j->k and i->k."""
        out = []
        for a in self.overlaps:
            for b in self.overlaps:
                if a.dst == b.src and self.overlap(a.src, b.dst) is not None:
                    out.append((a.src, a.dst, b.dst))
        return out

    def series(self, chart, text, invertible=()):
        return parse_series(str(text), self.coordinates[chart], invertible=invertible, x_degree_cap=CAP)

    def pullback_function(self, ov, f):
        return substitute(f, ov.map, self.coordinates[ov.src], invertible=ov.invertible, x_degree_cap=CAP)

    def pullback_form(self, ov, form):
        return form.pullback(ov.map, self.coordinates[ov.src], invertible=ov.invertible, x_degree_cap=CAP)

    def compose(self, first, second):
        """Map of ``first.src -> second.dst`` obtained by composing overlaps."""
        return {v: self.pullback_function(first, second.map[v].embed(self.coordinates[second.src]))
                for v in self.coordinates[second.dst]}

    def check_cocycle(self):
        for i, j, k in self.triples():
            a, b, c = self.overlap(i, j), self.overlap(j, k), self.overlap(i, k)
            composed = self.compose(a, b)
            for v in self.coordinates[k]:
                direct = c.map[v].embed(self.coordinates[i], a.invertible | c.invertible)
                if not (composed[v] - direct).is_zero():
                    raise NotCocycle(f"coordinate maps {i}->{j}->{k} and {i}->{k} disagree on {v}")

    def relabel(self, names):
        """Atlas with charts renamed by ``names`` (old -> new)."""
        return Atlas({names.get(k, k): v for k, v in self.coordinates.items()},
                     [Overlap(names.get(o.src, o.src), names.get(o.dst, o.dst), o.map, o.invertible)
                      for o in self.overlaps])


def _zero_form(atlas, chart, degree, invertible=()):
    return DifferentialForm.zero(atlas.coordinates[chart], degree, invertible)


@dataclass
class CechClass:
    eta: dict
    xi: dict

    def __add__(self, other):
        eta = {}
        for k in set(self.eta) | set(other.eta):
            a, b = self.eta.get(k), other.eta.get(k)
            eta[k] = a + b if a is not None and b is not None else (a if b is None else b)
        xi = {}
        for k in set(self.xi) | set(other.xi):
            a, b = self.xi.get(k), other.xi.get(k)
            xi[k] = a + b if a is not None and b is not None else (a if b is None else b)
        return CechClass(eta, xi)

    def scale(self, c):
        return CechClass({k: None if v is None else v.scale(c) for k, v in self.eta.items()},
                         {k: None if v is None else v.scale(c) for k, v in self.xi.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def relabel(self, names):
        return CechClass({names.get(k, k): v for k, v in self.eta.items()},
                         {(names.get(a, a), names.get(b, b)): v for (a, b), v in self.xi.items()})

    def to_json(self):
        return {
            "eta": {k: v.to_json() for k, v in sorted(self.eta.items())},
            "xi": {f"{a}->{b}": v.to_json() for (a, b), v in sorted(self.xi.items())},
        }


def zero_class(atlas):
    eta = {c: _zero_form(atlas, c, 2) for c, coords in atlas.coordinates.items() if len(coords) >= 2}
    xi = {(o.src, o.dst): _zero_form(atlas, o.src, 1, o.invertible) for o in atlas.overlaps}
    return CechClass(eta, xi)


def _eta(atlas, c, chart):
    coords = atlas.coordinates[chart]
    form = c.eta.get(chart)
    if form is None or len(coords) < 2:
        return None
    return form


def check_class(atlas, c, *, derham=False):
    """Raise NotAClass unless the gluing and cocycle identities hold."""
    for chart, form in c.eta.items():
        if form is not None and not form.is_closed():
            raise NotAClass(f"eta on {chart} is not closed")
    for ov in atlas.overlaps:
        xi = c.xi.get((ov.src, ov.dst))
        if xi is None:
            xi = _zero_form(atlas, ov.src, 1, ov.invertible)
        ei, ej = _eta(atlas, c, ov.src), _eta(atlas, c, ov.dst)
        dxi = xi.d()
        if dxi is None:
            continue
        lhs = dxi.scale(-1)
        if ei is not None:
            lhs = lhs + ei.pullback({}, atlas.coordinates[ov.src], invertible=ov.invertible)
        if ej is not None:
            lhs = lhs - atlas.pullback_form(ov, ej)
        if not lhs.is_zero():
            raise NotAClass(f"eta[{ov.src}] - phi^* eta[{ov.dst}] differs from d xi on {ov.src}->{ov.dst}: {lhs}")
    if not derham:
        for i, j, k in atlas.triples():
            a, b, cc = atlas.overlap(i, j), atlas.overlap(j, k), atlas.overlap(i, k)
            inv = a.invertible | cc.invertible
            total = c.xi[(i, j)] + atlas.pullback_form(a, c.xi[(j, k)]).pullback(
                {}, atlas.coordinates[i], invertible=inv) - c.xi[(i, k)]
            if not total.is_zero():
                raise NotAClass(f"xi fails the cocycle condition on {i}, {j}, {k}")


# ---------------------------------------------------------------------------
# line bundles


@dataclass
class LineBundle:
    """Transition units ``u[(src, dst)]`` as series in the ``src`` coordinates."""

    transitions: dict

    def tensor(self, other):
        keys = set(self.transitions) | set(other.transitions)
        out = {}
        for k in keys:
            a, b = self.transitions.get(k), other.transitions.get(k)
            out[k] = a * b if a is not None and b is not None else (a if b is None else b)
        return LineBundle(out)

    def power(self, n):
        return LineBundle({k: v ** n for k, v in self.transitions.items()})

    def relabel(self, names):
        return LineBundle({(names.get(a, a), names.get(b, b)): v for (a, b), v in self.transitions.items()})


def check_line_bundle(atlas, L):
    for ov in atlas.overlaps:
        u = L.transitions.get((ov.src, ov.dst))
        if u is None:
            continue
        try:
            u.inverse()
        except Exception as exc:
            raise NotCocycle(f"transition on {ov.src}->{ov.dst} is not a unit: {exc}") from None
    for i, j, k in atlas.triples():
        a, b, c = atlas.overlap(i, j), atlas.overlap(j, k), atlas.overlap(i, k)
        one = lambda key, ov: L.transitions.get(key) or ScalarSeries.constant(atlas.coordinates[ov.src], 1)
        lhs = one((i, j), a) * atlas.pullback_function(a, one((j, k), b))
        if not (lhs - one((i, k), c)).is_zero():
            raise NotCocycle(f"line bundle transitions fail the cocycle condition on {i}, {j}, {k}")


def dlog(u, invertible):
    coords = u.variables
    inv = u.inverse()
    comps = {(v,): u.differentiate(v) * inv for v in coords}
    return DifferentialForm(coords, 1, comps, invertible)


def chern_class(atlas, L):
    """First Chern class: eta = 0 and xi = du/u on each overlap."""
    check_line_bundle(atlas, L)
    out = zero_class(atlas)
    for ov in atlas.overlaps:
        u = L.transitions.get((ov.src, ov.dst))
        if u is not None:
            u = u.embed(atlas.coordinates[ov.src], ov.invertible)
            out.xi[(ov.src, ov.dst)] = dlog(u, ov.invertible)
    check_class(atlas, out)
    return out


def jacobian_determinant(atlas, ov):
    """det d(dst coordinates)/d(src coordinates) on the overlap."""
    src = atlas.coordinates[ov.src]
    dst = atlas.coordinates[ov.dst]
    if len(src) != len(dst):
        raise ValueError("charts of different dimension")
    rows = [[ov.map[v].embed(src, ov.invertible).differentiate(w) for w in src] for v in dst]
    return _det(rows)


def _det(m):
    n = len(m)
    if n == 0:
        return None
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor)
        term = term if j % 2 == 0 else -term
        total = term if total is None else total + term
    return total


def canonical_bundle(atlas):
    """K_Y with transition units given by the Jacobian determinants."""
    return LineBundle({(ov.src, ov.dst): jacobian_determinant(atlas, ov) for ov in atlas.overlaps})


# ---------------------------------------------------------------------------
# reduction modulo coboundaries


def _mono_label(variables, exps):
    parts = []
    for v, e in zip(variables, exps):
        if e == 1:
            parts.append(v)
        elif e:
            parts.append(f"{v}^{e}")
    return " ".join(parts) or "1"


def _label(key):
    kind = key[0]
    if kind == "eta":
        _, chart, comp, (exps, k), variables = key
        basis = "^".join("d" + v for v in comp)
        return f"eta[{chart}] {_mono_label(variables, exps)} {basis}" + (f" h^{k}" if k else "")
    if kind == "xi":
        _, (a, b), comp, (exps, k), variables = key
        basis = "d" + comp[0]
        return f"xi[{a}->{b}] {_mono_label(variables, exps)} {basis}" + (f" h^{k}" if k else "")
    _, (i, j, l), (exps, k), variables = key
    return f"f[{i},{j},{l}] {_mono_label(variables, exps)}" + (f" h^{k}" if k else "")


def _vector(atlas, c):
    vec = {}
    for chart, form in c.eta.items():
        if form is None:
            continue
        for comp, series in form.components.items():
            for mono, val in series.terms.items():
                vec[("eta", chart, comp, mono, atlas.coordinates[chart])] = val
    for (a, b), form in c.xi.items():
        for comp, series in form.components.items():
            for mono, val in series.terms.items():
                vec[("xi", (a, b), comp, mono, atlas.coordinates[a])] = val
    return vec


def _key_order(key):
    kind = key[0]
    rank = {"eta": 0, "xi": 1, "f": 2}[kind]
    mono = key[3] if kind != "f" else key[2]
    return (rank, repr(key[1]), repr(key[2]) if kind != "f" else "", sort_key(mono))


@dataclass
class ReducedClass:
    """Residual coordinates after reduction, keyed by readable labels."""

    coordinates: dict

    def is_zero(self):
        return not self.coordinates

    def values(self):
        return [self.coordinates[k] for k in sorted(self.coordinates)]

    def total(self):
        return sum(self.coordinates.values(), Fraction(0))

    def to_json(self):
        return {k: str(v) for k, v in sorted(self.coordinates.items())}

    def __eq__(self, other):
        if isinstance(other, ReducedClass):
            return self.coordinates == other.coordinates
        return NotImplemented


def class_reduce(atlas, c, *, derham=False, pad=2, check=True):
    """Reduce a class modulo coboundaries by exact linear algebra.

    Every coordinate of the result is a monomial coefficient that no
    coboundary in the search space can cancel.  On the projective line the
    single surviving coordinate is the coefficient of ``t^-1 dt``.
    """
    if check:
        check_class(atlas, c, derham=derham)
    vec = _vector(atlas, c)
    hks = sorted({key[3][1] for key in vec}) or [0]
    bound = pad + max([sum(abs(e) for e in key[3][0]) for key in vec] + [0])
    generators = []
    for chart, coords in atlas.coordinates.items():
        for v in coords:
            for exps in product(range(bound + 1), repeat=len(coords)):
                if sum(exps) > bound:
                    continue
                for k in hks:
                    theta = DifferentialForm(coords, 1, {(v,): ScalarSeries(coords, {(exps, k): 1}, x_degree_cap=CAP,
                                                                           min_hbar_power=min(k, 0))})
                    generators.append(_coboundary(atlas, chart, theta))
    if derham:
        for ov in atlas.overlaps:
            coords = atlas.coordinates[ov.src]
            ranges = [range(-bound if v in ov.invertible else 0, bound + 1) for v in coords]
            for exps in product(*ranges):
                if not any(exps):
                    continue
                for k in hks:
                    g = ScalarSeries(coords, {(exps, k): 1}, x_degree_cap=CAP, invertible=ov.invertible,
                                     min_hbar_power=min(k, 0))
                    generators.append(_overlap_coboundary(atlas, ov, g))
    keys = set(vec)
    for gen in generators:
        keys |= set(gen)
    ordered = sorted(keys, key=_key_order)
    index = {k: i for i, k in enumerate(ordered)}
    reducer = Reducer([{index[k]: v for k, v in gen.items()} for gen in generators], len(ordered))
    residual = reducer.reduce({index[k]: v for k, v in vec.items()})
    return ReducedClass({_label(ordered[i]): v for i, v in sorted(residual.items())})


def _coboundary(atlas, chart, theta):
    out = {}
    coords = atlas.coordinates[chart]
    if len(coords) >= 2:
        dtheta = theta.d()
        for comp, series in dtheta.components.items():
            for mono, val in series.terms.items():
                out[("eta", chart, comp, mono, coords)] = val
    for ov in atlas.overlaps:
        if ov.src == chart:
            form = theta.pullback({}, atlas.coordinates[ov.src], invertible=ov.invertible)
            sign = 1
        elif ov.dst == chart:
            form = atlas.pullback_form(ov, theta)
            sign = -1
        else:
            continue
        for comp, series in form.components.items():
            for mono, val in series.terms.items():
                key = ("xi", (ov.src, ov.dst), comp, mono, atlas.coordinates[ov.src])
                out[key] = out.get(key, 0) + sign * val
    return {k: v for k, v in out.items() if v}


def _overlap_coboundary(atlas, ov, g):
    out = {}
    coords = atlas.coordinates[ov.src]
    dg = DifferentialForm(coords, 0, {(): g}, ov.invertible).d()
    for comp, series in dg.components.items():
        for mono, val in series.terms.items():
            out[("xi", (ov.src, ov.dst), comp, mono, coords)] = val
    # effect on the Cech 2-cochain of functions on triple overlaps
    for i, j, k in atlas.triples():
        a, b, c = atlas.overlap(i, j), atlas.overlap(j, k), atlas.overlap(i, k)
        inv = a.invertible | c.invertible
        if (ov.src, ov.dst) == (j, k):
            val, sign = atlas.pullback_function(a, g), 1
        elif (ov.src, ov.dst) == (i, k):
            val, sign = g.embed(atlas.coordinates[i], inv), -1
        elif (ov.src, ov.dst) == (i, j):
            val, sign = g.embed(atlas.coordinates[i], inv), 1
        else:
            continue
        for mono, v in val.terms.items():
            key = ("f", (i, j, k), mono, atlas.coordinates[i])
            out[key] = out.get(key, 0) + sign * v
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------------------
# Lagrangian subvarieties and the obstruction class


@dataclass
class Embedding:
    """Graph parametrization of Y inside one ambient chart."""

    chart: str
    y_coordinates: tuple
    images: dict  # ambient coordinate -> series in y coordinates
    generators: list


def eliminate(chart, coords, generators, prefer=()):
    """Solve the generators for some coordinates; the rest parametrize Y."""
    order = [v for v in prefer if v in coords] + [v for v in coords if v not in prefer]
    gens = [g.embed(coords) for g in generators]
    solved = {}
    remaining = list(gens)
    while remaining:
        g = remaining.pop(0)
        if g.is_zero():
            continue
        pick = None
        for v in order:
            if v in solved:
                continue
            i = coords.index(v)
            lin = [(e, k, c) for (e, k), c in g.terms.items() if e[i] > 0]
            if len(lin) == 1 and lin[0][0] == tuple(int(j == i) for j in range(len(coords))) and lin[0][1] == 0:
                pick = (v, lin[0][2])
                break
        if pick is None:
            raise NotLagrangian(f"cannot solve generator {g} for a coordinate on chart {chart}")
        v, a = pick
        i = coords.index(v)
        rest = g._like({key: c for key, c in g.terms.items() if key[0][i] == 0})
        expr = rest.scale(-1 / a)
        solved = {w: substitute(s, {v: expr}, coords, x_degree_cap=CAP) for w, s in solved.items()}
        solved[v] = expr
        remaining = [substitute(r, {v: expr}, coords, x_degree_cap=CAP) for r in remaining]
    y_coords = tuple(v for v in coords if v not in solved)
    images = {}
    for v in coords:
        if v in solved:
            images[v] = _restrict_to(solved[v], y_coords)
        else:
            images[v] = ScalarSeries.variable(y_coords, v, x_degree_cap=CAP)
    for g in gens:
        if not substitute(g, images, y_coords, x_degree_cap=CAP).is_zero():
            raise NotLagrangian(f"generator {g} does not vanish on the parametrized subvariety")
    return Embedding(chart, y_coords, images, gens)


def _restrict_to(series, y_coords):
    """Drop variables that do not occur (they must have exponent zero)."""
    idx = [series.variables.index(v) for v in y_coords]
    for (e, _k) in series.terms:
        if any(x for j, x in enumerate(e) if j not in idx):
            raise NotLagrangian(f"{series} still depends on eliminated coordinates")
    terms = {(tuple(e[j] for j in idx), k): c for (e, k), c in series.terms.items()}
    return ScalarSeries(y_coords, terms, x_degree_cap=series.x_degree_cap, hbar_order=series.hbar_order,
                        min_hbar_power=series.min_hbar_power,
                        invertible=frozenset(v for v in series.invertible if v in y_coords))


@dataclass
class AmbientAtlas:
    """Darboux charts (name -> starprod.Chart) with directed overlaps."""

    charts: dict
    overlaps: list

    @property
    def atlas(self):
        return Atlas({n: c.coordinates for n, c in self.charts.items()}, self.overlaps)

    def relabel(self, names):
        from .starprod import Chart

        charts = {names.get(n, n): Chart(names.get(n, n), c.base, c.fiber, c.invertible)
                  for n, c in self.charts.items()}
        return AmbientAtlas(charts, self.atlas.relabel(names).overlaps)


def lagrangian_embeddings(ambient, lagrangian):
    out = {}
    for name, chart in ambient.charts.items():
        gens = lagrangian.get(name)
        if gens is None:
            raise NotLagrangian(f"no ideal generators for chart {name}")
        out[name] = eliminate(name, chart.coordinates, gens, prefer=chart.fiber)
    return out


def y_atlas(ambient, embeddings):
    """Atlas of Y induced by the ambient overlaps and the graph parametrizations."""
    coords = {n: e.y_coordinates for n, e in embeddings.items()}
    overlaps = []
    for ov in ambient.overlaps:
        es, ed = embeddings[ov.src], embeddings[ov.dst]
        inv = frozenset(v for v in ov.invertible if v in es.y_coordinates)
        m = {}
        for v in ed.y_coordinates:
            m[v] = substitute(ov.map[v].embed(ambient.charts[ov.src].coordinates, ov.invertible),
                              {w: es.images[w].embed(es.y_coordinates, inv) for w in es.images},
                              es.y_coordinates, invertible=inv, x_degree_cap=CAP)
        overlaps.append(Overlap(ov.src, ov.dst, m, inv))
        # the dst ideal must vanish on the src parametrization
        for g in ed.generators:
            pulled = substitute(g, ov.map, ambient.charts[ov.src].coordinates, invertible=ov.invertible,
                                x_degree_cap=CAP)
            on_y = substitute(pulled, {w: es.images[w].embed(es.y_coordinates, inv) for w in es.images},
                              es.y_coordinates, invertible=inv, x_degree_cap=CAP)
            if not on_y.is_zero():
                raise NotLagrangian(f"transition {ov.src}->{ov.dst} does not preserve the ideal")
    return Atlas(coords, overlaps)


def restrict_form(embedding, form, invertible=()):
    """i_Y^* of a form on the ambient chart."""
    inv = frozenset(invertible) & set(embedding.y_coordinates)
    images = {w: s.embed(embedding.y_coordinates, inv) for w, s in embedding.images.items()}
    return form.pullback(images, embedding.y_coordinates, invertible=inv, x_degree_cap=CAP)


def check_lagrangian_embedding(ambient, embeddings, omega):
    for name, emb in embeddings.items():
        dim = len(ambient.charts[name].coordinates)
        if 2 * len(emb.y_coordinates) != dim:
            return False
        if not restrict_form(emb, omega[name]).is_zero():
            return False
    return True


def _constant_matrix(form):
    coords = form.variables
    n = len(coords)
    m = [[Fraction(0)] * n for _ in range(n)]
    for (a, b), c in form.components.items():
        i, j = coords.index(a), coords.index(b)
        if any(sum(e) != 0 or k for (e, k) in c.terms):
            raise ValueError("the symplectic form must have constant coefficients on each chart")
        val = c.constant_term()
        m[i][j] += val
        m[j][i] -= val
    return m


def _invert(m):
    from .linalg import solve_affine

    n = len(m)
    cols = []
    for j in range(n):
        rows = [{k: m[i][k] for k in range(n) if m[i][k]} for i in range(n)]
        rhs = [Fraction(int(i == j)) for i in range(n)]
        sol, kernel = solve_affine(rows, rhs, n)
        if kernel:
            raise ValueError("matrix is singular")
        cols.append(sol)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def hamiltonian_vector(omega_form, dg):
    """Vector v with iota_v omega = dg for constant omega (dg given as a 1-form)."""
    coords = omega_form.variables
    m = _constant_matrix(omega_form)  # (iota_v omega)_l = sum_k v^k m[k][l]
    minv = _invert([[m[k][l] for k in range(len(coords))] for l in range(len(coords))])
    comps = [dg.component(v) for v in coords]
    out = {}
    for i, v in enumerate(coords):
        total = comps[0].zero_like()
        for j in range(len(coords)):
            if minv[i][j]:
                total = total + comps[j].scale(minv[i][j])
        out[v] = total
    return out


def obstruction_class(ambient, stars, transitions, lagrangian, omega, *, xi_sign=-1):
    """Class of the quantization along Y from order-2 star data and beta1.

    ``transitions`` maps ``(src, dst)`` to a vector field ``beta1`` in the
    ``src`` coordinates.  On each chart the antisymmetric part of alpha2 is
    fed the ideal generators and transported to Y through the Hamiltonian
    vector fields of the generators; on each overlap
    ``xi = -i_Y^*(iota_beta1 omega)``.
    """
    for name, s in stars.items():
        if not s.weyl_normalized:
            raise NotWeylNormalized(f"star product on {name} is not Weyl normalized")
        if s.order < 2:
            raise NotWeylNormalized(f"star product on {name} is only given to order {s.order}")
    embeddings = lagrangian_embeddings(ambient, lagrangian)
    if not check_lagrangian_embedding(ambient, embeddings, omega):
        raise NotLagrangian("omega does not vanish on Y or Y is not middle dimensional")
    yat = y_atlas(ambient, embeddings)
    eta = {}
    for name, emb in embeddings.items():
        eta[name] = _eta_from_star(ambient.charts[name], stars[name], emb, omega[name])
    xi = {}
    for ov in ambient.overlaps:
        emb = embeddings[ov.src]
        beta = transitions.get((ov.src, ov.dst)) or {}
        coords = ambient.charts[ov.src].coordinates
        om = omega[ov.src].pullback({}, coords, invertible=ov.invertible)
        beta = {v: c.embed(coords, ov.invertible) for v, c in beta.items() if c is not None}
        form = om.interior(beta) if beta else DifferentialForm.zero(coords, 1, ov.invertible)
        xi[(ov.src, ov.dst)] = restrict_form(emb, form, ov.invertible).scale(xi_sign)
    out = CechClass(eta, xi)
    try:
        check_class(yat, out)
    except NotAClass as exc:
        raise GluingDefect(str(exc)) from None
    return yat, out


def _eta_from_star(chart, star, emb, omega_form):
    y = emb.y_coordinates
    n = len(y)
    if n < 2:
        return None
    coords = chart.coordinates
    gens = emb.generators
    anti = star.antisymmetric(2)
    # V[a][k]: component of the Hamiltonian vector of g_a along y_k, restricted to Y
    V = []
    for g in gens:
        dg = DifferentialForm(coords, 0, {(): g}, chart.invertible).d()
        vec = hamiltonian_vector(omega_form, dg)
        row = []
        for v in y:
            comp = substitute(vec[v], emb.images, y, x_degree_cap=CAP)
            if any(sum(e) or k for (e, k) in comp.terms):
                raise NotLagrangian("only ideals with constant-coefficient differentials are supported")
            row.append(comp.constant_term())
        V.append(row)
    Vinv = _invert(V)  # rows indexed by k, columns by a: d/dy_k = sum_a Vinv[k][a] v_a
    B = [[substitute(anti.apply(ga, gb), emb.images, y, x_degree_cap=CAP) for gb in gens] for ga in gens]
    comps = {}
    for k in range(n):
        for l in range(k + 1, n):
            total = None
            for a in range(n):
                for b in range(n):
                    c = Vinv[k][a] * Vinv[l][b]
                    if c:
                        term = B[a][b].scale(c)
                        total = term if total is None else total + term
            if total is not None and not total.is_zero():
                comps[(y[k], y[l])] = total
    return DifferentialForm(y, 2, comps)


def restrict_2form_class(ambient, forms, embeddings, primitives=None):
    """Cech-de Rham representative of i_Y^*[w] for closed ambient 2-forms ``w``.

    On overlaps ``w[src] - phi^* w[dst] = d lam`` with ``lam`` supplied in
    ``primitives`` or solved for; the class is ``(i^* w, i^* lam)``.
    """
    primitives = primitives or {}
    for name, w in forms.items():
        if not w.is_closed():
            raise NotClosed(f"2-form on {name} is not closed")
    yat = y_atlas(ambient, embeddings)
    eta = {}
    for name, emb in embeddings.items():
        w = forms.get(name)
        eta[name] = restrict_form(emb, w) if w is not None and len(emb.y_coordinates) >= 2 else None
    xi = {}
    for ov in ambient.overlaps:
        coords = ambient.charts[ov.src].coordinates
        ws = forms.get(ov.src)
        wd = forms.get(ov.dst)
        diff = DifferentialForm.zero(coords, 2, ov.invertible)
        if ws is not None:
            diff = diff + ws.pullback({}, coords, invertible=ov.invertible)
        if wd is not None:
            diff = diff - wd.pullback(ov.map, coords, invertible=ov.invertible, x_degree_cap=CAP)
        lam = primitives.get((ov.src, ov.dst))
        if lam is None:
            lam = solve_primitive(diff) if not diff.is_zero() else DifferentialForm.zero(coords, 1, ov.invertible)
            if lam is None:
                raise NoPrimitive(f"no primitive for the overlap difference on {ov.src}->{ov.dst}")
        elif not (lam.d() - diff).is_zero():
            raise NoPrimitive(f"supplied primitive on {ov.src}->{ov.dst} does not satisfy d lam = difference")
        xi[(ov.src, ov.dst)] = restrict_form(embeddings[ov.src], lam, ov.invertible)
    return yat, CechClass(eta, xi)
