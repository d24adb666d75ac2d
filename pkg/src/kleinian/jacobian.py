"""Abel images of points and divisors, Kleinian wp-functions, Jacobi inversion checks.

u-components and wp indices are gap weights (1, 3, 5, 7 for genus 4
hyperelliptic; 1, 2, 5 for the (3,4) curve).  Positions only appear inside
the theta sums, where ``d/du = (omega^-1)^t d/dv``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .algebra import HYPERELLIPTIC, CurveSpec, monomial_list
from .periods import PeriodSet, SegmentTable, base_path_image, route_image
from .quad import TOL, integrate_segment
from .sheets import (SHEET_NAMES, ContinuationError, LabelRun, PathSegment, SheetAtlas, SheetLocation, arc,
                     identify_sheet, line, polygon_labels, segment_run, track)
from .theta import Characteristic, ThetaError, ThetaParams, reduce_argument, theta_jet, vector_to_characteristic

SPECIAL_THRESHOLD = 1e-10


class SpecialDivisorError(ValueError):
    pass


@dataclass(frozen=True)
class CurvePoint:
    x: complex
    y: complex
    sheet: str | None = None
    anchor: int | None = None  # 1-based branch point used for the final segment


@dataclass(frozen=True)
class Divisor:
    points: tuple[CurvePoint, ...]

    @classmethod
    def of(cls, pts) -> "Divisor":
        return cls(tuple(p if isinstance(p, CurvePoint) else CurvePoint(complex(p[0]), complex(p[1])) for p in pts))

    @property
    def degree(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class AbelImage:
    u: np.ndarray
    weights: tuple[int, ...]

    def __getitem__(self, w: int) -> complex:
        return complex(self.u[self.weights.index(w)])

    def __add__(self, other: "AbelImage") -> "AbelImage":
        return AbelImage(self.u + other.u, self.weights)


# -- divisors --------------------------------------------------------------------------

def check_divisor(d: Divisor, curve: CurveSpec, tol: float = 1e-9) -> None:
    """Reject divisors containing an involution pair (hyperelliptic) or a full fibre (trigonal)."""
    pts = d.points
    scale = lambda z: max(1.0, abs(z))
    if curve.kind == HYPERELLIPTIC:
        for p, q in itertools.combinations(pts, 2):
            if abs(p.x - q.x) < tol * scale(p.x):
                shift = 0 if curve.is_canonical else complex(curve.y_shift(p.x))
                if abs((p.y - shift) + (q.y - shift)) < tol * scale(p.y):
                    raise SpecialDivisorError(f"points at x = {p.x} form an involution pair")
        return
    for trio in itertools.combinations(pts, 3):
        xs = [p.x for p in trio]
        if max(abs(a - b) for a, b in itertools.combinations(xs, 2)) < tol * scale(xs[0]):
            raise SpecialDivisorError(f"three points share x = {xs[0]}")


# -- Abel map ----------------------------------------------------------------------------

def _segment_integral(table: SegmentTable, a: complex, a_id: int, b: complex, run: LabelRun, tol: float):
    if abs(b - a) == 0:
        return np.zeros(table.first.size, dtype=complex)
    seg = PathSegment(a, b, a_id, -1, "finite-line")
    # labels are tracked from 1e-7 of the way along; nodes closer to the branch point follow by continuity
    return np.asarray(integrate_segment(table._int1, seg, run, tol=tol, anchor_radius=1e-7 * abs(b - a)).value)


def locate(atlas: SheetAtlas, p: CurvePoint) -> SheetLocation:
    """Sheet and anchor of a point; a requested anchor (and sheet) overrides the search."""
    if p.anchor is None:
        loc = identify_sheet(atlas, p.x, p.y)
        if p.sheet is not None and p.sheet != loc.sheet:
            raise ContinuationError(f"point is on Sheet {loc.sheet}, not {p.sheet}")
        return loc
    sol = atlas.solutions
    label = sol.label_of(p.x, p.y)
    i = p.anchor
    e = atlas.e[i - 1]
    phi = float(np.angle(p.x - e))
    for s in ([p.sheet] if p.sheet else list(atlas.sheets)):
        tr = segment_run(sol, e, p.x, atlas.label_near(s, i, phi))
        if tr.end_label == label:
            return SheetLocation(s, i, LabelRun(tuple(tr.labels), tuple(tr.breaks)), label)
    raise ContinuationError(f"no sheet reaches the point from anchor e_{i}")


def abel_point(p: CurvePoint, ps: PeriodSet, tol: float = TOL) -> AbelImage:
    """Base path on the point's sheet to the anchor branch point, then [anchor, x]."""
    atlas, table = ps.atlas, ps.table
    sol = atlas.solutions
    loc = locate(atlas, p)
    i = loc.anchor
    e = atlas.e[i - 1]
    u = base_path_image(table, loc.sheet, i) + _segment_integral(table, e, i, p.x, loc.run, tol)
    if abs(p.x - e) > 0:
        final = loc.run.end
        if final != sol.label_of(p.x, p.y):
            raise ContinuationError("path does not end at the requested point")
    return AbelImage(np.asarray(u), tuple(atlas.curve.gaps))


def abel_via_route(p: CurvePoint, ps: PeriodSet, ids, start_sheet: str, turns="ccw", tol: float = TOL) -> AbelImage:
    """Abel image along an explicit polygon of branch points, then a segment to p.

    ``ids`` starts with 0 (the left ray from infinity) and ends at the anchor.
    The route is continued from ``start_sheet``; every vertex, including the
    anchor, is passed by a small arc, counter-clockwise unless ``turns`` (one
    entry per vertex after the first, the anchor last) says "cw".  A route that arrives
    on another sheet than the point's raises.
    """
    atlas, table = ps.atlas, ps.table
    sol = atlas.solutions
    label = SHEET_NAMES.index(start_sheet)
    turns = [turns] * (len(ids) - 1) if isinstance(turns, str) else list(turns)
    u = route_image(table, ids, label, turn=turns[:-1])
    edges = polygon_labels(atlas, ids, label, turns[:-1])
    lab = edges[-1][2][-1]
    i = ids[-1]
    e = atlas.e[i - 1]
    r = atlas.detour
    prev = atlas.e[ids[-2] - 1] if ids[-2] != 0 else e - atlas.r_inf
    th_in = float(np.angle(prev - e))
    th_out = float(np.angle(p.x - e))
    sweep = (th_out - th_in) % (2 * math.pi)
    if turns[-1] == "cw":
        sweep -= 2 * math.pi
    lab = track(sol, arc(e, r, th_in, th_in + sweep), lab).end_label
    tr = track(sol, line(e, p.x), lab, min(1e-7, r / max(abs(p.x - e), 1e-300)), 1.0)
    if tr.end_label != sol.label_of(p.x, p.y):
        raise ContinuationError(f"route ends with label {tr.end_label + 1}, point has {sol.label_of(p.x, p.y) + 1}")
    u = u + _segment_integral(table, e, i, p.x, LabelRun(tuple(tr.labels), tuple(tr.breaks)), tol)
    return AbelImage(np.asarray(u), tuple(atlas.curve.gaps))


def abel_divisor(d: Divisor, ps: PeriodSet, tol: float = TOL) -> AbelImage:
    u = np.zeros(ps.genus, dtype=complex)
    for p in d.points:
        u = u + abel_point(p, ps, tol).u
    return AbelImage(u, tuple(ps.atlas.curve.gaps))


@dataclass(frozen=True)
class Congruence:
    m: np.ndarray
    m_prime: np.ndarray
    residual: float


def lattice_congruent(u1, u2, ps: PeriodSet, tol: float = 1e-8) -> Congruence:
    """Integer m, m' with u1 - u2 = omega m + omega' m'; raises if the rounding residual exceeds tol."""
    du = np.asarray(getattr(u1, "u", u1)) - np.asarray(getattr(u2, "u", u2))
    g = len(du)
    M = np.block([[ps.omega.real, ps.omega_p.real], [ps.omega.imag, ps.omega_p.imag]])
    sol = np.linalg.solve(M, np.concatenate([du.real, du.imag]))
    rnd = np.round(sol)
    res = float(np.max(np.abs(sol - rnd)))
    if res > tol:
        raise ValueError(f"not congruent modulo the period lattice (residual {res:.3e})")
    return Congruence(rnd[:g].astype(int), rnd[g:].astype(int), res)


def distance_mod_lattice(u1, u2, ps: PeriodSet) -> tuple[float, Congruence]:
    """Max-norm distance in u between u1 and the nearest lattice translate of u2.

    Use this to compare against values known to a few digits in u; lattice
    coordinates amplify u errors by the size of omega^-1.
    """
    du = np.asarray(getattr(u1, "u", u1)) - np.asarray(getattr(u2, "u", u2))
    g = len(du)
    M = np.block([[ps.omega.real, ps.omega_p.real], [ps.omega.imag, ps.omega_p.imag]])
    sol = np.linalg.solve(M, np.concatenate([du.real, du.imag]))
    rnd = np.round(sol)
    rest = du - ps.omega @ rnd[:g] - ps.omega_p @ rnd[g:]
    return float(np.max(np.abs(rest))), Congruence(rnd[:g].astype(int), rnd[g:].astype(int),
                                                   float(np.max(np.abs(sol - rnd))))


# -- [K] on trigonal curves ------------------------------------------------------------

def c34_branch_routes() -> list[list[int]]:
    """Routes from infinity to B1..B8 along the lower path B1 B2 B4 B6 B8 with short hops."""
    return [[0, 1], [0, 1, 2], [0, 1, 2, 3], [0, 1, 2, 4], [0, 1, 2, 4, 6, 5], [0, 1, 2, 4, 6],
            [0, 1, 2, 4, 6, 7], [0, 1, 2, 4, 6, 8]]


def branch_route_turns(atlas: SheetAtlas, ids, label: int) -> list[str]:
    """Vertex turns for a route that arrives at the ramification point over e_{ids[-1]}.

    Counter-clockwise arcs are kept wherever possible; turns are flipped from
    the last vertex backwards only when the route would otherwise arrive on
    the third, unramified sheet.
    """
    pair = atlas.points[ids[-1] - 1].pair
    n_inner = len(ids) - 2
    for flips in range(n_inner + 1):
        for chosen in itertools.combinations(range(n_inner - 1, -1, -1), flips):
            turns = ["cw" if k in chosen else "ccw" for k in range(n_inner)]
            if polygon_labels(atlas, ids, label, turns)[-1][2][-1] in pair:
                return turns
    raise ContinuationError(f"no route along {ids} reaches the branch point")


def canonical_divisor_image(ps: PeriodSet, sheet: str, routes: str = "branch") -> np.ndarray:
    """Sum of the Abel images of all finite branch points reached from ``sheet``.

    For the (3,4) layout the routes follow the lower path B1 B2 B4 B6 B8 with
    short hops to B3, B5, B7; otherwise the base path is used.  With
    ``routes="base"`` the plain base path on ``sheet`` is summed without
    checking that it arrives at the ramification points.
    """
    atlas = ps.atlas
    if atlas.curve.kind == HYPERELLIPTIC:
        raise ValueError("use K_characteristic_hyperelliptic")
    label = SHEET_NAMES.index(sheet)
    if routes == "base":
        return sum(base_path_image(ps.table, sheet, i) for i in range(1, atlas.N + 1))
    if atlas.curve.s == 4 and atlas.N == 8:
        routes = c34_branch_routes()
    else:
        routes = [[0, *range(1, i + 1)] for i in range(1, atlas.N + 1)]
    return sum(route_image(ps.table, ids, label, turn=branch_route_turns(atlas, ids, label)) for ids in routes)


def K_characteristic_trigonal(ps: PeriodSet, sheet: str, routes: str = "branch") -> Characteristic:
    return vector_to_characteristic(0.5 * canonical_divisor_image(ps, sheet, routes), ps)


def choose_base_sheet(ps: PeriodSet, tol: float = 1e-6) -> tuple[str, Characteristic]:
    """Base sheet whose [K] gives theta[K] the full weighted vanishing order at 0."""
    from .theta import sato_weight, vanishing_profile

    target = sato_weight(ps.atlas.curve)
    report = {}
    for s in ps.atlas.sheets:
        try:
            K = K_characteristic_trigonal(ps, s)
        except ContinuationError:
            continue
        if not K.half_integer:
            continue
        prof = vanishing_profile(ps, K, target)
        low = max((v for w, v in prof.items() if w < target), default=0.0)
        report[s] = (low, K)
        if low < tol and prof.get(target, 0.0) > 1e-3:
            ps.atlas.base_sheet = s
            return s, K
    raise ThetaError(f"no sheet gives a [K] with the expected vanishing order: {report}")


def K_characteristic(ps: PeriodSet) -> Characteristic:
    from .theta import K_characteristic_hyperelliptic

    if ps.atlas.curve.kind == HYPERELLIPTIC:
        return K_characteristic_hyperelliptic(ps)
    return choose_base_sheet(ps)[1]


# -- wp functions -------------------------------------------------------------------------

@dataclass
class WPValues:
    """All wp_{ij} and wp_{ijk} at one point, keyed by sorted gap-weight tuples."""

    u: np.ndarray
    weights: tuple[int, ...]
    two: dict[tuple[int, int], complex]
    three: dict[tuple[int, int, int], complex]
    theta_ratio: float

    def __call__(self, *index: int) -> complex:
        key = tuple(sorted(index))
        if len(key) == 2:
            return self.two[key]
        if len(key) == 3:
            return self.three[key]
        raise ValueError("wp takes two or three indices")


def wp_all(u, ps: PeriodSet, K: Characteristic, tol: float = 1e-14) -> WPValues:
    """wp_ij = kappa_ij - d2 log theta[K], wp_ijk = -d3 log theta[K], at v = omega^-1 u."""
    if ps.kappa is None:
        raise NotImplementedError("wp needs the second kind periods of this curve")
    u = np.asarray(getattr(u, "u", u), dtype=complex)
    params = ThetaParams(ps.tau)
    W = np.linalg.inv(ps.omega)
    # shifting v by lattice vectors multiplies theta by an exponential linear in v
    r, _, _ = reduce_argument(W @ u, params)
    jet = theta_jet(K, r, params, W, tol)
    if abs(jet.value) < SPECIAL_THRESHOLD * jet.scale:
        raise SpecialDivisorError("special divisor: theta[K] vanishes at the Abel image")
    t0, t1, t2, t3 = jet.value, jet.d1 / jet.value, jet.d2 / jet.value, jet.d3 / jet.value
    L2 = t2 - np.outer(t1, t1)
    L3 = (t3 - np.einsum("ij,k->ijk", t2, t1) - np.einsum("ik,j->ijk", t2, t1)
          - np.einsum("jk,i->ijk", t2, t1) + 2 * np.einsum("i,j,k->ijk", t1, t1, t1))
    kappa = ps.kappa
    weights = tuple(ps.atlas.curve.gaps)
    g = len(weights)
    two = {(weights[i], weights[j]): complex(kappa[i, j] - L2[i, j]) for i in range(g) for j in range(i, g)}
    three = {(weights[i], weights[j], weights[k]): complex(-L3[i, j, k])
             for i in range(g) for j in range(i, g) for k in range(j, g)}
    return WPValues(u, weights, two, three, abs(t0) / jet.scale)


def wp(u, ps: PeriodSet, K: Characteristic, index, tol: float = 1e-14) -> complex:
    return wp_all(u, ps, K, tol)(*index)


# -- Jacobi inversion -------------------------------------------------------------------

Poly2 = dict[tuple[int, int], complex]  # (i, j) -> coefficient of x^i y^j


def jacobi_polynomials(u, ps: PeriodSet, K: Characteristic, curve: CurveSpec | None = None):
    """The pair of polynomials vanishing on the divisor with Abel image u."""
    curve = curve or ps.atlas.curve
    P = wp_all(u, ps, K)
    g = curve.genus
    if curve.kind == HYPERELLIPTIC:
        R1: Poly2 = {(g, 0): 1.0}
        R2: Poly2 = {(0, 1): 2.0}
        for i in range(1, g + 1):
            R1[(g - i, 0)] = -P(1, 2 * i - 1)
            R2[(g - i, 0)] = P(1, 1, 2 * i - 1)
        return R1, R2
    if curve.s % 3 != 1:
        raise NotImplementedError("Jacobi inversion template implemented for (3, 3m+1) curves")
    m = (curve.s - 1) // 3
    R1 = {(2 * m, 0): 1.0}
    R2 = {(m, 1): 2.0}
    for i in range(1, m + 1):
        R1[(m - i, 1)] = -P(1, 3 * i - 2)
        R2[(m - i, 1)] = P(1, 1, 3 * i - 2) - P(2, 3 * i - 2)
    for i in range(1, 2 * m + 1):
        R1[(2 * m - i, 0)] = -P(1, 3 * i - 1)
        R2[(2 * m - i, 0)] = P(1, 1, 3 * i - 1) - P(2, 3 * i - 1)
    return R1, R2


def _monomials(curve: CurveSpec, count: int):
    s = curve.s
    return [(m.i, m.j) for m in monomial_list(curve.n, s, count)]


def divisor_polynomials(d: Divisor, curve: CurveSpec):
    """Bordered Vandermonde determinants through the points of D, normalised.

    The first uses the g+1 lowest monomials, the second the g lowest and the
    (g+2)-th; they are scaled to leading coefficients 1 and 2.
    """
    g = curve.genus
    if d.degree != g:
        raise ValueError("divisor degree must equal the genus")
    mons = _monomials(curve, g + 2)
    cols1 = mons[:g + 1]
    cols2 = mons[:g] + [mons[g + 1]]
    out = []
    for cols, lead in ((cols1, 1.0), (cols2, 2.0)):
        M = np.array([[p.x ** i * p.y ** j for (i, j) in cols] for p in d.points], dtype=complex)
        cof = []
        for k in range(len(cols)):
            cof.append((-1) ** k * np.linalg.det(np.delete(M, k, axis=1)))
        top = cof[-1]
        if abs(top) < 1e-13 * max(1.0, float(np.max(np.abs(cof)))):
            raise SpecialDivisorError("singular determinant: divisor is special")
        out.append({c: complex(lead * v / top) for c, v in zip(cols, cof)})
    return tuple(out)


def coefficient_mismatch(a: Poly2, b: Poly2) -> float:
    """Largest coefficient difference, relative to max(1, |coefficient|)."""
    keys = set(a) | set(b)
    return max(abs(a.get(k, 0) - b.get(k, 0)) / max(1.0, abs(b.get(k, 0))) for k in keys)


def round_trip(d: Divisor, ps: PeriodSet, K: Characteristic, u=None) -> float:
    """Agreement between polynomials from wp at A(D) and those built from D."""
    u = abel_divisor(d, ps) if u is None else u
    J = jacobi_polynomials(u, ps, K)
    D = divisor_polynomials(d, ps.atlas.curve)
    return max(coefficient_mismatch(J[0], D[0]), coefficient_mismatch(J[1], D[1]))
