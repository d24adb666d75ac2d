"""Radical solution branches, discontinuity contours and the sheet atlas.

Solutions of the curve equation are written with principal radicals, so each
radical label (a sign for hyperelliptic curves, an index 1..3 for trigonal
ones) is discontinuous across the contours arg Delta = 0 and arg upsilon_+ = 0.
The atlas follows the analytic continuation of every sheet along a fixed
polygonal path through the sorted branch points and records which radical
label represents the sheet on each piece of every segment.

Labels are 0-based internally: hyperelliptic 0 <-> s = +1, 1 <-> s = -1;
trigonal k <-> y_{k+1}.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import HYPERELLIPTIC, CurveSpec, Poly, canonicalize, sort_points

log = logging.getLogger(__name__)

OMEGA3 = np.exp(2j * np.pi / 3)
SHEET_NAMES = "abc"


class ContinuationError(RuntimeError):
    pass


# -- principal radicals -------------------------------------------------------

def principal_sqrt(z):
    """Square root with arg in [0, pi): the branch cut sits on arg z = 0."""
    z = np.asarray(z, dtype=complex)
    arg = np.angle(z)
    r = np.sqrt(np.abs(z)) * np.exp(0.5j * arg)
    out = np.where(arg >= 0, r, -r)
    return out if out.ndim else complex(out)


def principal_cbrt(z, a: int = 1):
    """Cube root with arg in [0, 2pi/3) for a = 1, rotated by e^{2(a-1)i pi/3}."""
    z = np.asarray(z, dtype=complex)
    arg = np.angle(z)
    r = np.cbrt(np.abs(z)) * np.exp(1j * arg / 3.0)
    out = np.where(arg >= 0, r, r * OMEGA3)
    if a != 1:
        out = out * OMEGA3 ** (a - 1)
    return out if out.ndim else complex(out)


# -- solution sets ------------------------------------------------------------------

def _snap_real(roots: np.ndarray, real_curve: bool, scale: float) -> np.ndarray:
    if not real_curve:
        return roots
    out = roots.copy()
    eps = 1e-12 * scale
    near_real = np.abs(out.imag) < eps
    out[near_real] = out[near_real].real
    for k in np.flatnonzero(out.imag > 0):
        j = np.argmin(np.abs(out - np.conj(out[k])))
        if j != k and abs(out[j] - np.conj(out[k])) < 1e-8 * scale:
            mid = 0.5 * (out[k] + np.conj(out[j]))
            out[k], out[j] = mid, np.conj(mid)
    return out


class RadicalSolutions:
    """All radical solutions y_label(x) of a curve, evaluated vectorially.

    The discriminant is evaluated in factored form.  ``near`` lets the caller
    supply exact offsets x - e_k for roots the point is known to be close to,
    which keeps square roots accurate up to the branch points.
    """

    def __init__(self, curve: CurveSpec, roots: np.ndarray | None = None):
        self.curve = curve
        self.canon = canonicalize(curve)
        self.n = curve.n
        delta = curve.discriminant
        if roots is None:
            roots = curve.validate().roots
        self.real = bool(np.all(np.concatenate([curve.P.coeffs, curve.Q.coeffs,
                                                 curve.T.coeffs if curve.T is not None else []]).imag == 0))
        scale = max(1.0, float(np.max(np.abs(roots))))
        self.roots = _snap_real(sort_points(roots), self.real, scale)
        self.delta_lead = delta.lead
        self.delta_poly = delta

    # discriminant
    def delta(self, x, near=None):
        x = np.asarray(x, dtype=complex)
        out = np.full(x.shape, self.delta_lead, dtype=complex)
        special = dict(near or ())
        for k, e in enumerate(self.roots):
            out = out * (special[k] if k in special else (x - e))
        return self._realify(x, out)

    def sqrt_delta(self, x, near=None):
        """principal_sqrt(Delta), via logarithms where Delta itself would overflow."""
        x = np.asarray(x, dtype=complex)
        big = np.abs(x) > 1e15
        if not np.any(big):
            return principal_sqrt(self.delta(x, near))
        out = np.empty(x.shape, dtype=complex)
        small = ~big
        if np.any(small):
            sub = [(k, np.broadcast_to(v, x.shape)[small]) for k, v in (near or ())]
            out[small] = principal_sqrt(self.delta(x[small], sub))
        xb = x[big]
        special = {k: np.broadcast_to(v, x.shape)[big] for k, v in (near or ())}
        logmag = np.full(xb.shape, math.log(abs(self.delta_lead)))
        theta = np.full(xb.shape, float(np.angle(self.delta_lead)))
        sign = np.full(xb.shape, 1.0 if self.delta_lead.real > 0 else -1.0)
        for k, e in enumerate(self.roots):
            f = special[k] if k in special else (xb - e)
            logmag = logmag + np.log(np.abs(f))
            theta = theta + np.angle(f)
            if e.imag == 0:
                sign = sign * np.sign(f.real)
        theta = np.angle(np.exp(1j * theta))
        if self.real:
            on_axis = xb.imag == 0
            theta = np.where(on_axis, np.where(sign > 0, 0.0, math.pi), theta)
        r = np.exp(0.5 * logmag + 0.5j * theta)
        out[big] = np.where(theta >= 0, r, -r)
        return out

    def _realify(self, x, v):
        if self.real:
            v = np.where(x.imag == 0, v.real + 0j, v)
        return v

    def _pq(self, x):
        c = self.canon
        return self._realify(x, c.P(x)), self._realify(x, c.Q(x))

    def upsilon(self, x, near=None):
        """upsilon_+ = (P + sqrt Delta)/2, evaluated stably (trigonal only)."""
        P, Q = self._pq(x)
        sd = self.sqrt_delta(x, near)
        return self._upsilon(P, Q, sd)

    @staticmethod
    def _upsilon(P, Q, sd):
        plus = 0.5 * (P + sd)
        minus = 0.5 * (P - sd)
        with np.errstate(divide="ignore", invalid="ignore"):
            alt = Q ** 3 / 27.0 / minus
        return np.where(np.abs(minus) > np.abs(plus), alt, plus)

    def values(self, x, near=None):
        """Array (..., n) of all solutions, column k is label k."""
        x = np.asarray(x, dtype=complex)
        y, _ = self.values_and_dfdy(x, near)
        return y

    def values_and_dfdy(self, x, near=None):
        """Solutions and the matching dF/dy values, both shaped (..., n)."""
        x = np.asarray(x, dtype=complex)
        sd = self.sqrt_delta(x, near)
        shift = self.curve.y_shift(x) if not self.curve.is_canonical else 0.0
        if self.curve.kind == HYPERELLIPTIC:
            y = np.stack([sd, -sd], axis=-1)
            dfdy = -2.0 * y
            if not self.curve.is_canonical:
                y = y + np.asarray(shift)[..., None]
            return y, dfdy
        P, Q = self._pq(x)
        ups = self._upsilon(P, Q, sd)
        q1 = principal_cbrt(ups)
        q = np.stack([q1, q1 * OMEGA3, q1 * OMEGA3 ** 2], axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            y = q + (Q[..., None] / 3.0) / q
        d01 = y[..., 0] - y[..., 1]
        d02 = y[..., 0] - y[..., 2]
        d12 = y[..., 1] - y[..., 2]
        dfdy = np.stack([-d01 * d02, d01 * d12, -d02 * d12], axis=-1)
        if not self.curve.is_canonical:
            y = y + np.asarray(shift)[..., None]
        return y, dfdy

    def label_of(self, x: complex, y: complex, tol: float = 1e-7) -> int:
        vals = self.values(np.array([x]))[0]
        d = np.abs(vals - y)
        k = int(np.argmin(d))
        scale = max(1.0, float(np.max(np.abs(vals))))
        if d[k] > tol * scale:
            raise ValueError(f"point ({x}, {y}) is not on the curve (distance {d[k]:.3e})")
        return k


def hyperelliptic_y(curve: CurveSpec, x, sign: int = 1, solutions: RadicalSolutions | None = None):
    """y_s(x) = Q(x)/2 + s * principal_sqrt(Delta(x))."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if solutions is None:
        x = np.asarray(x, dtype=complex)
        delta = curve.discriminant(x)
        out = 0.5 * curve.Q(x) + sign * principal_sqrt(delta)
        return out
    return solutions.values(x)[..., 0 if sign == 1 else 1]


def trigonal_y(curve: CurveSpec, x, a: int, solutions: RadicalSolutions | None = None):
    """Cardano form y_a = q_a + Q/(3 q_a) (+ T/3 for generic models), a in 1..3."""
    if a not in (1, 2, 3):
        raise ValueError("a must be 1, 2 or 3")
    if solutions is None:
        x = np.asarray(x, dtype=complex)
        c = canonicalize(curve)
        P, Q = c.P(x), c.Q(x)
        sd = principal_sqrt(curve.discriminant(x))
        ups = RadicalSolutions._upsilon(P, Q, sd)
        q = principal_cbrt(ups, a)
        if np.any(np.abs(q) < 1e-300):
            raise FloatingPointError("cube root underflow: curve is near degenerate here")
        out = q + Q / (3.0 * q)
        if not curve.is_canonical:
            out = out + curve.y_shift(x)
        return out
    return solutions.values(x)[..., a - 1]


# -- continuation -------------------------------------------------------------

@dataclass(frozen=True)
class Crossing:
    param: float
    x: complex
    contour: str  # "Gamma" or "UpsilonPlus"
    before: int
    after: int


@dataclass
class Track:
    start_label: int
    end_label: int
    breaks: list[float]
    labels: list[int]
    crossings: list[Crossing]
    steps: int
    end_value: complex


def _classify(sol: RadicalSolutions, x: complex, before: int, after: int,
              x_before: complex, x_after: complex) -> str:
    d_b = sol.delta(np.array([x_before]))[0]
    d_a = sol.delta(np.array([x_after]))[0]
    gamma = d_b.imag * d_a.imag <= 0 and (d_b.real > 0 or d_a.real > 0)
    if sol.n == 2:
        if not gamma:
            raise ContinuationError(f"sign change at x={x} without crossing Gamma")
        return "Gamma"
    u_b = sol.upsilon(np.array([x_before]))[0]
    u_a = sol.upsilon(np.array([x_after]))[0]
    ups = u_b.imag * u_a.imag <= 0 and (u_b.real > 0 or u_a.real > 0)
    cyc_up = after == (before + 1) % 3
    cyc_down = after == (before - 1) % 3
    if ups and not gamma:
        forward = np.angle(u_b) < 0 <= np.angle(u_a)
        if (forward and cyc_up) or (not forward and cyc_down):
            return "UpsilonPlus"
        raise ContinuationError(f"label change {before}->{after} at x={x} contradicts the (123) rule")
    if gamma and not ups:
        return "Gamma"
    if gamma and ups:
        return "Gamma+UpsilonPlus"
    raise ContinuationError(f"label change {before}->{after} at x={x} without a contour crossing")


def track(sol: RadicalSolutions, path: Callable[[np.ndarray], np.ndarray], start_label: int,
          t0: float = 0.0, t1: float = 1.0, *, h0: float = 1 / 32, ratio: float = 3.0,
          min_step: float = 1e-13, y0: complex | None = None) -> Track:
    """Continue the solution with label ``start_label`` at ``path(t0)`` to ``path(t1)``.

    Nearest-neighbour matching with step halving until the matched distance is
    ``ratio`` times smaller than the distance to every other solution.  When
    ``y0`` is given the starting label is the solution nearest to it.  Label
    changes are located by bisection and classified against the contours.
    """
    t = t0
    span = t1 - t0
    h = h0 * span
    Y = sol.values(path(np.array([t])))[0]
    lab = start_label if y0 is None else int(np.argmin(np.abs(Y - y0)))
    start_label = lab
    y = Y[lab]
    breaks: list[float] = []
    labels = [lab]
    crossings: list[Crossing] = []
    steps = 0
    while t < t1:
        tn = min(t + h, t1)
        Yn = sol.values(path(np.array([tn])))[0]
        d = np.abs(Yn - y)
        j = int(np.argmin(d))
        others = np.delete(d, j)
        if others.size and d[j] * ratio > others.min():
            h *= 0.5
            if h < min_step * abs(span):
                raise ContinuationError(f"ambiguous continuation near t={t:.6g}, x={path(np.array([t]))[0]}")
            continue
        steps += 1
        if j != lab:
            lo, hi, ylo = t, tn, y
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                Ym = sol.values(path(np.array([mid])))[0]
                k = int(np.argmin(np.abs(Ym - ylo)))
                if k == lab:
                    lo, ylo = mid, Ym[k]
                else:
                    hi = mid
            Yh = sol.values(path(np.array([hi])))[0]
            newlab = int(np.argmin(np.abs(Yh - ylo)))
            if newlab == lab:
                newlab = j
            xs = path(np.array([lo, hi]))
            kind = _classify(sol, 0.5 * (xs[0] + xs[1]), lab, newlab, xs[0], xs[1])
            breaks.append(0.5 * (lo + hi))
            labels.append(newlab)
            crossings.append(Crossing(0.5 * (lo + hi), complex(0.5 * (xs[0] + xs[1])), kind, lab, newlab))
            lab = newlab
            t, y = hi, Yh[newlab]
            continue
        t, y, lab = tn, Yn[j], j
        h = min(h * 1.6, h0 * span)
    return Track(start_label, lab, breaks, labels, crossings, steps, complex(y))


def line(a: complex, b: complex):
    return lambda t: a + (b - a) * t


def arc(center: complex, radius: float, th0: float, th1: float):
    return lambda t: center + radius * np.exp(1j * (th0 + (th1 - th0) * t))


# -- atlas ------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchPoint:
    index: int  # 1-based
    e: complex
    h: complex
    pair: tuple[int, int] | None  # 0-based labels coinciding at e (trigonal)


@dataclass(frozen=True)
class LabelRun:
    """Labels along a directed straight piece; ``breaks`` are in piece units."""

    labels: tuple[int, ...]
    breaks: tuple[float, ...] = ()

    @property
    def start(self) -> int:
        return self.labels[0]

    @property
    def end(self) -> int:
        return self.labels[-1]

    def reversed(self, length: float = 1.0) -> "LabelRun":
        return LabelRun(self.labels[::-1], tuple(length - b for b in self.breaks[::-1]))


@dataclass(frozen=True)
class PathSegment:
    """Straight piece from ``a`` to ``b``; rays have ``b = None`` and a direction.

    ``a_id``/``b_id`` are 1-based branch indices, 0 for infinity and -1 for a
    regular point.  Rays are stored oriented away from their branch point and
    parametrised by distance.
    """

    a: complex
    b: complex | None
    a_id: int
    b_id: int
    kind: str  # "finite-line", "left-ray", "right-ray"
    direction: complex = 0j

    @property
    def length(self) -> float:
        return abs(self.b - self.a) if self.b is not None else math.inf

    def point(self, t):
        if self.b is None:
            return self.a + self.direction * t
        return self.a + (self.b - self.a) * t


@dataclass
class SheetAtlas:
    curve: CurveSpec
    solutions: RadicalSolutions
    points: list[BranchPoint]
    base_path: list[PathSegment]  # left ray (outward), finite lines, right ray (outward)
    sheets: dict[str, list[LabelRun]]  # per base-path piece, in path direction
    crossings: list[tuple[str, int, Crossing]]
    r_inf: float
    detour: float
    arcs: dict[str, list[tuple[int, int]]] = field(default_factory=dict)  # (label in, label out) per vertex
    base_sheet: str = "a"

    @property
    def n_sheets(self) -> int:
        return self.curve.n

    @property
    def N(self) -> int:
        return len(self.points)

    @property
    def e(self) -> np.ndarray:
        return np.array([p.e for p in self.points])

    def sequence(self, sheet: str) -> list[str]:
        """Printable label sequence, e.g. ['1', '3-1', ...] or ['+', '-', ...]."""
        out = []
        for run in self.sheets[sheet]:
            if self.curve.kind == HYPERELLIPTIC:
                out.append("-".join("+" if k == 0 else "-" for k in run.labels))
            else:
                out.append("-".join(str(k + 1) for k in run.labels))
        return out

    def signs(self, sheet: str = "a") -> list[int]:
        if self.curve.kind != HYPERELLIPTIC:
            raise ValueError("signs are defined for hyperelliptic atlases")
        out = []
        for run in self.sheets[sheet]:
            if len(run.labels) != 1:
                raise ValueError("segment carries a sign change")
            out.append(1 if run.start == 0 else -1)
        return out

    def cut_outgoing(self, i: int) -> bool:
        """Whether the cut at branch point i (1-based) leaves along the outgoing segment."""
        if self.curve.kind == HYPERELLIPTIC:
            return i % 2 == 1
        return i % 2 == 0

    def direction_in(self, i: int) -> float:
        """Angle at e_i pointing back along the incoming piece."""
        if i == 1:
            return math.pi
        return float(np.angle(self.points[i - 2].e - self.points[i - 1].e))

    def direction_out(self, i: int) -> float:
        if i == self.N:
            return 0.0
        return float(np.angle(self.points[i].e - self.points[i - 1].e))

    def label_near(self, sheet: str, i: int, phi: float) -> int:
        """Radical label of ``sheet`` just off e_i in direction ``phi``.

        The value is continued around e_i from the base path without crossing
        the cut attached to e_i.
        """
        lab_in, lab_out = self.arcs[sheet][i - 1]
        th_in = self.direction_in(i)
        th_out = self.direction_out(i)
        sweep = (th_out - th_in) % (2 * math.pi)
        rel = (phi - th_in) % (2 * math.pi)
        e = self.points[i - 1].e
        r = self.detour
        if rel <= sweep:
            start, th0, th1 = lab_in, th_in, th_in + rel
        elif self.cut_outgoing(i):
            start, th0, th1 = lab_in, th_in, th_in + rel - 2 * math.pi
        else:
            start, th0, th1 = lab_out, th_out, th_out + (rel - sweep)
        if abs(th1 - th0) < 1e-15:
            return start
        return track(self.solutions, arc(e, r, th0, th1), start).end_label

    def abel_prefix(self, i: int) -> list[tuple[int, bool]]:
        """Base-path pieces (index, outward ray flag) leading from infinity to e_i."""
        return [(k, k == 0) for k in range(i)]

    def summary(self) -> dict:
        return {
            "branch_points": [[p.e.real, p.e.imag] for p in self.points],
            "heights": [[p.h.real, p.h.imag] for p in self.points],
            "pairs": [None if p.pair is None else [p.pair[0] + 1, p.pair[1] + 1] for p in self.points],
            "sheets": {k: self.sequence(k) for k in self.sheets},
            "crossings": [{"sheet": s, "segment": seg, "x": [c.x.real, c.x.imag], "contour": c.contour,
                           "from": c.before + 1, "to": c.after + 1} for s, seg, c in self.crossings],
        }


def _branch_points(sol: RadicalSolutions) -> list[BranchPoint]:
    pts = []
    for k, e in enumerate(sol.roots):
        if sol.n == 2:
            h = complex(0.5 * sol.curve.Q(e)) if not sol.curve.is_canonical else 0j
            pts.append(BranchPoint(k + 1, complex(e), h, (0, 1)))
            continue
        # evaluate slightly off the point; the coalescing pair is the closest pair
        y = sol.values(np.array([e]), near=[(k, np.array([0j]))])[0]
        d = {(0, 1): abs(y[0] - y[1]), (0, 2): abs(y[0] - y[2]), (1, 2): abs(y[1] - y[2])}
        pair = min(d, key=d.get)
        h = complex(0.5 * (y[pair[0]] + y[pair[1]]))
        pts.append(BranchPoint(k + 1, complex(e), h, pair))
    return pts


def build_atlas(curve: CurveSpec, *, detour_factor: float = 1e-3, solutions: RadicalSolutions | None = None) -> SheetAtlas:
    """Sorted branch points, base polygonal path and per-sheet label sequences."""
    sol = solutions or RadicalSolutions(curve)
    pts = _branch_points(sol)
    e = np.array([p.e for p in pts])
    N = len(e)
    dists = np.abs(e[:, None] - e[None, :])
    np.fill_diagonal(dists, np.inf)
    dmin = float(dists.min())
    if (np.diff(e.real) < 1e-10 * max(1.0, np.max(np.abs(e)))).any():
        log.debug("tie in the real parts of branch points; ordered by imaginary part")
    r = detour_factor * dmin
    r_inf = 1e3 * max(1.0, float(np.max(np.abs(e))))
    base: list[PathSegment] = [PathSegment(e[0], None, 1, 0, "left-ray", -1.0 + 0j)]
    for i in range(N - 1):
        base.append(PathSegment(e[i], e[i + 1], i + 1, i + 2, "finite-line"))
    base.append(PathSegment(e[-1], None, N, 0, "right-ray", 1.0 + 0j))

    sheets: dict[str, list[LabelRun]] = {}
    arcs: dict[str, list[tuple[int, int]]] = {}
    crossings: list[tuple[str, int, Crossing]] = []
    for s in range(sol.n):
        name = SHEET_NAMES[s]
        runs: list[LabelRun] = []
        vertex_labels: list[tuple[int, int]] = []
        # left ray, continued from far away towards e_1
        tr = track(sol, line(e[0] - r_inf, e[0] - r), s)
        runs.append(LabelRun(tuple(tr.labels), tuple(r_inf - b * (r_inf - r) for b in tr.breaks)))
        crossings += [(name, 0, c) for c in tr.crossings]
        lab, yv = tr.end_label, tr.end_value
        for i in range(N):
            th_in = math.pi if i == 0 else float(np.angle(e[i - 1] - e[i]))
            th_out = 0.0 if i == N - 1 else float(np.angle(e[i + 1] - e[i]))
            sweep = (th_out - th_in) % (2 * math.pi)
            tr = track(sol, arc(e[i], r, th_in, th_in + sweep), lab, y0=yv)
            crossings += [(name, -(i + 1), c) for c in tr.crossings]
            vertex_labels.append((tr.start_label, tr.end_label))
            lab, yv = tr.end_label, tr.end_value
            if i == N - 1:
                break
            L = abs(e[i + 1] - e[i])
            tr = track(sol, line(e[i], e[i + 1]), lab, r / L, 1 - r / L, y0=yv)
            runs.append(LabelRun(tuple(tr.labels), tuple(tr.breaks)))
            crossings += [(name, i + 1, c) for c in tr.crossings]
            lab, yv = tr.end_label, tr.end_value
        tr = track(sol, line(e[-1] + r, e[-1] + r_inf), lab, y0=yv)
        runs.append(LabelRun(tuple(tr.labels), tuple(r + b * (r_inf - r) for b in tr.breaks)))
        crossings += [(name, N, c) for c in tr.crossings]
        sheets[name] = runs
        arcs[name] = vertex_labels
    atlas = SheetAtlas(curve, sol, pts, base, sheets, crossings, r_inf, r, arcs)
    _check_atlas(atlas)
    return atlas


def polygon_labels(atlas: SheetAtlas, ids: Sequence[int], label: int,
                   turn: str = "ccw") -> list[tuple[int, int, tuple[int, ...]]]:
    """Continue one solution along a polygon through branch points.

    ``ids`` are 1-based branch indices; a leading or trailing 0 stands for the
    horizontal ray towards the nearest end of the real axis.  Every vertex is
    passed by a small counter-clockwise arc, as on the base path, or by the
    shorter of the two arcs when ``turn="short"``; a sequence gives "ccw",
    "cw" or "short" per interior vertex.  Returns
    (start, end, labels) per edge; an edge starting at infinity reports the
    far label first.
    """
    sol = atlas.solutions
    e = atlas.e
    r = atlas.detour
    R = atlas.r_inf
    pts = list(ids)
    if pts[0] == 0 and len(pts) < 2 or pts[-1] == 0 and len(pts) < 2:
        raise ValueError("polygon needs at least one branch point")

    def far_point(i):  # infinity next to branch point i
        return e[i - 1] + (R if e[i - 1].real >= np.mean(e.real) else -R)

    def pos(k):
        return far_point(pts[1]) if k == 0 and pts[0] == 0 else (
            far_point(pts[-2]) if k == len(pts) - 1 and pts[-1] == 0 else e[pts[k] - 1])

    out = []
    yv = None
    lab = label
    for k in range(len(pts) - 1):
        a, b = pos(k), pos(k + 1)
        L = abs(b - a)
        t0 = 0.0 if pts[k] == 0 else r / L
        t1 = 1.0 if pts[k + 1] == 0 else 1 - r / L
        tr = track(sol, line(a, b), lab, t0, t1, y0=yv)
        out.append((pts[k], pts[k + 1], tuple(tr.labels)))
        lab, yv = tr.end_label, tr.end_value
        if k + 1 < len(pts) - 1:
            c = pos(k + 1)
            th_in = float(np.angle(a - c))
            th_out = float(np.angle(pos(k + 2) - c))
            sweep = (th_out - th_in) % (2 * math.pi)
            how = turn if isinstance(turn, str) else turn[k]
            if how == "cw" or (how == "short" and sweep > math.pi):
                sweep -= 2 * math.pi
            tr = track(sol, arc(c, r, th_in, th_in + sweep), lab, y0=yv)
            lab, yv = tr.end_label, tr.end_value
    return out


def turns_for_labels(atlas: SheetAtlas, ids: Sequence[int], label: int,
                     edge_labels: Sequence[tuple[int, ...]]) -> list[str]:
    """Vertex turns under which the continuation follows the given label runs edge by edge."""
    turns: list[str] = []
    for k in range(len(ids) - 2):
        for how in ("ccw", "cw"):
            got = polygon_labels(atlas, ids[:k + 3], label, turns + [how])
            if got[k + 1][2] == tuple(edge_labels[k + 1]):
                turns.append(how)
                break
        else:
            raise ContinuationError(f"no turn at vertex {ids[k + 1]} continues with labels {edge_labels[k + 1]}")
    if polygon_labels(atlas, ids[:2], label)[0][2] != tuple(edge_labels[0]):
        raise ContinuationError("first edge does not carry the requested labels")
    return turns


def _check_atlas(atlas: SheetAtlas) -> None:
    names = list(atlas.sheets)
    nseg = len(atlas.base_path)
    for k in range(nseg):
        starts = sorted(atlas.sheets[s][k].start for s in names)
        if starts != list(range(atlas.n_sheets)):
            raise ContinuationError(f"sheet labels on segment {k} do not partition the solutions")


# -- sheet identification -------------------------------------------------------

@dataclass(frozen=True)
class SheetLocation:
    sheet: str
    anchor: int  # 1-based branch index
    run: LabelRun
    label: int
    sheets_at_point: tuple[str, ...] = ()


def segment_run(sol: RadicalSolutions, a: complex, b: complex, start_label: int,
                offset: float = 1e-7) -> Track:
    """Labels along the straight segment [a, b] starting just after ``a``."""
    return track(sol, line(a, b), start_label, offset, 1.0)


def identify_sheet(atlas: SheetAtlas, x: complex, y: complex, candidates: int = 3,
                   tol: float = 1e-7) -> SheetLocation:
    """Sheet carrying the point (x, y), with the anchor branch point used to reach it."""
    sol = atlas.solutions
    e = atlas.e
    dist = np.abs(e - x)
    scale = max(1.0, float(np.max(np.abs(e))))
    hit = np.flatnonzero(dist < 1e-12 * scale)
    if hit.size:
        i = int(hit[0]) + 1
        p = atlas.points[i - 1]
        labs = p.pair if sol.n == 3 else (0, 1)
        on = tuple(s for s in atlas.sheets if atlas.arcs[s][i - 1][0] in labs) or tuple(atlas.sheets)
        return SheetLocation(on[0], i, LabelRun((labs[0],)), labs[0], on)
    label = sol.label_of(x, y, tol)
    order = np.argsort(dist)
    fallback = None
    for idx in order[:candidates]:
        i = int(idx) + 1
        phi = float(np.angle(x - e[idx]))
        for s in atlas.sheets:
            start = atlas.label_near(s, i, phi)
            tr = segment_run(sol, e[idx], x, start)
            if tr.end_label != label:
                continue
            loc = SheetLocation(s, i, LabelRun(tuple(tr.labels), tuple(tr.breaks)), label)
            if len(tr.labels) == 1:
                return loc
            fallback = fallback or loc
            break
    if fallback is not None:
        return fallback
    raise ContinuationError(f"no sheet reaches ({x}, {y}) from the nearest anchors")


# -- contour sampling -------------------------------------------------------------

def contour_samples(atlas_or_curve, which: str = "Gamma", window: Sequence[float] = (-1, 1, -1, 1),
                    resolution: int = 400) -> list[np.ndarray]:
    """Polylines of {arg Delta = 0} or {arg upsilon_+ = 0} inside a window.

    ``window`` is (xmin, xmax, ymin, ymax).  Zero lines of the imaginary part
    are extracted by marching squares and cut wherever the real part is not
    positive, so only the arg = 0 branches (and no jump artefacts) survive.
    """
    import contourpy

    sol = atlas_or_curve.solutions if isinstance(atlas_or_curve, SheetAtlas) else RadicalSolutions(atlas_or_curve)
    if which not in ("Gamma", "UpsilonPlus"):
        raise ValueError("which must be 'Gamma' or 'UpsilonPlus'")
    if which == "UpsilonPlus" and sol.n != 3:
        raise ValueError("UpsilonPlus exists on trigonal curves only")
    x0, x1, y0, y1 = map(float, window)
    if not (x1 > x0 and y1 > y0):
        return []
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    X, Y = np.meshgrid(xs, ys)
    Z = X + 1j * Y
    F = sol.delta(Z) if which == "Gamma" else sol.upsilon(Z)
    lines = contourpy.contour_generator(xs, ys, F.imag).lines(0.0)
    out: list[np.ndarray] = []
    cell = max((x1 - x0), (y1 - y0)) / resolution
    for ln in lines:
        if len(ln) < 2:
            continue
        z = ln[:, 0] + 1j * ln[:, 1]
        Fz = sol.delta(z) if which == "Gamma" else sol.upsilon(z)
        good = (Fz.real > 0) & (np.abs(np.angle(Fz)) < 0.2)
        idx = np.flatnonzero(good)
        if idx.size == 0:
            continue
        splits = np.flatnonzero(np.diff(idx) > 1) + 1
        for chunk in np.split(idx, splits):
            if chunk.size >= 2:
                seg = z[chunk]
                if np.max(np.abs(np.diff(seg))) < 4 * cell:
                    out.append(np.column_stack([seg.real, seg.imag]))
                else:
                    jumps = np.flatnonzero(np.abs(np.diff(seg)) >= 4 * cell) + 1
                    for piece in np.split(seg, jumps):
                        if piece.size >= 2:
                            out.append(np.column_stack([piece.real, piece.imag]))
    return out


def real_branch_residual(atlas: SheetAtlas, samples: int = 16) -> float:
    """Worst relative deviation of i*conj(y_a) from (-i)^j sqrt|P| on the real segments.

    Only meaningful for canonical hyperelliptic curves with all branch points
    real; segment j runs from e_j to e_{j+1}, with j = 0 the left ray and the
    last index the right ray.
    """
    curve = atlas.curve
    if curve.kind != HYPERELLIPTIC or not curve.is_canonical:
        raise ValueError("needs a canonical hyperelliptic curve")
    e = atlas.e
    if np.max(np.abs(e.imag)) > 1e-12 * max(1.0, float(np.max(np.abs(e)))):
        raise ValueError("branch points are not all real")
    e = e.real
    sol = atlas.solutions
    span = float(e[-1] - e[0])
    worst = 0.0
    for j, run in enumerate(atlas.sheets["a"]):
        if len(run.labels) != 1:
            return math.inf
        lo = e[0] - span if j == 0 else e[j - 1]
        hi = e[-1] + span if j == len(e) else e[j]
        x = lo + (hi - lo) * (np.arange(1, samples + 1) / (samples + 1))
        y = sol.values(x.astype(complex))[:, run.start]
        ref = (-1j) ** j * np.sqrt(np.abs(curve.P(x)))
        worst = max(worst, float(np.max(np.abs(1j * np.conj(y) - ref) / np.abs(ref))))
    return worst
