"""Double-exponential quadrature for differentials with branch-point endpoints.

Integrands are called as ``f(x, near)`` where ``near`` lists exact offsets
``(root_index, x - e_root)``.  Passing those through to the factored
discriminant keeps ``(x - e)^(-1/2)`` singularities accurate down to the
smallest node distances tanh-sinh produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .sheets import LabelRun, PathSegment, RadicalSolutions

TOL = 1e-11
MAX_LEVEL = 12
START_LEVEL = 3


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray
    error: float
    level: int
    evaluations: int


@lru_cache(maxsize=None)
def _ts_nodes(level: int, odd_only: bool):
    """Tanh-sinh nodes on (0, 1): (s, distance to 0, distance to 1, weight)."""
    h = 2.0 ** -level
    kmax = int(math.ceil(4.5 / h))
    k = np.arange(-kmax, kmax + 1)
    if odd_only:
        k = k[k % 2 != 0]
    t = k * h
    u = 0.5 * math.pi * np.sinh(t)
    w = 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2 * h * 0.5
    # endpoint distances without cancellation: (1 - tanh|u|)/2 = 1/(e^{2|u|} + 1)
    small = 1.0 / (np.exp(2.0 * np.abs(u)) + 1.0)
    big = 1.0 - small
    d0 = np.where(u < 0, small, big)
    d1 = np.where(u < 0, big, small)
    keep = (w > 1e-300) & (small > 0)
    return d0[keep], d0[keep], d1[keep], w[keep]


@lru_cache(maxsize=None)
def _es_nodes(level: int, odd_only: bool):
    """Exp-sinh nodes on (0, inf): (t, weight)."""
    h = 2.0 ** -level
    kmax = int(math.ceil(5.0 / h))
    k = np.arange(-kmax, kmax + 1)
    if odd_only:
        k = k[k % 2 != 0]
    tau = k * h
    t = np.exp(0.5 * math.pi * np.sinh(tau))
    w = t * 0.5 * math.pi * np.cosh(tau) * h
    keep = (t > 1e-200) & (t < 1e200)
    return t[keep], w[keep]


def _refine(step: Callable[[int, bool], tuple[np.ndarray, int]], tol: float, max_level: int) -> QuadResult:
    total, nev = step(START_LEVEL, False)
    estimate = total * 2.0 ** -START_LEVEL
    for level in range(START_LEVEL + 1, max_level + 1):
        add, n = step(level, True)
        nev += n
        total = total + add
        new = total * 2.0 ** -level
        err = float(np.max(np.abs(new - estimate)))
        estimate = new
        if err < tol and level >= START_LEVEL + 2:
            return QuadResult(new, err, level, nev)
    raise QuadratureError(f"no convergence by level {max_level} (last change {err:.3e})")


def tanh_sinh(f, a: complex, b: complex, *, a_root: int | None = None, b_root: int | None = None,
              tol: float = TOL, max_level: int = MAX_LEVEL) -> QuadResult:
    """Integrate vector-valued ``f(x, near)`` over the straight segment [a, b]."""
    L = b - a

    def step(level, odd):
        s, d0, d1, w = _ts_nodes(level, odd)
        x = np.where(d0 < d1, a + L * d0, b - L * d1)
        near = []
        if a_root is not None:
            near.append((a_root, L * d0))
        if b_root is not None:
            near.append((b_root, -L * d1))
        vals = np.asarray(f(x, near))
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("non-finite integrand on the segment")
        # weights above are for spacing h; rescale to unit spacing for _refine
        return (vals * (w * 2.0 ** level)[:, None]).sum(axis=0) * L, len(x)

    return _refine(step, tol, max_level)


def exp_sinh(f, a: complex, direction: complex, *, a_root: int | None = None, t0: float = 0.0,
             tol: float = TOL, max_level: int = MAX_LEVEL, t_max: float = 1e45) -> QuadResult:
    """Integrate ``f`` along the ray a + direction*t, t in (t0, inf)."""
    direction = direction / abs(direction)

    def step(level, odd):
        t, w = _es_nodes(level, odd)
        keep = t0 + t <= t_max
        t, w = t[keep], w[keep]
        x = a + direction * (t0 + t)
        near = [(a_root, direction * (t0 + t))] if a_root is not None else []
        vals = np.asarray(f(x, near))
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("non-finite integrand on the ray")
        return (vals * (w * 2.0 ** level)[:, None]).sum(axis=0) * direction, len(x)

    return _refine(step, tol, max_level)


@dataclass(frozen=True)
class EndAnchor:
    """Branch endpoint whose nearby nodes take their labels by continuity.

    Within ``radius`` of a branch point the principal radicals can swap labels
    on rounding noise (a contour leaving the point along the segment does
    this), so those nodes are matched to ``y_ref``, all solutions at distance
    ``radius`` where the label is known from tracking.
    """

    root: int
    e: complex
    y_ref: np.ndarray
    radius: float


@dataclass(frozen=True)
class FarAnchor:
    """Far part of a ray, where nodes keep the phase of the radical they had at ``radius``.

    Along a ray the discriminant can approach its cut like 1/t^2, so beyond
    about 1e8 the principal radicals pick sheets from rounding noise.  The
    radical part y - shift barely turns there while the sheets stay
    2 pi / n apart in phase.
    """

    origin: complex
    unit_ref: np.ndarray  # radical parts at distance ``radius``, normalised to modulus 1
    radius: float


def _radical_part(sol: RadicalSolutions, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if sol.curve.is_canonical:
        return y
    return y - np.asarray(sol.curve.y_shift(x))[..., None]


def _continue_from(Y: np.ndarray, y_ref: np.ndarray) -> np.ndarray:
    """Index array (N, n): column k of Y[idx] continues y_ref[k] towards the branch point."""
    n = len(y_ref)
    d = np.abs(y_ref[:, None] - y_ref[None, :]) + np.diag(np.full(n, np.inf))
    i, j = divmod(int(np.argmin(d)), n)  # the coalescing pair
    idx = np.tile(np.arange(n), (len(Y), 1))
    rest = [k for k in range(n) if k not in (i, j)]
    if rest:  # the third solution stays away from the others: nearest value
        t = rest[0]
        kt = np.argmin(np.abs(Y - y_ref[t]), axis=1)
        pairs = np.array([[a for a in range(3) if a != k] for k in range(3)])[kt]
        idx[:, t] = kt
    else:
        pairs = np.tile([0, 1], (len(Y), 1))
    # the pair difference behaves like sqrt(x - e): its phase is frozen along a straight approach
    rows = np.arange(len(Y))
    diff = Y[rows, pairs[:, 0]] - Y[rows, pairs[:, 1]]
    same = (diff * np.conj(y_ref[i] - y_ref[j])).real >= 0
    idx[:, i] = np.where(same, pairs[:, 0], pairs[:, 1])
    idx[:, j] = np.where(same, pairs[:, 1], pairs[:, 0])
    return idx


@dataclass(frozen=True)
class Integrand:
    """Differential basis numerators over dF/dy on one radical label."""

    solutions: RadicalSolutions
    numerators: Callable[[np.ndarray, np.ndarray], np.ndarray]  # (x, y) -> (N, g)

    def __call__(self, label: int, anchors: tuple[EndAnchor, ...] = ()):
        sol = self.solutions

        def f(x, near):
            y, dfdy = sol.values_and_dfdy(x, near)
            ys, ds = y[..., label], dfdy[..., label]
            offsets = dict(near)
            for an in anchors:
                if isinstance(an, FarAnchor):
                    far = np.abs(x - an.origin) > an.radius
                    if np.any(far):
                        R = _radical_part(sol, x[far], y[far])
                        idx = np.argmin(np.abs(R / np.abs(R) - an.unit_ref[label]), axis=1)
                        rows = np.arange(int(far.sum()))
                        ys = ys.copy()
                        ds = ds.copy()
                        ys[far] = y[far][rows, idx]
                        ds[far] = dfdy[far][rows, idx]
                    continue
                dist = np.abs(offsets[an.root]) if an.root in offsets else np.abs(x - an.e)
                close = dist < an.radius
                if np.any(close):
                    idx = _continue_from(y[close], an.y_ref)[:, label]
                    rows = np.arange(int(close.sum()))
                    ys = ys.copy()
                    ds = ds.copy()
                    ys[close] = y[close][rows, idx]
                    ds[close] = dfdy[close][rows, idx]
            return self.numerators(x, ys) / ds[:, None]

        return f

    def anchor(self, root: int | None, e: complex, toward: complex, radius: float) -> tuple[EndAnchor, ...]:
        """Anchor at branch point ``e`` using the solutions at distance ``radius`` towards ``toward``."""
        if root is None or radius <= 0:
            return ()
        u = (toward - e) / abs(toward - e)
        return (EndAnchor(root, e, self.solutions.values(np.array([e + radius * u]))[0], radius),)


    def far_anchor(self, origin: complex, direction: complex, radius: float) -> tuple[FarAnchor, ...]:
        if radius <= 0:
            return ()
        x = np.array([origin + radius * direction / abs(direction)])
        R = _radical_part(self.solutions, x, self.solutions.values(x))[0]
        return (FarAnchor(origin, R / np.abs(R), radius),)


def _root_index(pid: int) -> int | None:
    return pid - 1 if pid > 0 else None


def integrate_segment(integrand: Integrand, segment: PathSegment, run: LabelRun, *,
                      tol: float = TOL, max_level: int = MAX_LEVEL, anchor_radius: float = 0.0) -> QuadResult:
    """Integral along a finite segment whose labels follow ``run`` (breaks in [0,1]).

    ``anchor_radius`` is the distance from a branch endpoint where tracking of
    ``run`` started; closer nodes are labelled by continuity.
    """
    if segment.b is None:
        raise ValueError("use integrate_ray for rays")
    cuts = [0.0, *run.breaks, 1.0]
    total = 0
    err = 0.0
    lev = 0
    nev = 0
    for k, lab in enumerate(run.labels):
        pa = segment.a if k == 0 else segment.point(cuts[k])
        pb = segment.b if k == len(run.labels) - 1 else segment.point(cuts[k + 1])
        ra = _root_index(segment.a_id) if k == 0 else None
        rb = _root_index(segment.b_id) if k == len(run.labels) - 1 else None
        anchors = (integrand.anchor(ra, segment.a, segment.b, anchor_radius)
                   + integrand.anchor(rb, segment.b, segment.a, anchor_radius))
        r = tanh_sinh(integrand(lab, anchors), pa, pb, a_root=ra, b_root=rb, tol=tol, max_level=max_level)
        total = total + r.value
        err += r.error
        lev = max(lev, r.level)
        nev += r.evaluations
    return QuadResult(np.asarray(total), err, lev, nev)


def integrate_ray(integrand: Integrand, segment: PathSegment, run: LabelRun, *,
                  tol: float = TOL, max_level: int = MAX_LEVEL, anchor_radius: float = 0.0,
                  far_radius: float = 0.0) -> QuadResult:
    """Integral from the branch point out to infinity along a stored ray.

    ``run.breaks`` are distances from the branch point.  Only first kind
    differentials decay fast enough; divergent integrands raise.  Beyond
    ``far_radius``, where tracking of ``run`` stopped, labels follow by
    continuity.
    """
    if segment.b is not None:
        raise ValueError("segment is not a ray")
    cuts = [0.0, *run.breaks]
    total = 0
    err = 0.0
    lev = 0
    nev = 0
    ra = _root_index(segment.a_id)
    anchors = integrand.anchor(ra, segment.a, segment.a + segment.direction, anchor_radius)
    for k, lab in enumerate(run.labels[:-1]):
        pa = segment.a if k == 0 else segment.point(cuts[k])
        pb = segment.point(cuts[k + 1])
        r = tanh_sinh(integrand(lab, anchors if k == 0 else ()), pa, pb, a_root=ra if k == 0 else None,
                      tol=tol, max_level=max_level)
        total = total + r.value
        err += r.error
        nev += r.evaluations
        lev = max(lev, r.level)
    far = integrand.far_anchor(segment.a, segment.direction, far_radius)
    f = integrand(run.labels[-1], (anchors if len(run.labels) == 1 else ()) + far)
    deg = integrand.solutions.delta_poly.degree
    t_max = min(1e60, 10.0 ** (250.0 / (0.5 * max(deg, 1) + 1.0)))
    t0 = cuts[-1]
    r = exp_sinh(f, segment.a, segment.direction, a_root=ra if len(run.labels) == 1 else None, t0=t0,
                 tol=tol, max_level=max_level, t_max=t_max)
    # tail beyond t_max, estimated from the two outermost decades
    far = np.array([t_max / 10, t_max])
    vals = np.abs(np.asarray(f(segment.a + segment.direction * far, [])))
    decay = vals[1] * t_max
    if np.any(vals[1] > 0) and np.any(np.max(decay) > tol):
        raise QuadratureError("integrand does not decay along the ray (divergent differential?)")
    total = total + r.value
    return QuadResult(np.asarray(total), err + r.error, max(lev, r.level), nev + r.evaluations)
