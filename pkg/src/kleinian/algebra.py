"""Polynomials, discriminants and curve models.

Coefficient vectors are stored in ascending degree order.  Curves are kept in
the two forms used throughout the package::

    hyperelliptic   0 = -y^2 + y Q(x) + P(x)
    trigonal        0 = -y^3 + y^2 T(x) + y Q(x) + P(x)

and `canonicalize` removes ``Q`` (hyperelliptic) or ``T`` (trigonal) by a
shift of ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ArrayLike = np.ndarray | Sequence[complex] | complex

CLUSTER_RADIUS = 1e-8

_SPLITTER = 134217729.0  # 2**27 + 1


# -- error-free transformations -------------------------------------------

def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def _compensated_horner(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Complex compensated Horner scheme (Graillat-Langlois-Louvet style).

    Real and imaginary parts of every product and sum are carried with their
    rounding errors; the errors are accumulated by a plain Horner pass and
    added back at the end.
    """
    xr, xi = x.real, x.imag
    sr = np.full(x.shape, coeffs[-1].real)
    si = np.full(x.shape, coeffs[-1].imag)
    cr = np.zeros(x.shape)
    ci = np.zeros(x.shape)
    for a in coeffs[-2::-1]:
        p1, e1 = _two_prod(sr, xr)
        p2, e2 = _two_prod(si, xi)
        p3, e3 = _two_prod(sr, xi)
        p4, e4 = _two_prod(si, xr)
        qr, f1 = _two_sum(p1, -p2)
        qi, f2 = _two_sum(p3, p4)
        new_sr, g1 = _two_sum(qr, a.real)
        new_si, g2 = _two_sum(qi, a.imag)
        err_r = e1 - e2 + f1 + g1
        err_i = e3 + e4 + f2 + g2
        cr, ci = cr * xr - ci * xi + err_r, cr * xi + ci * xr + err_i
        sr, si = new_sr, new_si
    return (sr + cr) + 1j * (si + ci)


# -- polynomials ------------------------------------------------------------

@dataclass(frozen=True)
class Poly:
    """Dense univariate polynomial with complex coefficients (ascending)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: complex = 1.0) -> "Poly":
        out = cls([lead])
        for r in roots:
            out = out * cls([-r, 1.0])
        return out

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "Poly":
        v = np.zeros(k + 1, dtype=complex)
        v[k] = c
        return cls(v)

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial reports -1."""
        if self.is_zero():
            return -1
        return len(self.coeffs) - 1

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def coeff(self, k: int) -> complex:
        return complex(self.coeffs[k]) if 0 <= k < len(self.coeffs) else 0j

    def scale(self) -> float:
        """Coefficient scale used for relative tolerances."""
        return float(max(1.0, np.max(np.abs(self.coeffs))))

    def __call__(self, x):
        xa = np.asarray(x, dtype=complex)
        out = _compensated_horner(self.coeffs, np.atleast_1d(xa))
        return out.reshape(xa.shape) if xa.ndim else complex(out[0])

    def _coerce(self, other) -> "Poly":
        return other if isinstance(other, Poly) else Poly([other])

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, dtype=complex)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return Poly(a)

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(self.coeffs * complex(other))
        return Poly(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly([1.0])
        for _ in range(k):
            out = out * self
        return out

    def deriv(self) -> "Poly":
        if len(self.coeffs) == 1:
            return Poly([0.0])
        return Poly(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def allclose(self, other: "Poly", tol: float = 1e-12) -> bool:
        d = (self - other).coeffs
        return bool(np.max(np.abs(d)) <= tol * max(self.scale(), other.scale()))

    def __repr__(self):
        return f"Poly({np.array2string(self.coeffs, precision=6)})"


# -- root finding -----------------------------------------------------------

@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    clustered: np.ndarray
    residuals: np.ndarray
    iterations: int

    @property
    def degenerate(self) -> bool:
        return bool(self.clustered.any())


class RootFindingError(RuntimeError):
    pass


def _initial_guesses(c: np.ndarray) -> np.ndarray:
    n = len(c) - 1
    mon = c / c[-1]
    # Fujiwara bound on the root moduli
    radius = 2.0 * max(abs(mon[n - k]) ** (1.0 / k) for k in range(1, n + 1))
    radius = max(radius, 1e-300)
    center = -mon[n - 1] / n
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    return center + 0.5 * radius * np.exp(1j * angles)


def poly_roots(p: Poly, tol: float = 1e-12, max_iter: int = 500) -> RootSet:
    """All roots of ``p`` by Aberth-Ehrlich iteration with Newton polishing.

    Roots closer than ``CLUSTER_RADIUS`` times the root scale are flagged as
    clustered; deciding what to do about them is left to the caller.
    """
    n = p.degree
    if n < 1:
        raise ValueError("poly_roots needs a polynomial of degree >= 1")
    c = p.coeffs
    dp = p.deriv()
    z = _initial_guesses(c)
    it = 0
    if n == 1:
        z = np.array([-c[0] / c[1]])
    else:
        converged = np.zeros(n, dtype=bool)
        for it in range(1, max_iter + 1):
            pz = np.polyval(c[::-1], z)
            dpz = np.polyval(dp.coeffs[::-1], z)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = pz / dpz
                diff = z[:, None] - z[None, :]
                np.fill_diagonal(diff, 1.0)
                inv = 1.0 / diff
                np.fill_diagonal(inv, 0.0)
                corr = ratio / (1.0 - ratio * inv.sum(axis=1))
            corr = np.where(np.isfinite(corr) & ~converged, corr, 0.0)
            z = z - corr
            converged |= np.abs(corr) <= 1e-13 * np.maximum(np.abs(z), 1e-300)
            if converged.all():
                break
        else:
            raise RootFindingError(f"Aberth iteration did not converge in {max_iter} steps")
    for _ in range(3):
        dpz = dp(z)
        ok = dpz != 0
        step = np.where(ok, p(z) / np.where(ok, dpz, 1.0), 0.0)
        z = z - step
    scale = max(1.0, float(np.max(np.abs(z))))
    clustered = np.zeros(n, dtype=bool)
    if n > 1:
        dist = np.abs(z[:, None] - z[None, :])
        np.fill_diagonal(dist, np.inf)
        clustered = dist.min(axis=1) < CLUSTER_RADIUS * scale
    res = np.abs(p(z))
    weights = np.polyval(np.abs(c[::-1]), np.abs(z))
    bad = res > max(tol, 1e-13) * np.maximum(weights, 1.0) * 1e3
    if bad.any() and not clustered[bad].all():
        raise RootFindingError(f"root residuals too large: {res[bad]}")
    return RootSet(z, clustered, res, it)


def sort_points(points: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Ascending by real part, then by imaginary part.

    Real parts within ``rtol`` (relative to the largest modulus) count as tied,
    so rounding noise cannot reorder points on a vertical line.
    """
    pts = np.asarray(points, dtype=complex)
    if pts.size == 0:
        return pts
    tol = rtol * max(1.0, float(np.max(np.abs(pts))))
    by_re = np.argsort(pts.real, kind="stable")
    group = np.zeros(pts.size, dtype=int)
    group[1:] = np.cumsum(np.diff(pts.real[by_re]) > tol)
    key = np.empty(pts.size, dtype=int)
    key[by_re] = group
    order = np.lexsort((pts.imag, key))
    return pts[order]


# -- curves -----------------------------------------------------------------

def hyperelliptic_delta(P: Poly, Q: Poly | None) -> Poly:
    """Delta = P + Q^2/4."""
    if Q is None or Q.is_zero():
        return P
    return P + 0.25 * (Q * Q)


def trigonal_delta(P: Poly, Q: Poly | None) -> Poly:
    """Delta = P^2 - (4/27) Q^3 for the canonical trigonal form."""
    if Q is None or Q.is_zero():
        return P * P
    return P * P - (4.0 / 27.0) * (Q * Q * Q)


class CurveError(ValueError):
    """Curve data violates the model's degree bounds or is degenerate."""


HYPERELLIPTIC = "hyperelliptic"
TRIGONAL = "trigonal"


def _trigonal_case(deg_p: int) -> tuple[int, int]:
    """Return (case, m) from the degree of P."""
    r = deg_p % 3
    if r == 1:
        return 1, (deg_p - 1) // 3
    if r == 2:
        return 2, (deg_p - 2) // 3
    return 3, deg_p // 3 - 1


@dataclass(frozen=True)
class CurveSpec:
    """A validated hyperelliptic or trigonal plane curve."""

    kind: str
    P: Poly
    Q: Poly
    T: Poly | None = None
    genus: int = field(init=False)
    case: int = field(init=False)
    m: int = field(init=False)

    def __post_init__(self):
        P = self.P if isinstance(self.P, Poly) else Poly(self.P)
        Q = self.Q if isinstance(self.Q, Poly) else Poly(self.Q if self.Q is not None else [0])
        T = self.T
        if T is not None and not isinstance(T, Poly):
            T = Poly(T)
        if T is not None and T.is_zero():
            T = None
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "T", T)
        dp = P.degree
        if self.kind == HYPERELLIPTIC:
            if T is not None:
                raise CurveError("hyperelliptic curves carry no T polynomial")
            if dp < 3:
                raise CurveError("hyperelliptic P must have degree >= 3")
            g = (dp - 1) // 2
            if Q.degree > g:
                raise CurveError(f"deg Q = {Q.degree} exceeds genus {g}")
            object.__setattr__(self, "genus", g)
            object.__setattr__(self, "case", 1 if dp % 2 else 2)
            object.__setattr__(self, "m", g)
        elif self.kind == TRIGONAL:
            if dp < 4:
                raise CurveError("trigonal P must have degree >= 4")
            case, m = _trigonal_case(dp)
            qmax = {1: 2 * m, 2: 2 * m + 1, 3: 2 * m + 2}[case]
            tmax = {1: m, 2: m, 3: m + 1}[case]
            if Q.degree > qmax:
                raise CurveError(f"deg Q = {Q.degree} exceeds {qmax} for deg P = {dp}")
            if T is not None and T.degree > tmax:
                raise CurveError(f"deg T = {T.degree} exceeds {tmax} for deg P = {dp}")
            g = 3 * m if case == 1 else 3 * m + 1
            object.__setattr__(self, "genus", g)
            object.__setattr__(self, "case", case)
            object.__setattr__(self, "m", m)
        else:
            raise CurveError(f"unknown curve kind {self.kind!r}")

    # constructors
    @classmethod
    def hyperelliptic(cls, P, Q=None) -> "CurveSpec":
        return cls(HYPERELLIPTIC, Poly(P) if not isinstance(P, Poly) else P,
                   Poly([0]) if Q is None else (Q if isinstance(Q, Poly) else Poly(Q)))

    @classmethod
    def from_branch_points(cls, points: Sequence[complex], Q=None) -> "CurveSpec":
        """Hyperelliptic curve whose canonical P is prod (x - e_j)."""
        delta = Poly.from_roots(points)
        Qp = Poly([0]) if Q is None else (Q if isinstance(Q, Poly) else Poly(Q))
        return cls.hyperelliptic(delta - 0.25 * (Qp * Qp), Qp)

    @classmethod
    def trigonal(cls, P, Q, T=None) -> "CurveSpec":
        return cls(TRIGONAL, P if isinstance(P, Poly) else Poly(P),
                   Q if isinstance(Q, Poly) else Poly(Q), T)

    # descriptors
    @property
    def n(self) -> int:
        return 2 if self.kind == HYPERELLIPTIC else 3

    @property
    def is_canonical(self) -> bool:
        if self.kind == HYPERELLIPTIC:
            return self.Q.is_zero()
        return self.T is None

    @property
    def s(self) -> int | None:
        """The s of an (n,s)-curve, or None when the model is not of that type."""
        if self.kind == HYPERELLIPTIC:
            return 2 * self.genus + 1 if self.case == 1 else None
        return {1: 3 * self.m + 1, 2: 3 * self.m + 2}.get(self.case)

    @property
    def family(self) -> str:
        if self.kind == HYPERELLIPTIC:
            return "hyperelliptic-canonical" if self.is_canonical else "hyperelliptic-generic"
        if not self.is_canonical:
            return "trigonal-generic"
        return {1: "trigonal-canonical-(3,3m+1)", 2: "trigonal-canonical-(3,3m+2)",
                3: "trigonal-canonical-(3,3m+3)"}[self.case]

    @property
    def gaps(self) -> list[int]:
        return gap_sequence(self.kind, self.genus if self.kind == HYPERELLIPTIC else (3, self.s))

    @property
    def discriminant(self) -> Poly:
        c = self if self.is_canonical else canonicalize(self)
        if self.kind == HYPERELLIPTIC:
            return hyperelliptic_delta(c.P, self.Q)
        return trigonal_delta(c.P, c.Q)

    def y_shift(self, x):
        """Amount added to the canonical y to recover the original y."""
        if self.kind == HYPERELLIPTIC:
            return 0.5 * self.Q(x)
        return self.T(x) / 3.0 if self.T is not None else np.zeros_like(np.asarray(x, dtype=complex))

    def f(self, x, y):
        """Evaluate the defining polynomial."""
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        if self.kind == HYPERELLIPTIC:
            return -y * y + y * self.Q(x) + self.P(x)
        t = self.T(x) if self.T is not None else 0.0
        return -y ** 3 + y * y * t + y * self.Q(x) + self.P(x)

    def dfdy(self, x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        if self.kind == HYPERELLIPTIC:
            return -2.0 * y + self.Q(x)
        t = self.T(x) if self.T is not None else 0.0
        return -3.0 * y * y + 2.0 * y * t + self.Q(x)

    def validate(self) -> RootSet:
        """Reject curves whose discriminant has repeated roots."""
        delta = self.discriminant
        rs = poly_roots(delta)
        if rs.degenerate:
            raise CurveError("discriminant has (numerically) repeated roots")
        if self.kind == TRIGONAL:
            c = self if self.is_canonical else canonicalize(self)
            if not c.Q.is_zero() and c.P.degree >= 1:
                pr = poly_roots(c.P).roots
                scale = max(c.Q.scale(), 1.0) * max(1.0, float(np.max(np.abs(pr)))) ** max(c.Q.degree, 0)
                if np.min(np.abs(c.Q(pr))) < 1e-10 * scale:
                    raise CurveError("P and Q share a root")
        return rs

    def to_dict(self) -> dict:
        d = {"family": self.family,
             "P": [[c.real, c.imag] for c in self.P.coeffs],
             "Q": [[c.real, c.imag] for c in self.Q.coeffs]}
        if self.T is not None:
            d["T"] = [[c.real, c.imag] for c in self.T.coeffs]
        return d


def canonicalize(curve: CurveSpec) -> CurveSpec:
    """Remove Q (hyperelliptic) or T (trigonal) by a shift of y.

    Hyperelliptic: y = y~ + Q/2 gives P~ = P + Q^2/4.
    Trigonal: y = y~ + T/3 gives Q~ = Q + T^2/3, P~ = P + QT/3 + 2T^3/27.
    """
    if curve.is_canonical:
        return curve
    if curve.kind == HYPERELLIPTIC:
        return CurveSpec.hyperelliptic(hyperelliptic_delta(curve.P, curve.Q))
    T, Q, P = curve.T, curve.Q, curve.P
    Qt = Q + (1.0 / 3.0) * (T * T)
    Pt = P + (1.0 / 3.0) * (Q * T) + (2.0 / 27.0) * (T * T * T)
    return CurveSpec.trigonal(Pt, Qt)


# -- weights, gaps, monomials -------------------------------------------------

@dataclass(frozen=True, order=True)
class Monomial:
    weight: int
    i: int
    j: int

    def __call__(self, x, y):
        return x ** self.i * y ** self.j

    def __str__(self):
        parts = []
        if self.j:
            parts.append("y" if self.j == 1 else f"y^{self.j}")
        if self.i:
            parts.append("x" if self.i == 1 else f"x^{self.i}")
        return "*".join(parts) or "1"


def _check_ns(n: int, s: int) -> None:
    ok = (n == 2 and s >= 3 and s % 2 == 1) or (n == 3 and s >= 4 and s % 3 in (1, 2))
    if not ok:
        raise ValueError(f"unsupported (n,s) = ({n},{s})")


def gap_sequence(kind: str, shape) -> list[int]:
    """Weierstrass gap sequence at infinity.

    ``shape`` is the genus for hyperelliptic curves and ``(3, s)`` for trigonal.
    """
    if kind == HYPERELLIPTIC:
        g = int(shape)
        if g < 1:
            raise ValueError("genus must be positive")
        return [2 * i - 1 for i in range(1, g + 1)]
    if kind == TRIGONAL:
        n, s = shape if isinstance(shape, tuple) else (3, shape)
        if s is None:
            raise ValueError("gap sequence needs an (n,s)-curve")
        _check_ns(n, s)
        if s % 3 == 1:
            m = (s - 1) // 3
            gaps = [3 * i - 2 for i in range(1, m + 1)] + [3 * i - 1 for i in range(1, 2 * m + 1)]
        else:
            m = (s - 2) // 3
            gaps = [3 * i - 1 for i in range(1, m + 1)] + [3 * i - 2 for i in range(1, 2 * m + 2)]
        return sorted(gaps)
    raise ValueError(f"unsupported family {kind!r}")


def monomial_list(n: int, s: int, count: int) -> list[Monomial]:
    """First ``count`` monomials x^i y^j (j < n) in ascending Sato weight."""
    _check_ns(n, s)
    out = []
    imax = count + 1
    for j in range(n):
        for i in range(imax):
            out.append(Monomial(n * i + s * j, i, j))
    out.sort()
    weights = [m.weight for m in out[:count]]
    assert len(set(weights)) == len(weights), "weight tie for coprime (n,s)"
    return out[:count]


def lambda_coefficients(curve: CurveSpec) -> dict[int, complex]:
    """Coefficients lambda_k of a canonical (n,s)-curve labelled by weight.

    Hyperelliptic: lambda_{4g+2-2j} multiplies x^j in P.  Trigonal: the term
    y^j x^i carries lambda_{3s - s*j - 3*i}.  Missing terms are simply absent.
    """
    if not curve.is_canonical:
        raise ValueError("lambda coefficients are defined on the canonical form")
    lam: dict[int, complex] = {}
    if curve.kind == HYPERELLIPTIC:
        if curve.case != 1:
            raise ValueError("weights need deg P = 2g + 1")
        top = 4 * curve.genus + 2
        for j, c in enumerate(curve.P.coeffs):
            if c != 0:
                lam[top - 2 * j] = complex(c)
        return lam
    s = curve.s
    if s is None:
        raise ValueError("weights need an (n,s)-curve")
    top = 3 * s
    for i, c in enumerate(curve.P.coeffs):
        if c != 0:
            lam[top - 3 * i] = complex(c)
    for i, c in enumerate(curve.Q.coeffs):
        if c != 0:
            lam[top - s - 3 * i] = complex(c)
    return lam


def lam(coeffs: dict[int, complex], k: int) -> complex:
    """lambda_k with lambda_0 = 1 convention checked elsewhere; absent -> 0."""
    if k < 0:
        return 0j
    return coeffs.get(k, 0j)


def is_monic_ns(curve: CurveSpec) -> bool:
    return math.isclose(abs(curve.P.lead - 1.0), 0.0, abs_tol=1e-14)
