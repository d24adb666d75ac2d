"""Riemann theta function with characteristics.

Sums run over an ellipsoid ``|T(n + a + c)| <= R`` where ``Im tau = T^t T``
and ``c`` recentres the Gaussian on the imaginary part of the argument, so a
skewed or shifted argument does not need a huge box.  Derivatives are taken
term by term.  A characteristic ``[eps] = (eps', eps)`` enters as
``a = eps'/2`` on the summation index and ``eps/2`` on the argument.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc, gammaln

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-14
MAX_ORDER = 6
MAX_POINTS = 2_000_000
BOX_FALLBACK = 8
SNAP = 1e-6


class ThetaError(ValueError):
    pass


# -- characteristics ------------------------------------------------------------------

@dataclass(frozen=True)
class Characteristic:
    """Characteristic with rows eps' (top) and eps (bottom), entries in [0, 2)."""

    eps_prime: tuple[float, ...]
    eps: tuple[float, ...]
    snap_distance: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if len(self.eps_prime) != len(self.eps):
            raise ValueError("eps' and eps must have the same length")

    @classmethod
    def from_rows(cls, top, bottom) -> "Characteristic":
        return cls(tuple(float(t) for t in top), tuple(float(b) for b in bottom)).reduced()

    @classmethod
    def zero(cls, g: int) -> "Characteristic":
        return cls((0.0,) * g, (0.0,) * g)

    @property
    def g(self) -> int:
        return len(self.eps)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([self.eps_prime, self.eps])

    @property
    def half_integer(self) -> bool:
        return all(float(x).is_integer() for x in (*self.eps_prime, *self.eps))

    def reduced(self) -> "Characteristic":
        def red(v):
            return tuple(float(x % 2.0) if x % 2.0 != 2.0 else 0.0 for x in v)
        return Characteristic(red(self.eps_prime), red(self.eps), self.snap_distance)

    def __add__(self, other: "Characteristic") -> "Characteristic":
        return Characteristic(tuple(a + b for a, b in zip(self.eps_prime, other.eps_prime)),
                              tuple(a + b for a, b in zip(self.eps, other.eps))).reduced()

    def dot(self) -> int:
        if not self.half_integer:
            raise ValueError("parity is defined for half-integer characteristics only")
        return int(round(sum(a * b for a, b in zip(self.eps, self.eps_prime)))) % 2

    @property
    def parity(self) -> str:
        """'odd' when eps^t eps' = 0 mod 2, 'even' when it is 1."""
        return "odd" if self.dot() == 0 else "even"

    def reflection_sign(self) -> int:
        """Sign s with theta[eps](-v) = s * theta[eps](v), from the lattice sum itself."""
        return -1 if self.dot() == 1 else 1

    def __str__(self):
        fmt = lambda v: " ".join(f"{x:g}" for x in v)
        return f"({fmt(self.eps_prime)}; {fmt(self.eps)})"


def all_half_characteristics(g: int):
    for bits in itertools.product((0, 1), repeat=2 * g):
        yield Characteristic(tuple(map(float, bits[:g])), tuple(map(float, bits[g:])))


# -- parameters and lattice ---------------------------------------------------------------

@dataclass
class ThetaParams:
    tau: np.ndarray
    trunc_radius: float | None = None  # fixed radius; None picks it from the tolerance

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=complex)
        if tau.ndim != 2 or tau.shape[0] != tau.shape[1]:
            raise ThetaError("tau must be a square matrix")
        if np.max(np.abs(tau - tau.T)) > 1e-8 * max(1.0, np.max(np.abs(tau))):
            raise ThetaError("tau is not symmetric")
        tau = 0.5 * (tau + tau.T)
        Y = tau.imag
        try:
            L = np.linalg.cholesky(Y)
        except np.linalg.LinAlgError as exc:
            raise ThetaError("Im tau is not positive definite") from exc
        self.tau = tau
        self.Y = Y
        self.T = L.T  # Y = T^t T
        self.Yinv = np.linalg.inv(Y)
        self.rho = _shortest_vector(self.T)

    @property
    def g(self) -> int:
        return self.tau.shape[0]


def _shortest_vector(T: np.ndarray) -> float:
    g = T.shape[0]
    span = 2 if g <= 4 else 1
    best = math.inf
    for n in itertools.product(range(-span, span + 1), repeat=g):
        if any(n):
            best = min(best, float(np.linalg.norm(T @ np.array(n))))
    return best


def _tail_bound(R: float, g: int, rho: float, order: int, tinv: float) -> float:
    """Upper estimate of the Gaussian lattice tail outside radius R, with polynomial weight."""
    if R <= rho / 2:
        return math.inf
    s = 0.5 * (g + order)
    x = (R - rho / 2) ** 2
    log_gamma = gammaln(s) + math.log(max(gammaincc(s, x), 1e-300))
    log_pref = math.log(g / 2) + g * math.log(2 / rho) + order * math.log(2 * math.pi * max(tinv, 1e-300))
    log_pref -= 0.5 * order * math.log(math.pi)
    return math.exp(log_pref + log_gamma)


def truncation_radius(params: ThetaParams, tol: float, order: int = 0) -> float:
    if params.trunc_radius is not None:
        return float(params.trunc_radius)
    tinv = float(np.linalg.norm(np.linalg.inv(params.T), 2))
    R = params.rho / 2 + 0.5
    while _tail_bound(R, params.g, params.rho, order, tinv) > tol:
        R += 0.25
    return R


def lattice_points(params: ThetaParams, centre: np.ndarray, R: float) -> np.ndarray:
    """Integer n with |T(n - centre)| <= R (box |n_i - round(centre_i)| <= 8 if too many)."""
    g = params.g
    half = R * np.sqrt(np.diag(params.Yinv))
    lo = np.ceil(centre - half).astype(int)
    hi = np.floor(centre + half).astype(int)
    count = float(np.prod(np.maximum(hi - lo + 1, 0)))
    if count > MAX_POINTS:
        log.warning("ellipsoid needs %.3g points; using the box |n_i| <= %d", count, BOX_FALLBACK)
        c = np.round(centre).astype(int)
        axes = [np.arange(ci - BOX_FALLBACK, ci + BOX_FALLBACK + 1) for ci in c]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, g)
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    n = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, g)
    d = (n - centre) @ params.T.T
    return n[np.einsum("ij,ij->i", d, d) <= R * R]


def _shifted_terms(params: ThetaParams, z: np.ndarray, a: np.ndarray, tol: float, order: int):
    """Points x = n + a and terms exp(i pi x^t tau x + 2 i pi x^t z)."""
    if params.g != z.shape[0]:
        raise ThetaError("argument length does not match tau")
    c = params.Yinv @ z.imag
    R = truncation_radius(params, tol, order)
    n = lattice_points(params, -a - c, R)
    x = n + a
    expo = 1j * np.pi * np.einsum("ni,ij,nj->n", x, params.tau, x) + 2j * np.pi * (x @ z)
    return x, np.exp(expo)


def _as_vec(v, g=None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if v.ndim != 1:
        raise ThetaError("argument must be a vector")
    return v


def _char_shift(c: Characteristic | None, g: int):
    if c is None:
        return np.zeros(g), np.zeros(g)
    if c.g != g:
        raise ThetaError("characteristic size does not match tau")
    return 0.5 * np.array(c.eps_prime), 0.5 * np.array(c.eps)


# -- evaluation --------------------------------------------------------------------

def theta(v, params: ThetaParams, tol: float = DEFAULT_TOL) -> complex:
    """theta(v; tau) = sum_n exp(i pi n^t tau n + 2 i pi n^t v)."""
    z = _as_vec(v)
    x, t = _shifted_terms(params, z, np.zeros(params.g), tol, 0)
    return complex(t.sum())


def theta_char(c: Characteristic, v, params: ThetaParams, tol: float = DEFAULT_TOL) -> complex:
    """theta[eps](v) as the lattice sum over n + eps'/2 at argument v + eps/2."""
    z = _as_vec(v)
    a, b = _char_shift(c, params.g)
    x, t = _shifted_terms(params, z + b, a, tol, 0)
    return complex(t.sum())


def theta_char_via_shift(c: Characteristic, v, params: ThetaParams, tol: float = DEFAULT_TOL) -> complex:
    """Prefactor times plain theta at the shifted argument v + eps/2 + tau eps'/2."""
    z = _as_vec(v)
    a, b = _char_shift(c, params.g)
    pref = np.exp(1j * np.pi * a @ params.tau @ a + 2j * np.pi * (z + b) @ a)
    return complex(pref * theta(z + b + params.tau @ a, params, tol))


def theta_deriv(multi_index, c: Characteristic | None, v, params: ThetaParams,
                tol: float = DEFAULT_TOL) -> complex:
    """Derivative of theta[c] in v; ``multi_index`` lists 0-based positions, repeats allowed."""
    idx = tuple(int(i) for i in multi_index)
    if len(idx) > MAX_ORDER:
        raise ThetaError(f"derivative order above {MAX_ORDER}")
    if any(i < 0 or i >= params.g for i in idx):
        raise ThetaError("derivative index out of range")
    z = _as_vec(v)
    a, b = _char_shift(c, params.g)
    x, t = _shifted_terms(params, z + b, a, tol, len(idx))
    p = 2j * np.pi * x
    w = np.ones(len(t), dtype=complex)
    for i in idx:
        w = w * p[:, i]
    return complex((w * t).sum())


@dataclass(frozen=True)
class ThetaJet:
    """Value and derivative tensors of theta[c] in the coordinates u = W^{-1} v."""

    value: complex
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    scale: float  # sum of |terms|, the size the sum was cancelled from


def theta_jet(c: Characteristic | None, v, params: ThetaParams, W: np.ndarray | None = None,
              tol: float = DEFAULT_TOL) -> ThetaJet:
    """Derivatives up to order 3 with d/du = W^t d/dv (W = identity: plain v-derivatives)."""
    z = _as_vec(v)
    a, b = _char_shift(c, params.g)
    x, t = _shifted_terms(params, z + b, a, tol, 3)
    p = 2j * np.pi * x
    if W is not None:
        p = p @ np.asarray(W)
    d1 = np.einsum("n,ni->i", t, p)
    d2 = np.einsum("n,ni,nj->ij", t, p, p)
    d3 = np.einsum("n,ni,nj,nk->ijk", t, p, p, p)
    return ThetaJet(complex(t.sum()), d1, d2, d3, float(np.abs(t).sum()))


def theta_u_deriv(multi_index, c: Characteristic | None, v, params: ThetaParams, W: np.ndarray,
                  tol: float = DEFAULT_TOL) -> tuple[complex, float]:
    """Derivative in u = W^{-1} v for 0-based u positions; returns (value, absolute term sum)."""
    idx = tuple(int(i) for i in multi_index)
    if len(idx) > MAX_ORDER:
        raise ThetaError(f"derivative order above {MAX_ORDER}")
    z = _as_vec(v)
    a, b = _char_shift(c, params.g)
    x, t = _shifted_terms(params, z + b, a, tol, len(idx))
    p = (2j * np.pi * x) @ np.asarray(W)
    w = np.ones(len(t), dtype=complex)
    for i in idx:
        w = w * p[:, i]
    return complex((w * t).sum()), float(np.abs(w * t).sum())


def reduce_argument(v, params: ThetaParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Write v = r + m + tau m' with integer m, m' and r near the fundamental cell."""
    z = _as_vec(v)
    mp = np.round(params.Yinv @ z.imag)
    r = z - params.tau @ mp
    m = np.round(r.real)
    return r - m, m, mp


# -- characteristics of vectors -------------------------------------------------------

def _periods(ps):
    omega = np.asarray(ps.omega)
    tau = np.asarray(ps.tau)
    return omega, tau


def vector_to_characteristic(u, ps, snap: float = SNAP) -> Characteristic:
    """Real (eps', eps) with u = omega eps/2 + omega' eps'/2, reduced mod 2."""
    omega, tau = _periods(ps)
    z = np.linalg.solve(omega, _as_vec(u))
    g = len(z)
    # z = eps/2 + tau eps'/2 split into real and imaginary parts
    A = np.block([[0.5 * np.eye(g), 0.5 * tau.real], [np.zeros((g, g)), 0.5 * tau.imag]])
    if np.linalg.cond(A) > 1e12:
        raise ThetaError("ill-conditioned characteristic system")
    sol = np.linalg.solve(A, np.concatenate([z.real, z.imag]))
    eps, eps_p = sol[:g] % 2.0, sol[g:] % 2.0
    near = np.round(np.concatenate([eps_p, eps]))
    dist = float(np.max(np.abs(np.concatenate([eps_p, eps]) - near)))
    vals = np.concatenate([eps_p, eps])
    if dist < snap:
        vals = near % 2.0
    return Characteristic(tuple(map(float, vals[:g])), tuple(map(float, vals[g:])), dist)


def characteristic_to_vector(c: Characteristic, ps) -> np.ndarray:
    return 0.5 * np.asarray(ps.omega) @ np.array(c.eps) + 0.5 * np.asarray(ps.omega_p) @ np.array(c.eps_prime)


# -- [K] and Bolza --------------------------------------------------------------------

def branch_characteristics(ps, sheet: str = "a") -> list[Characteristic]:
    """[eps_i] of the finite branch points from their Abel images along the base path."""
    from .periods import base_path_image

    return [vector_to_characteristic(base_path_image(ps.table, sheet, i), ps)
            for i in range(1, ps.atlas.N + 1)]


def K_characteristic_hyperelliptic(ps, atlas=None) -> Characteristic:
    """Sum of the characteristics of e_2, e_4, ..., e_2g."""
    chars = branch_characteristics(ps)
    g = ps.genus
    K = Characteristic.zero(g)
    for i in range(1, g + 1):
        K = K + chars[2 * i - 1]
    return K


def bolza_index_pattern(g: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Gap weights of the numerator and denominator derivatives."""
    if g not in (2, 4):
        raise ThetaError("Bolza index pattern implemented for genus 2 and 4")
    head = tuple(range(2 * (g % 2) + 1, 2 * g - 6, 4))
    return head + (2 * g - 1,), head + (2 * g - 3,)


def bolza_branch_points(ps, characteristics: list[Characteristic] | None = None,
                        K: Characteristic | None = None, tol: float = DEFAULT_TOL,
                        threshold: float = 1e-8) -> list[complex]:
    """Branch points e_i recovered from theta derivatives at u = 0."""
    g = ps.genus
    gaps = list(ps.atlas.curve.gaps)
    num, den = bolza_index_pattern(g)
    chars = characteristics if characteristics is not None else branch_characteristics(ps)
    K = K if K is not None else K_characteristic_hyperelliptic(ps)
    params = ThetaParams(ps.tau)
    W = np.linalg.inv(ps.omega)
    zero = np.zeros(g, dtype=complex)
    out = []
    for ch in chars:
        c = ch + K
        top, _ = theta_u_deriv([gaps.index(w) for w in num], c, zero, params, W, tol)
        bot, scale = theta_u_deriv([gaps.index(w) for w in den], c, zero, params, W, tol)
        if abs(bot) < threshold * scale:
            raise ThetaError(f"vanishing denominator for characteristic {c}")
        out.append(-top / bot)
    return out


def weighted_indices(weights, max_weight: int, max_order: int = MAX_ORDER):
    """Multi-indices (as position tuples) of total gap weight <= max_weight."""
    g = len(weights)
    for order in range(0, max_order + 1):
        for combo in itertools.combinations_with_replacement(range(g), order):
            if sum(weights[i] for i in combo) <= max_weight:
                yield combo


def vanishing_profile(ps, K: Characteristic, max_weight: int, tol: float = DEFAULT_TOL) -> dict[int, float]:
    """For each gap weight w, max |d^alpha theta[K](0)| / (term sum) over u-derivatives of weight w."""
    params = ThetaParams(ps.tau)
    W = np.linalg.inv(ps.omega)
    weights = list(ps.atlas.curve.gaps)
    zero = np.zeros(ps.genus, dtype=complex)
    prof: dict[int, float] = {}
    for combo in weighted_indices(weights, max_weight):
        val, scale = theta_u_deriv(combo, K, zero, params, W, tol)
        w = sum(weights[i] for i in combo)
        prof[w] = max(prof.get(w, 0.0), abs(val) / scale if scale else 0.0)
    return prof


def sato_weight(curve) -> int:
    """Weight of the sigma function, (n^2 - 1)(s^2 - 1)/24 for an (n,s)-curve."""
    n, s = curve.n, curve.s
    if s is None:
        raise ValueError("Sato weight needs an (n,s)-curve")
    return (n * n - 1) * (s * s - 1) // 24
