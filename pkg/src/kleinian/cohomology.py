"""First and second kind differentials as numerators over dF/dy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import HYPERELLIPTIC, CurveSpec, lam, lambda_coefficients, monomial_list


@dataclass(frozen=True)
class Bivariate:
    """Polynomial sum c_ij x^i y^j, stored as ((i, j), c) terms."""

    terms: tuple[tuple[tuple[int, int], complex], ...]

    @classmethod
    def from_dict(cls, d: dict[tuple[int, int], complex]) -> "Bivariate":
        return cls(tuple(sorted(((k, complex(v)) for k, v in d.items() if v != 0), key=lambda t: (t[0][1], t[0][0]))))

    def __call__(self, x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for (i, j), c in self.terms:
            out = out + c * x ** i * y ** j
        return out

    def degree_x(self) -> int:
        return max((i for (i, j), _ in self.terms if j == 0), default=-1)

    def __str__(self):
        parts = []
        for (i, j), c in self.terms:
            mono = "".join(p for p in ((f"x^{i}" if i > 1 else "x" if i == 1 else ""),
                                       (f"y^{j}" if j > 1 else "y" if j == 1 else "")))
            parts.append(f"({c.real:g}{c.imag:+g}i){mono}" if mono else f"({c.real:g}{c.imag:+g}i)")
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class DifferentialBasis:
    kind: str  # "first" | "second"
    curve: CurveSpec
    numerators: tuple[Bivariate, ...]
    weights: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.numerators)

    def evaluate(self, x, y):
        """Numerator values, shape (N, g)."""
        return np.stack([np.broadcast_to(p(x, y), np.shape(x)) for p in self.numerators], axis=-1)

    def __call__(self, x, y, dfdy):
        return self.evaluate(x, y) / np.asarray(dfdy)[..., None]


def _need_canonical(curve: CurveSpec):
    if not curve.is_canonical:
        raise ValueError("differential bases are built on the canonical form")


def first_kind_basis(curve: CurveSpec) -> DifferentialBasis:
    _need_canonical(curve)
    g = curve.genus
    if curve.kind == HYPERELLIPTIC:
        nums = tuple(Bivariate.from_dict({(g - i, 0): 1}) for i in range(1, g + 1))
        return DifferentialBasis("first", curve, nums, tuple(curve.gaps))
    if curve.s is None:
        raise NotImplementedError("first kind basis needs an (n,s)-curve")
    monos = monomial_list(3, curve.s, g)
    nums = tuple(Bivariate.from_dict({(m.i, m.j): 1}) for m in reversed(monos))
    return DifferentialBasis("first", curve, nums, tuple(curve.gaps))


def second_kind_basis(curve: CurveSpec) -> DifferentialBasis:
    """Second kind differentials associated with the first kind basis.

    Hyperelliptic numerators are sum_k k lambda_{4i-2k-2} x^{g-i+k}; the (3,4)
    case uses the explicit list.  Other trigonal curves are not covered.
    """
    _need_canonical(curve)
    lc = lambda_coefficients(curve)
    lc.setdefault(0, 1.0 + 0j)
    g = curve.genus
    if curve.kind == HYPERELLIPTIC:
        nums = []
        for i in range(1, g + 1):
            d = {}
            for k in range(1, 2 * i):
                c = k * lam(lc, 4 * i - 2 * k - 2)
                if c != 0:
                    d[(g - i + k, 0)] = c
            nums.append(Bivariate.from_dict(d))
        return DifferentialBasis("second", curve, tuple(nums), tuple(curve.gaps))
    if curve.s != 4:
        raise NotImplementedError("second kind differentials are implemented for the (3,4) curve only")
    l2, l3, l5, l6 = (lam(lc, k) for k in (2, 3, 5, 6))
    r1 = Bivariate.from_dict({(2, 0): 1})
    r2 = Bivariate.from_dict({(1, 1): 2})
    r5 = Bivariate.from_dict({(2, 1): 5, (1, 1): 3 * l3, (2, 0): 2 * l2 ** 2 / 3, (0, 1): l6, (1, 0): 2 * l2 * l5 / 3})
    return DifferentialBasis("second", curve, (r1, r2, r5), tuple(curve.gaps))
