import numpy as np
import pytest

from kleinian.algebra import CurveSpec, Poly
from kleinian.cohomology import Bivariate, first_kind_basis, second_kind_basis
from printed import EX1_R, EX2_R
from conftest import curve


def _as_x_poly(b: Bivariate) -> list[complex]:
    assert all(j == 0 for (i, j), _ in b.terms)
    out = [0j] * (b.degree_x() + 1)
    for (i, _), c in b.terms:
        out[i] = c
    return out


@pytest.mark.parametrize("n,printed", [(1, EX1_R), (2, EX2_R)])
def test_hyperelliptic_second_kind_numerators(n, printed):
    basis = second_kind_basis(curve(n))
    assert basis.weights == (1, 3, 5, 7)
    for got, want in zip(basis.numerators, printed):
        assert np.allclose(_as_x_poly(got), want, atol=0, rtol=0)


def test_hyperelliptic_first_kind_is_descending_powers():
    basis = first_kind_basis(curve(1))
    assert [dict(b.terms) for b in basis.numerators] == [{(3, 0): 1}, {(2, 0): 1}, {(1, 0): 1}, {(0, 0): 1}]


def test_trigonal_first_kind_monomials():
    basis = first_kind_basis(curve(3))
    # du_1 = y dx/f_y, du_2 = x dx/f_y, du_5 = dx/f_y for the (3,4) curve
    assert [dict(b.terms) for b in basis.numerators] == [{(0, 1): 1}, {(1, 0): 1}, {(0, 0): 1}]
    assert basis.weights == (1, 2, 5)


def test_trigonal_second_kind_leading_terms():
    basis = second_kind_basis(curve(3))
    lead = [dict(b.terms) for b in basis.numerators]
    assert lead[0] == {(2, 0): 1}
    assert lead[1] == {(1, 1): 2}
    assert lead[2][(2, 1)] == 5


def test_basis_evaluation_shapes():
    basis = first_kind_basis(curve(3))
    x = np.linspace(0, 1, 5) + 0j
    y = x + 1
    assert basis.evaluate(x, y).shape == (5, 3)
    assert basis(x, y, np.ones(5)).shape == (5, 3)


def test_non_canonical_rejected():
    c = CurveSpec.hyperelliptic(Poly([1, 2, 3, 4, 5, 1]), Poly([1, 1]))
    with pytest.raises(ValueError):
        first_kind_basis(c)


def test_unsupported_second_kind_raises():
    c = CurveSpec.trigonal(Poly([1, 0, 0, 0, 0, 0, 0, 1]), Poly([1]))
    with pytest.raises(NotImplementedError):
        second_kind_basis(c)
