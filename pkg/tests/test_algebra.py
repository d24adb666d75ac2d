import numpy as np
import pytest
from hypothesis import given, strategies as st

from kleinian.algebra import (CurveError, CurveSpec, Poly, canonicalize, gap_sequence, lambda_coefficients,
                              monomial_list, poly_roots)

cplx = st.complex_numbers(max_magnitude=20, allow_nan=False, allow_infinity=False)


def test_poly_arithmetic_and_degree():
    p = Poly([1, 2, 3])
    q = Poly([0, 1])
    assert (p * q).coeffs.tolist() == [0, 1, 2, 3]
    assert (p - p).is_zero() and (p - p).degree == -1
    assert p.deriv().coeffs.tolist() == [2, 6]
    assert Poly([1, 0, 0]).degree == 0


def test_from_roots_expands_exactly_for_integer_roots():
    p = Poly.from_roots([-18, -15, -11, -5, 1, 2, 7, 12, 16])
    assert p.coeffs.tolist() == [-39916800, 54907920, -11079084, -4495768, 506395, 82441, -4602, -514, 11, 1]


@given(st.lists(cplx, min_size=2, max_size=9, unique=True))
def test_roots_agree_with_companion_matrix_oracle(roots):
    roots = np.array(roots)
    gaps = np.abs(roots[:, None] - roots[None, :]) + np.eye(len(roots)) * 1e9
    if gaps.min() < 1e-2:
        return
    p = Poly.from_roots(roots)
    ours = np.sort_complex(poly_roots(p).roots)
    oracle = np.sort_complex(np.roots(p.coeffs[::-1]))
    # match greedily; the oracle loses accuracy on clustered roots so compare modestly
    for z in ours:
        assert np.min(np.abs(oracle - z)) < 1e-6 * max(1, abs(z))


def test_clustered_roots_are_flagged():
    assert poly_roots(Poly.from_roots([1, 1, 2])).degenerate
    assert not poly_roots(Poly.from_roots([1, 2, 3])).degenerate


def test_degenerate_curve_rejected():
    with pytest.raises(CurveError):
        CurveSpec.from_branch_points([0, 0, 1, 2, 3]).validate()
    with pytest.raises(CurveError):
        CurveSpec.trigonal(Poly([0, 0, 1, 0, 1]), Poly([0, 1])).validate()


def test_degree_bounds():
    with pytest.raises(CurveError):
        CurveSpec.hyperelliptic(Poly([1, 0, 1]))
    with pytest.raises(CurveError):
        CurveSpec.hyperelliptic(Poly([1, 2, 3, 4, 5, 1]), Poly([1, 1, 1, 1]))
    with pytest.raises(CurveError):
        CurveSpec.trigonal(Poly([1, 2, 3, 1]), Poly([1]))


@given(st.lists(cplx, min_size=6, max_size=6), st.lists(cplx, min_size=1, max_size=3))
def test_hyperelliptic_canonical_form_has_same_points(pc, qc):
    pc[-1] = 1 + 0j
    c = CurveSpec.hyperelliptic(Poly(pc), Poly(qc))
    cc = canonicalize(c)
    x = 0.3 + 0.7j
    yt = np.sqrt(complex(cc.P(x)))
    assert abs(c.f(x, yt + c.y_shift(x))) < 1e-9 * max(1.0, abs(yt) ** 2)


@given(st.lists(cplx, min_size=5, max_size=5), st.lists(cplx, min_size=1, max_size=3),
       st.lists(cplx, min_size=1, max_size=2))
def test_trigonal_canonical_form_has_same_points(pc, qc, tc):
    pc[-1] = 1 + 0j
    c = CurveSpec.trigonal(Poly(pc), Poly(qc), Poly(tc))
    cc = canonicalize(c)
    x = -0.4 + 0.2j
    for yt in np.roots([-1, 0, cc.Q(x), cc.P(x)]):
        y = yt + c.y_shift(x)
        assert abs(c.f(x, y)) < 1e-8 * max(1.0, abs(y) ** 3)


def test_families():
    assert CurveSpec.from_branch_points([0, 1, 2, 3, 4]).family == "hyperelliptic-canonical"
    assert CurveSpec.from_branch_points([0, 1, 2, 3, 4, 5]).family == "hyperelliptic-canonical"
    assert CurveSpec.hyperelliptic(Poly([1, 2, 3, 4, 1]), Poly([1])).family == "hyperelliptic-generic"
    assert CurveSpec.trigonal(Poly([9, 16, 7, 3, 1]), Poly([11, 5, 4])).family == "trigonal-canonical-(3,3m+1)"
    assert CurveSpec.trigonal(Poly([1, 0, 0, 0, 0, 1]), Poly([1])).family == "trigonal-canonical-(3,3m+2)"


def test_gap_sequences():
    assert gap_sequence("hyperelliptic", 4) == [1, 3, 5, 7]
    assert gap_sequence("trigonal", (3, 4)) == [1, 2, 5]
    assert gap_sequence("trigonal", (3, 5)) == [1, 2, 4, 7]
    assert gap_sequence("trigonal", (3, 7)) == [1, 2, 4, 5, 8, 11]


@pytest.mark.parametrize("n,s", [(2, 9), (3, 4), (3, 5), (3, 7)])
def test_monomials_ascend_and_complement_gaps(n, s):
    mons = monomial_list(n, s, 6)
    w = [m.weight for m in mons]
    assert w == sorted(w) and len(set(w)) == len(w)
    kind = "hyperelliptic" if n == 2 else "trigonal"
    shape = (s - 1) // 2 if n == 2 else (3, s)
    gaps = set(gap_sequence(kind, shape))
    # the monomial weights form the semigroup generated by n and s, which avoids every gap
    assert gaps.isdisjoint(w)


def test_lambda_labels_by_weight():
    c = CurveSpec.trigonal(Poly([9, 16, 7, 3, 1]), Poly([11, 5, 4]))
    lam = lambda_coefficients(c)
    # y x^2 carries lambda_{12 - 4 - 6}, x^3 carries lambda_3
    assert lam[2] == 4 and lam[3] == 3 and lam[12] == 9 and lam[0] == 1
