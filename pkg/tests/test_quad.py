import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from kleinian.quad import TOL, QuadratureError, exp_sinh, tanh_sinh

coord = st.floats(-3, 3, allow_nan=False)


def smooth(x, near):
    x = np.asarray(x)
    return np.stack([np.exp(np.sin(x)), x * np.cos(2 * x), x ** 3], axis=-1)


def _scipy_complex(fun, a, b):
    """Oracle: scipy.quad on the real and imaginary parts along the segment."""
    L = b - a
    re = integrate.quad(lambda t: (fun(a + L * t) * L).real, 0, 1, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    im = integrate.quad(lambda t: (fun(a + L * t) * L).imag, 0, 1, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    return re + 1j * im


def test_smooth_segment_matches_scipy():
    a, b = -1.0 + 0.5j, 2.0 - 1.0j
    got = tanh_sinh(smooth, a, b).value
    for k in range(3):
        ref = _scipy_complex(lambda z: smooth(np.array([z]), [])[0, k], a, b)
        assert abs(got[k] - ref) < 1e-10


def test_inverse_sqrt_endpoints():
    # integral of 1/sqrt(x(1-x)) over [0,1] is pi; the near offsets carry the endpoint distances
    def f(x, near):
        d = dict(near)
        x0 = d.get(0, x)
        x1 = -d.get(1, x - 1.0)
        return (1.0 / np.sqrt(x0 * x1))[:, None]

    r = tanh_sinh(f, 0.0, 1.0, a_root=0, b_root=1)
    assert abs(r.value[0] - math.pi) < 1e-11


def test_exp_sinh_rays():
    r = exp_sinh(lambda x, near: np.exp(-x)[:, None], 0.0, 1.0)
    assert abs(r.value[0] - 1.0) < 1e-11
    r = exp_sinh(lambda x, near: (1.0 / x ** 2)[:, None], 1.0, 1.0, t0=0.0)
    assert abs(r.value[0] - 1.0) < 1e-11
    # along a complex direction the exponent must still decay
    d = np.exp(0.3j)
    r = exp_sinh(lambda x, near: np.exp(-x * np.exp(-0.3j))[:, None], 0.0, d)
    assert abs(r.value[0] - d) < 1e-11


def test_nonconvergence_raises():
    with pytest.raises(QuadratureError):
        tanh_sinh(lambda x, near: np.sin(200 / (np.real(x) + 1e-3))[:, None], 0.0, 1.0, max_level=6)


@given(coord, coord, coord, coord, st.floats(0.05, 0.95))
def test_additivity_and_orientation(ar, ai, br, bi, t):
    a, b = complex(ar, ai), complex(br, bi)
    if abs(b - a) < 1e-2:
        return
    c = a + t * (b - a) + 0.3j * (b - a)  # off the segment: analytic integrand, so path independent
    full = tanh_sinh(smooth, a, b).value
    parts = tanh_sinh(smooth, a, c).value + tanh_sinh(smooth, c, b).value
    back = tanh_sinh(smooth, b, a).value
    scale = max(1.0, float(np.max(np.abs(full))))
    assert np.max(np.abs(full - parts)) < 2 * TOL * scale
    assert np.max(np.abs(full + back)) < 2 * TOL * scale
