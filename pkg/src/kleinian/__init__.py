"""Periods, theta functions and Kleinian wp-functions of hyperelliptic and trigonal curves."""

from .algebra import CurveError, CurveSpec, Poly, canonicalize, poly_roots
from .jacobian import (AbelImage, CurvePoint, Divisor, SpecialDivisorError, abel_divisor, abel_point,
                       divisor_polynomials, jacobi_polynomials, K_characteristic, lattice_congruent, round_trip,
                       wp, wp_all)
from .periods import PeriodGateError, PeriodSet, compute_periods
from .sheets import SheetAtlas, build_atlas, identify_sheet
from .theta import (Characteristic, ThetaParams, characteristic_to_vector, theta, theta_char, theta_deriv,
                    vector_to_characteristic)

__all__ = [
    "AbelImage", "Characteristic", "CurveError", "CurvePoint", "CurveSpec", "Divisor", "K_characteristic",
    "PeriodGateError", "PeriodSet", "Poly", "SheetAtlas", "SpecialDivisorError", "ThetaParams", "abel_divisor",
    "abel_point", "build_atlas", "canonicalize", "characteristic_to_vector", "compute_periods",
    "divisor_polynomials", "identify_sheet", "jacobi_polynomials", "lattice_congruent", "poly_roots",
    "round_trip", "theta", "theta_char", "theta_deriv", "vector_to_characteristic", "wp", "wp_all",
]
