"""Special-function tests: series values, oracles, seams, scaling."""

import numpy as np
import pytest

from ferrojet import specfun as sf
from ferrojet.checks import (
    bessel_i_quadrature,
    bessel_k_quadrature,
    struve_l_quadrature,
)
from ferrojet.errors import DomainError

# frozen oracle values (trapezoidal quadrature of the integral
# representations, cross-checked against 30-digit arithmetic)
I0_AT_10 = 2815.7166284662544715
L0_AT_3 = 4.6486857317537102826


def test_series_values_at_origin():
    assert sf.besseli(0, 0.0) == 1.0
    assert sf.besseli(1, 0.0) == 0.0
    assert sf.besseli(2, 0.0) == 0.0
    assert sf.struvel(0, 0.0) == 0.0
    assert sf.struvel(1, 0.0) == 0.0


def test_i0_at_10_matches_quadrature_oracle():
    oracle = bessel_i_quadrature(0, 10.0) * np.exp(10.0)
    assert abs(oracle - I0_AT_10) <= 1e-12 * I0_AT_10
    val = sf.besseli(0, 10.0)
    assert abs(val - oracle) <= 1e-12 * oracle


def test_wronskian_identity_on_log_grid():
    x = np.logspace(-3, np.log10(30.0), 200)
    w = sf.besseli(0, x) * sf.besselk(1, x) + sf.besseli(1, x) * sf.besselk(0, x)
    assert np.max(np.abs(x * w - 1.0)) <= 1e-12


def test_k1_small_argument_asymptotic():
    x = 1e-3
    assert abs(x * sf.besselk(1, x) - 1.0) <= 1e-3


def test_k0_large_argument_asymptotic():
    x = 50.0
    val = sf.besselk(0, x, scaled=True) * np.sqrt(2.0 * x / np.pi)
    assert abs(val - 1.0) <= 1e-2


def test_scaled_unscaled_consistency():
    x = np.array([0.5, 3.0, 17.0, 120.0])
    for order in (0, 1, 2):
        lhs = sf.besseli(order, x)
        rhs = sf.besseli(order, x, scaled=True) * np.exp(x)
        assert np.max(np.abs(lhs - rhs) / rhs) <= 1e-14
    for order in (0, 1):
        lhs = sf.besselk(order, x)
        rhs = sf.besselk(order, x, scaled=True) * np.exp(-x)
        assert np.max(np.abs(lhs - rhs) / np.abs(lhs)) <= 1e-14


def test_scaled_variant_finite_up_to_1e4():
    x = np.logspace(0, 4, 40)
    for order in (0, 1, 2):
        assert np.all(np.isfinite(sf.besseli(order, x, scaled=True)))
    for order in (0, 1):
        assert np.all(np.isfinite(sf.besselk(order, x, scaled=True)))


def test_struve_quadrature_oracle_at_3():
    oracle = struve_l_quadrature(0, 3.0)
    assert abs(oracle - L0_AT_3) <= 1e-12 * L0_AT_3
    assert abs(sf.struvel(0, 3.0) - oracle) <= 1e-10 * oracle


def test_struve_bessel_cross_derivative_identity():
    # d/ds [pi s (I1 L0 - I0 L1)] = 2 s I1(s)
    s, d = 2.0, 1e-5
    fd = (sf.struve_bessel_cross(s + d) - sf.struve_bessel_cross(s - d)) / (2 * d)
    assert abs(fd - 2.0 * s * sf.besseli(1, s)) <= 1e-6


def test_struve_bessel_cross_nondecreasing():
    s = np.linspace(0.0, 20.0, 200)
    assert np.all(np.diff(sf.struve_bessel_cross(s)) >= -1e-14)


def test_k_quadrature_oracle():
    x = np.logspace(-1, np.log10(40.0), 25)
    for order in (0, 1):
        vals = sf.besselk(order, x, scaled=True)
        oracle = np.array([bessel_k_quadrature(order, xi) for xi in x])
        assert np.max(np.abs(vals - oracle) / oracle) <= 1e-12


@pytest.mark.parametrize("order", [0, 1, 2])
def test_i_family_two_branch_seam(order):
    seam = np.array([sf.SEAM_I])
    a = sf._iv_series_scaled(order, seam)[0]
    b = sf._iv_asym_scaled(order, seam)[0]
    assert abs(a - b) <= 1e-12 * a


@pytest.mark.parametrize("order", [0, 1])
def test_k_family_two_branch_seam(order):
    seam = np.array([sf.SEAM_K])
    a = sf._kv_series_scaled(order, seam)[0]
    b = sf._kv_cf2_scaled(seam)[order][0]
    assert abs(a - b) <= 1e-12 * a


def test_f_ratio_values():
    assert sf.f_ratio(0.0) == 2.0
    # second central difference -> f''(0) = 1/2
    h = 1e-3
    second = (sf.f_ratio(h) - 2.0 * sf.f_ratio(0.0) + sf.f_ratio(-h)) / h**2
    assert abs(second - 0.5) <= 1e-6
    assert abs(sf.f_ratio(100.0) / np.sqrt(1.0 + 100.0**2) - 1.0) <= 1e-2
    # even and total
    k = np.linspace(-40.0, 40.0, 81)
    assert np.allclose(sf.f_ratio(k), sf.f_ratio(-k), rtol=0, atol=0)
    assert np.all(sf.f_ratio(k) > 0)


def test_f_ratio_series_matches_bessel_branch_at_cut():
    k = sf.F_SERIES_CUT
    series = np.polynomial.polynomial.polyval(0.25 * k * k, sf.F_COEFFS)
    direct = k * sf.besseli(0, k, scaled=True) / sf.besseli(1, k, scaled=True)
    assert abs(series - direct) <= 1e-13 * direct


def test_f_ratio_minus2_cancellation_free():
    # leading term k^2/4 at tiny arguments, no catastrophic subtraction
    k = np.array([1e-9, 1e-6, 1e-4])
    fm2 = sf.f_ratio_minus2(k)
    assert np.max(np.abs(fm2 - k**2 / 4.0) / (k**2 / 4.0)) <= 1e-8
    assert np.all(fm2 > 0)
    # consistent with f itself across the series/ratio seam
    for kk in (1e-3, 0.3, sf.F_SERIES_CUT, 0.8, 5.0):
        assert abs(sf.f_ratio_minus2(kk) - (sf.f_ratio(kk) - 2.0)) <= 1e-13


def test_domain_errors():
    with pytest.raises(DomainError):
        sf.besseli(0, -1.0)
    with pytest.raises(DomainError):
        sf.besseli(3, 1.0)
    with pytest.raises(DomainError):
        sf.besselk(0, 0.0)
    with pytest.raises(DomainError):
        sf.besselk(2, 1.0)
    with pytest.raises(DomainError):
        sf.struvel(0, -0.5)


def test_spec_eval_record():
    ev = sf.modified_bessel_i(1, 3.0)
    assert ev.order == 1
    assert abs(ev.value - ev.scaled_value * np.exp(3.0)) <= 1e-12 * ev.value
    ek = sf.modified_bessel_k(0, 3.0)
    assert abs(ek.value - ek.scaled_value * np.exp(-3.0)) <= 1e-12 * ek.value
    # unscaled I overflows gracefully for huge arguments, scaled stays finite
    big = sf.modified_bessel_i(0, 1e4)
    assert np.isinf(big.value) and np.isfinite(big.scaled_value)


def test_vectorised_matches_scalar():
    x = np.array([0.1, 1.0, 10.0, 40.0])
    vec = sf.besseli(0, x)
    for xi, vi in zip(x, vec):
        assert sf.besseli(0, float(xi)) == vi
