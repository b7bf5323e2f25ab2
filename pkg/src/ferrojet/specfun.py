"""Modified Bessel and modified Struve functions on the nonnegative real axis.

Provides I0, I1, I2, K0, K1 and L0, L1 together with exponentially scaled
variants (e^-x I_n, e^x K_n) and the dispersion ratio

    f(k) = |k| I0(|k|) / I1(|k|),

which is the Fourier symbol of the order-zero surface-to-velocity operator.

Evaluation is two-regime: ascending power series below a seam, and an
asymptotic series (I family) or Lehmer/Thompson-Barnett continued fraction
(K family) above it.  The I series has positive terms only, so it is run up
to a generous seam; the K seam sits where the log-series cancellation is
still harmless.  All ratios that enter Green's-kernel code are formed from
scaled values, so nothing overflows for arguments up to 1e4 and beyond.

Everything is vectorised over numpy arrays; scalars in give scalars out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError

__all__ = [
    "SpecEval",
    "besseli",
    "besselk",
    "struvel",
    "f_ratio",
    "f_ratio_minus2",
    "f_ratio_series_coeffs",
    "modified_bessel_i",
    "modified_bessel_k",
    "modified_struve_l",
    "struve_bessel_cross",
    "SEAM_I",
    "SEAM_K",
    "SEAM_L",
]

# Branch seams.  The I series keeps all-positive terms, so accuracy is pure
# roundoff up to SEAM_I; beyond it the alternating asymptotic series is
# already below 1e-15 at optimal truncation.  The K log-series loses ~1
# digit to cancellation at x=2; the continued fraction takes over there.
SEAM_I = 30.0
SEAM_K = 2.0
SEAM_L = 60.0

_EULER_GAMMA = 0.57721566490153286060651209008240243

_I_SERIES_TERMS = 80
_K_SERIES_TERMS = 20
_L_SERIES_TERMS = 130
_ASYM_TERMS = 24
_CF_MAX_ITER = 300


def _asym_coeffs(nu: int, n: int) -> np.ndarray:
    # a_k(nu) = prod_{j<=k} (4 nu^2 - (2j-1)^2) / (k! 8^k)
    mu = 4 * nu * nu
    a = np.empty(n)
    a[0] = 1.0
    for j in range(1, n):
        a[j] = a[j - 1] * (mu - (2 * j - 1) ** 2) / (8.0 * j)
    return a


_ASYM_A = {nu: _asym_coeffs(nu, _ASYM_TERMS) for nu in (0, 1, 2)}


def _iv_series_scaled(nu: int, x: np.ndarray) -> np.ndarray:
    """e^-x I_nu(x) by the ascending series; valid for 0 <= x <= SEAM_I."""
    t = 0.25 * x * x
    term = (0.5 * x) ** nu / math.factorial(nu)
    total = term.copy()
    for m in range(1, _I_SERIES_TERMS):
        term = term * t / (m * (m + nu))
        total += term
    return total * np.exp(-x)


def _iv_asym_scaled(nu: int, x: np.ndarray) -> np.ndarray:
    """e^-x I_nu(x) by the large-argument expansion; valid for x > SEAM_I."""
    a = _ASYM_A[nu]
    inv = 1.0 / x
    s = np.zeros_like(x)
    for j in range(_ASYM_TERMS - 1, 0, -1):
        s = (s + (-1) ** j * a[j]) * inv
    s += a[0]
    return s / np.sqrt(2.0 * np.pi * x)


def _harmonic(n: int) -> float:
    return sum(1.0 / j for j in range(1, n + 1))


def _kv_series_scaled(order: int, x: np.ndarray) -> np.ndarray:
    """e^x K_order(x) from the log series; valid for 0 < x <= SEAM_K."""
    t = 0.25 * x * x
    lg = np.log(0.5 * x)
    i0 = _iv_series_scaled(0, x) * np.exp(x)
    i1 = _iv_series_scaled(1, x) * np.exp(x)
    if order == 0:
        # K0 = -(log(x/2) + gamma) I0 + sum_{m>=1} H_m t^m / (m!)^2
        term = np.ones_like(x)
        total = np.zeros_like(x)
        for m in range(1, _K_SERIES_TERMS):
            term = term * t / (m * m)
            total += term * _harmonic(m)
        k = -(lg + _EULER_GAMMA) * i0 + total
    else:
        # K1 = 1/x + log(x/2) I1 - (x/4) sum_m (H_m + H_{m+1} - 2 gamma) t^m / (m! (m+1)!)
        term = np.ones_like(x)
        total = (1.0 - 2.0 * _EULER_GAMMA) * term
        for m in range(1, _K_SERIES_TERMS):
            term = term * t / (m * (m + 1))
            total += term * (_harmonic(m) + _harmonic(m + 1) - 2.0 * _EULER_GAMMA)
        k = 1.0 / x + lg * i1 - 0.25 * x * total
    return k * np.exp(x)


def _kv_cf2_scaled(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(e^x K0, e^x K1) by the continued fraction; valid for x > SEAM_K."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _CF_MAX_ITER):
        a -= 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.max(np.abs(dels / s)) < 1e-16:
            break
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _lv_series(order: int, x: np.ndarray) -> np.ndarray:
    """L_order(x) by the ascending series; positive terms, x <= SEAM_L."""
    t = 0.25 * x * x
    # term0 = (x/2)^(order+1) / (Gamma(3/2) Gamma(order + 3/2))
    if order == 0:
        term = (0.5 * x) / (0.25 * np.pi)
    else:
        term = (0.5 * x) ** 2 / (0.375 * np.pi)
    total = term.copy()
    for m in range(1, _L_SERIES_TERMS):
        term = term * t / ((m + 0.5) * (m + order + 0.5))
        total += term
    return total


def _lv_minus_iv_asym(order: int, x: np.ndarray) -> np.ndarray:
    """L_nu(x) - I_nu(x) for large x (DLMF 11.6.2 with z = x on the real axis)."""
    # L_nu - I_nu ~ -(1/pi) sum_k (-1)^k Gamma(k+1/2) (x/2)^(nu-2k-1) / Gamma(nu+1/2-k)
    total = np.zeros_like(x)
    half = 0.5 * x
    for k in range(12):
        num = math.gamma(k + 0.5)
        den = math.gamma(order + 0.5 - k)
        total += (-1.0) ** k * num / den * half ** (order - 2 * k - 1)
    return -total / np.pi


def _vectorise(x, fn):
    arr = np.asarray(x, dtype=float)
    out = fn(np.atleast_1d(arr))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def _besseli_scaled(order: int, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    lo = x <= SEAM_I
    if np.any(lo):
        out[lo] = _iv_series_scaled(order, x[lo])
    if np.any(~lo):
        out[~lo] = _iv_asym_scaled(order, x[~lo])
    return out


def _besselk_scaled(order: int, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    lo = x <= SEAM_K
    if np.any(lo):
        out[lo] = _kv_series_scaled(order, x[lo])
    if np.any(~lo):
        k0, k1 = _kv_cf2_scaled(x[~lo])
        out[~lo] = k0 if order == 0 else k1
    return out


def besseli(order: int, x, scaled: bool = False):
    """I_order(x) for order in {0, 1, 2}, x >= 0.  scaled=True gives e^-x I."""
    if order not in (0, 1, 2):
        raise DomainError(f"unsupported order {order}; need 0, 1 or 2")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise DomainError("modified Bessel I requires x >= 0")

    def fn(a):
        v = _besseli_scaled(order, a)
        if scaled:
            return v
        with np.errstate(over="ignore"):
            return v * np.exp(a)

    return _vectorise(x, fn)


def besselk(order: int, x, scaled: bool = False):
    """K_order(x) for order in {0, 1}, x > 0.  scaled=True gives e^x K."""
    if order not in (0, 1):
        raise DomainError(f"unsupported order {order}; need 0 or 1")
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("modified Bessel K diverges at 0; requires x > 0")

    def fn(a):
        v = _besselk_scaled(order, a)
        if scaled:
            return v
        return v * np.exp(-a)

    return _vectorise(x, fn)


def struvel(order: int, x):
    """Modified Struve L_order(x) for order in {0, 1}, x >= 0."""
    if order not in (0, 1):
        raise DomainError(f"unsupported order {order}; need 0 or 1")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise DomainError("modified Struve L requires x >= 0")

    def fn(a):
        out = np.empty_like(a)
        lo = a <= SEAM_L
        if np.any(lo):
            out[lo] = _lv_series(order, a[lo])
        if np.any(~lo):
            hi = a[~lo]
            out[~lo] = besseli(order, hi) + _lv_minus_iv_asym(order, hi)
        return out

    return _vectorise(x, fn)


def struve_bessel_cross(s):
    """pi * s * (I1(s) L0(s) - I0(s) L1(s)); nondecreasing, derivative 2 s I1(s)."""
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0):
        raise DomainError("requires s >= 0")

    def fn(a):
        return np.pi * a * (
            besseli(1, a) * struvel(0, a) - besseli(0, a) * struvel(1, a)
        )

    return _vectorise(s, fn)


def _f_series_fractions(nterms: int = 14) -> list[Fraction]:
    # f(k) = 2 * Q(t) with t = k^2/4 and Q = A/B,
    # A_m = 1/(m!)^2, B_m = 1/(m!(m+1)!), exact long division.
    fac = [math.factorial(m) for m in range(nterms + 2)]
    A = [Fraction(1, fac[m] ** 2) for m in range(nterms + 1)]
    B = [Fraction(1, fac[m] * fac[m + 1]) for m in range(nterms + 1)]
    Q = [Fraction(0)] * (nterms + 1)
    Q[0] = Fraction(1)
    for n in range(1, nterms + 1):
        Q[n] = A[n] - sum(B[j] * Q[n - j] for j in range(1, n + 1))
    return Q


_F_Q = _f_series_fractions()
#: Taylor coefficients of f in t = k^2/4:  f = sum_j F_COEFFS[j] t^j
F_COEFFS = np.array([2.0 * float(q) for q in _F_Q])

#: |k| below which the Taylor series is used for f (and its small-k variants).
F_SERIES_CUT = 0.5


def f_ratio_series_coeffs() -> np.ndarray:
    """Taylor coefficients of f(k) in the variable t = k^2/4."""
    return F_COEFFS.copy()


def f_ratio(k):
    """f(k) = |k| I0(|k|) / I1(|k|), even, f(0) = 2; total on the real line."""

    def fn(a):
        ak = np.abs(a)
        out = np.empty_like(ak)
        small = ak <= F_SERIES_CUT
        if np.any(small):
            t = 0.25 * ak[small] ** 2
            out[small] = np.polynomial.polynomial.polyval(t, F_COEFFS)
        if np.any(~small):
            x = ak[~small]
            out[~small] = x * _besseli_scaled(0, x) / _besseli_scaled(1, x)
        return out

    return _vectorise(k, fn)


def f_ratio_minus2(k):
    """f(k) - 2, computed without cancellation near k = 0."""

    def fn(a):
        ak = np.abs(a)
        out = np.empty_like(ak)
        small = ak <= F_SERIES_CUT
        if np.any(small):
            t = 0.25 * ak[small] ** 2
            out[small] = t * np.polynomial.polynomial.polyval(t, F_COEFFS[1:])
        if np.any(~small):
            x = ak[~small]
            out[~small] = x * _besseli_scaled(0, x) / _besseli_scaled(1, x) - 2.0
        return out

    return _vectorise(k, fn)


@dataclass(frozen=True)
class SpecEval:
    """One special-function evaluation with its scaled companion.

    value = scaled_value * e^x for the I family and * e^-x for the K family;
    for large x the unscaled I value saturates to inf while scaled stays finite.
    """

    value: float | np.ndarray
    scaled_value: float | np.ndarray
    order: int
    argument: float | np.ndarray


def modified_bessel_i(order: int, x, scaled: bool = False) -> SpecEval:
    """I_order(x) packaged with its exponentially scaled value."""
    sv = besseli(order, x, scaled=True)
    with np.errstate(over="ignore"):
        v = sv * np.exp(np.asarray(x, dtype=float))
    if np.ndim(x) == 0:
        v = float(v)
    return SpecEval(value=v, scaled_value=sv, order=order, argument=x)


def modified_bessel_k(order: int, x, scaled: bool = False) -> SpecEval:
    """K_order(x) packaged with its exponentially scaled value."""
    sv = besselk(order, x, scaled=True)
    v = sv * np.exp(-np.asarray(x, dtype=float))
    if np.ndim(x) == 0:
        v = float(v)
    return SpecEval(value=v, scaled_value=sv, order=order, argument=x)


def modified_struve_l(order: int, x):
    """Modified Struve function L_order(x)."""
    return struvel(order, x)
