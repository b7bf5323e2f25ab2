"""Linear dispersion relation of the axisymmetric jet.

The phase speed of sinusoidal wave trains satisfies

    c^2(k) = (gamma - 1 + k^2) / f(k),        f(k) = |k| I0(|k|)/I1(|k|),

with gamma > 1 the magnetic Bond-type number.  For 1 < gamma <= 9 the global
minimum of c^2 sits at k = 0; for gamma > 9 it moves to a positive wavenumber
omega, the unique root of h(omega) = gamma where

    h(k) = 1 - k^2 + 2 k f(k) / f'(k)

is strictly increasing with h(0+) = 9.  The symbol of the linearised
travelling-wave problem at the bifurcation speed is

    g(k) = gamma - 1 + k^2 - c0^2 f(k) >= 0,

vanishing exactly at k = +-omega (k = 0 in the strong regime).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ParameterError, RegimeError
from .specfun import (
    F_COEFFS,
    F_SERIES_CUT,
    _besseli_scaled,
    _vectorise,
    f_ratio,
    f_ratio_minus2,
)

__all__ = [
    "Regime",
    "DispersionProfile",
    "c_squared",
    "f_prime",
    "h_function",
    "omega_of_gamma",
    "make_profile",
]

GAMMA_CRITICAL = 9.0

# d/dk of the f Taylor series: f' = (k/2) * sum_j j C_j t^(j-1), t = k^2/4
_FPRIME_COEFFS = F_COEFFS[1:] * np.arange(1, len(F_COEFFS))


class Regime(enum.Enum):
    STRONG = "strong"
    CRITICAL = "critical"
    WEAK = "weak"


def c_squared(k, gamma: float):
    """Squared wave speed c^2(k) = (gamma - 1 + k^2)/f(k); even and positive."""
    if gamma <= 1.0:
        raise ParameterError(f"gamma must exceed 1, got {gamma}")

    def fn(a):
        return (gamma - 1.0 + a * a) / f_ratio(a)

    return _vectorise(k, fn)


def f_prime(k):
    """Derivative of the dispersion ratio, f'(k) = k - k I0(k) I2(k) / I1(k)^2.

    Odd in k, with f'(0) = 0; a Taylor branch below ``F_SERIES_CUT`` avoids
    the 0/0 in the Bessel formula.
    """

    def fn(a):
        ak = np.abs(a)
        out = np.empty_like(ak)
        small = ak <= F_SERIES_CUT
        if np.any(small):
            t = 0.25 * ak[small] ** 2
            out[small] = 0.5 * ak[small] * np.polynomial.polynomial.polyval(
                t, _FPRIME_COEFFS
            )
        if np.any(~small):
            x = ak[~small]
            i0 = _besseli_scaled(0, x)
            i1 = _besseli_scaled(1, x)
            i2 = _besseli_scaled(2, x)
            out[~small] = x * (1.0 - i0 * i2 / (i1 * i1))
        return out * np.sign(a)

    return _vectorise(k, fn)


def h_function(k):
    """h(k) = 1 - k^2 + 2 k f(k)/f'(k); strictly increasing, h(0+) = 9."""
    arr = np.asarray(k, dtype=float)
    if np.any(arr <= 0):
        raise ParameterError("h is evaluated on k > 0 (limit 9 at k = 0+)")

    def fn(a):
        return 1.0 - a * a + 2.0 * a * f_ratio(a) / f_prime(a)

    return _vectorise(k, fn)


def omega_of_gamma(gamma: float, tol: float = 1e-12) -> float:
    """Root of h(omega) = gamma for gamma > 9, by bracketed bisection.

    h is strictly increasing and unbounded, so growing the bracket always
    terminates; bisection then needs ~60 halvings for tol = 1e-12.
    """
    if gamma <= GAMMA_CRITICAL:
        raise RegimeError(
            f"omega is defined for gamma > 9 (weak regime); got {gamma}"
        )
    lo, hi = 1e-8, 1.0
    doublings = 0
    while h_function(hi) < gamma:
        hi *= 2.0
        doublings += 1
        if doublings > 200:
            raise ConvergenceError(
                f"failed to bracket h(omega) = {gamma}; h({hi/2}) = "
                f"{h_function(hi/2)}"
            )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h_function(mid) < gamma:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class DispersionProfile:
    """Regime classification plus evaluators for f, f', c^2, g and h.

    In the weak regime c0^2 = 2 omega / f'(omega), which makes g'(omega)
    vanish identically; the strong/critical value is c^2(0) = (gamma-1)/2.
    """

    gamma: float
    regime: Regime
    omega: float
    c0_squared: float
    _g0: float = field(repr=False, default=0.0)

    def f(self, k):
        return f_ratio(k)

    def f_prime(self, k):
        return f_prime(k)

    def c2(self, k):
        return c_squared(k, self.gamma)

    def h(self, k):
        return h_function(k)

    def g(self, k):
        """g(k) = gamma - 1 + k^2 - c0^2 f(k), assembled cancellation-free."""

        def fn(a):
            return self._g0 + a * a - self.c0_squared * f_ratio_minus2(a)

        return _vectorise(k, fn)

    def g_scaled(self, epsilon: float, k):
        """eps^-2 g(eps k); tends to ((9-gamma)/8) k^2 as eps -> 0 (strong)."""
        e2 = epsilon * epsilon

        def fn(a):
            return (
                self._g0 / e2
                + a * a
                - self.c0_squared * f_ratio_minus2(epsilon * a) / e2
            )

        return _vectorise(k, fn)

    def g_prime(self, k, step: float = 1e-3):
        # step balances the eps |g| / h^2 roundoff of the stencil against
        # its h^2 truncation; 1e-5 would be roundoff-dominated (~2e-5 bias)
        return (self.g(np.asarray(k) + step) - self.g(np.asarray(k) - step)) / (
            2.0 * step
        )

    def g_second(self, k, step: float = 1e-3):
        ka = np.asarray(k)
        return (self.g(ka + step) - 2.0 * self.g(ka) + self.g(ka - step)) / (
            step * step
        )

    @property
    def solvable(self) -> bool:
        return self.regime is not Regime.CRITICAL


def make_profile(gamma: float, tol: float = 1e-12) -> DispersionProfile:
    """Classify gamma and build the dispersion profile with verified invariants."""
    if gamma <= 1.0:
        raise ParameterError(f"theory requires gamma > 1, got {gamma}")
    if gamma < GAMMA_CRITICAL:
        regime, omega = Regime.STRONG, 0.0
        c0sq = 0.5 * (gamma - 1.0)
    elif gamma == GAMMA_CRITICAL:
        regime, omega = Regime.CRITICAL, 0.0
        c0sq = 0.5 * (gamma - 1.0)
    else:
        regime = Regime.WEAK
        omega = omega_of_gamma(gamma, tol=tol)
        c0sq = 2.0 * omega / f_prime(omega)

    g0 = gamma - 1.0 - 2.0 * c0sq
    profile = DispersionProfile(
        gamma=gamma, regime=regime, omega=omega, c0_squared=c0sq, _g0=g0
    )

    if regime is Regime.WEAK:
        if abs(profile.g(omega)) > 1e-9:
            raise ConvergenceError(
                f"dispersion minimum not resolved: g(omega) = {profile.g(omega)}"
            )
        if abs(profile.g_prime(omega)) > 1e-6:
            raise ConvergenceError(
                f"g'(omega) = {profile.g_prime(omega)} exceeds tolerance"
            )
        if profile.g_second(omega) <= 0.0:
            raise ConvergenceError("g''(omega) must be positive at the minimum")
        alt = c_squared(omega, gamma)
        if abs(alt - c0sq) > 1e-10 * abs(c0sq):
            raise ConvergenceError(
                f"c0^2 mismatch: 2 omega/f'(omega) = {c0sq} vs c^2(omega) = {alt}"
            )
    return profile
