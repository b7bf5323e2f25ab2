"""Periodic spectral grid and fields.

Transform convention (fixed, used everywhere): on the box [-L, L) with N
equispaced nodes z_j = -L + 2 L j / N and wavenumbers k_m = pi m / L
(m = 0, 1, ..., N/2-1, -N/2, ..., -1 in FFT order), a field is

    u(z) = sum_m  c_m  exp(i k_m z),

so c_m is literally the coefficient of exp(i k_m z); the node offset is
absorbed by the phase (-1)^m relative to numpy's FFT.  Derivatives multiply
by (i k_m), with the Nyquist mode zeroed to keep real fields real.

Products of band-limited fields are computed exactly by zero-padding: a
product of p factors is evaluated on a grid of M >= (p+1) N / 2 points and
truncated back, so the retained N coefficients carry no aliasing error.

Parity tags:
  'even'           real field with u(z) = u(-z)      <=>  c real and even in m
  'real-transform' complex field, u(-z) = conj(u(z)) <=>  c real
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import GridError, ParameterError

__all__ = [
    "SpectralGrid",
    "SpectralField",
    "CutoffSpec",
    "dealiased_product",
    "coefficient_at",
]


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(eq=False)
class SpectralGrid:
    """Equispaced periodic grid on [-L, L) with N (power of two) nodes."""

    L: float
    N: int
    z: np.ndarray = dc_field(repr=False, default=None)
    k: np.ndarray = dc_field(repr=False, default=None)
    phase: np.ndarray = dc_field(repr=False, default=None)
    _cache: dict = dc_field(repr=False, default_factory=dict)

    def __post_init__(self):
        if self.L <= 0:
            raise ParameterError("grid half-length must be positive")
        if not _is_pow2(self.N):
            raise ParameterError(f"grid size must be a power of two, got {self.N}")
        n = self.N
        self.z = -self.L + 2.0 * self.L * np.arange(n) / n
        m = np.fft.fftfreq(n, d=1.0 / n)  # integer mode numbers, FFT order
        self.k = np.pi * m / self.L
        self.phase = np.where((m.astype(int) % 2) == 0, 1.0, -1.0)

    # -- constructors -------------------------------------------------------

    @classmethod
    def make(cls, L: float, N: int) -> "SpectralGrid":
        return cls(L=float(L), N=int(N))

    @classmethod
    def commensurate(cls, omega: float, min_half_length: float,
                     N: int) -> "SpectralGrid":
        """Smallest box L = m pi / omega >= min_half_length.

        Puts omega (and its harmonics) exactly on the wavenumber lattice,
        which mode-extraction and even carrier fields both require.
        """
        if omega <= 0:
            raise ParameterError("commensurate grid needs omega > 0")
        m = int(np.ceil(min_half_length * omega / np.pi))
        return cls(L=m * np.pi / omega, N=int(N))

    # -- transforms ---------------------------------------------------------

    @property
    def dz(self) -> float:
        return 2.0 * self.L / self.N

    def to_coeffs(self, values: np.ndarray) -> np.ndarray:
        """Coefficients of exp(i k_m z) from nodal values (last axis)."""
        return np.fft.fft(values, axis=-1) * (self.phase / self.N)

    def to_values(self, coeffs: np.ndarray) -> np.ndarray:
        """Nodal values from coefficients (last axis, FFT order)."""
        return np.fft.ifft(coeffs * self.phase, axis=-1) * self.N

    @property
    def ik(self) -> np.ndarray:
        """Derivative multiplier i k_m with the Nyquist mode zeroed."""
        if "ik" not in self._cache:
            v = 1j * self.k
            v[self.N // 2] = 0.0
            self._cache["ik"] = v
        return self._cache["ik"]

    def deriv_values(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        out = self.to_values(self.to_coeffs(values) * self.ik**order)
        if np.isrealobj(values):
            out = out.real
        return out

    def mode_index(self, k_target: float, tol: float = 1e-9) -> int:
        """FFT index of an exact lattice wavenumber."""
        m = k_target * self.L / np.pi
        mi = int(np.rint(m))
        if abs(m - mi) > tol:
            raise GridError(
                f"wavenumber {k_target} is not on the lattice (m = {m})"
            )
        return mi % self.N

    # -- zero-padded products ------------------------------------------------

    def _padded(self, nfactors: int) -> "SpectralGrid":
        key = ("pad", nfactors)
        if key not in self._cache:
            target = (nfactors + 1) * self.N // 2
            M = self.N
            while M < target:
                M *= 2
            self._cache[key] = SpectralGrid.make(self.L, M)
        return self._cache[key]

    def pad_coeffs(self, coeffs: np.ndarray, padded: "SpectralGrid") -> np.ndarray:
        n, M = self.N, padded.N
        if M == n:
            return coeffs
        out = np.zeros(coeffs.shape[:-1] + (M,), dtype=complex)
        out[..., : n // 2] = coeffs[..., : n // 2]
        # split the Nyquist pair so parity survives the refinement
        out[..., n // 2] = 0.5 * coeffs[..., n // 2]
        out[..., M - n // 2] = 0.5 * coeffs[..., n // 2]
        out[..., M - n // 2 + 1 :] = coeffs[..., n // 2 + 1 :]
        return out

    def truncate_coeffs(self, coeffs: np.ndarray, padded: "SpectralGrid") -> np.ndarray:
        n, M = self.N, padded.N
        if M == n:
            return coeffs
        out = np.empty(coeffs.shape[:-1] + (n,), dtype=complex)
        out[..., : n // 2] = coeffs[..., : n // 2]
        out[..., n // 2] = coeffs[..., n // 2] + coeffs[..., M - n // 2]
        out[..., n // 2 + 1 :] = coeffs[..., M - n // 2 + 1 :]
        return out

    def refine_values(self, values: np.ndarray, nfactors: int = 2) -> np.ndarray:
        """Values resampled on the padded grid for pointwise nonlinearities."""
        padded = self._padded(nfactors)
        out = padded.to_values(self.pad_coeffs(self.to_coeffs(values), padded))
        if np.isrealobj(values):
            out = out.real
        return out

    def project_values(self, fine_values: np.ndarray, nfactors: int = 2) -> np.ndarray:
        """Back from the padded grid, dropping the unresolved tail."""
        padded = self._padded(nfactors)
        out = self.to_values(
            self.truncate_coeffs(padded.to_coeffs(fine_values), padded)
        )
        if np.isrealobj(fine_values):
            out = out.real
        return out

    def product_values(self, factors: Sequence[np.ndarray]) -> np.ndarray:
        """Exact (dealiased) pointwise product of band-limited fields."""
        p = len(factors)
        if p == 1:
            return factors[0]
        padded = self._padded(p)
        prod = None
        real = all(np.isrealobj(f) for f in factors)
        for f in factors:
            fv = padded.to_values(self.pad_coeffs(self.to_coeffs(f), padded))
            prod = fv if prod is None else prod * fv
        out = self.to_values(self.truncate_coeffs(padded.to_coeffs(prod), padded))
        return out.real if real else out


def _parity_defect(grid: SpectralGrid, values: np.ndarray, parity: str) -> float:
    c = grid.to_coeffs(values)
    if parity == "even":
        rev = values[..., ::-1]
        mirrored = np.roll(rev, 1, axis=-1)  # z -> -z is j -> (N - j) mod N
        return float(
            np.max(np.abs(values - mirrored)) + np.max(np.abs(values.imag))
            if np.iscomplexobj(values)
            else np.max(np.abs(values - mirrored))
        )
    if parity == "real-transform":
        return float(np.max(np.abs(c.imag)))
    raise ParameterError(f"unknown parity tag {parity!r}")


class SpectralField:
    """Grid function with cached coefficients and an optional parity tag."""

    __slots__ = ("grid", "_values", "_coeffs", "parity")

    def __init__(self, grid: SpectralGrid, values=None, coeffs=None,
                 parity: Optional[str] = None, check_parity: bool = False):
        if (values is None) == (coeffs is None):
            raise ParameterError("provide exactly one of values, coeffs")
        self.grid = grid
        self._values = None if values is None else np.asarray(values)
        self._coeffs = None if coeffs is None else np.asarray(coeffs, dtype=complex)
        n = grid.N
        arr = self._values if self._values is not None else self._coeffs
        if arr.shape[-1] != n:
            raise GridError(f"field length {arr.shape[-1]} != grid size {n}")
        self.parity = parity
        if parity is not None and check_parity:
            defect = _parity_defect(grid, self.values, parity)
            if defect > 1e-12 * max(1.0, float(np.max(np.abs(self.values)))):
                raise ParameterError(f"parity {parity!r} violated by {defect:.2e}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_values(cls, grid, values, parity=None, check_parity=False):
        return cls(grid, values=values, parity=parity, check_parity=check_parity)

    @classmethod
    def from_coeffs(cls, grid, coeffs, parity=None):
        return cls(grid, coeffs=coeffs, parity=parity)

    @classmethod
    def from_function(cls, grid, fn: Callable, parity=None, check_parity=False):
        return cls(grid, values=fn(grid.z), parity=parity,
                   check_parity=check_parity)

    @classmethod
    def zero(cls, grid, parity="even"):
        return cls(grid, values=np.zeros(grid.N), parity=parity)

    # -- cached views --------------------------------------------------------

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            v = self.grid.to_values(self._coeffs)
            hermitian = np.max(np.abs(v.imag)) <= 1e-12 * max(
                1.0, float(np.max(np.abs(v.real)))
            )
            self._values = v.real if hermitian else v
        return self._values

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = self.grid.to_coeffs(self._values)
        return self._coeffs

    @property
    def is_real(self) -> bool:
        return np.isrealobj(self.values)

    # -- operations ----------------------------------------------------------

    def apply_multiplier(self, symbol) -> "SpectralField":
        """Pointwise-in-k multiplication by symbol(k) (callable or array)."""
        mult = symbol(self.grid.k) if callable(symbol) else np.asarray(symbol)
        new_coeffs = self.coeffs * mult
        parity = None
        if self.parity == "even" and np.isrealobj(mult):
            # an even real symbol preserves evenness
            if np.allclose(mult, mult[self.grid.reflect_idx()], rtol=0, atol=0):
                parity = "even"
        elif self.parity == "real-transform" and np.isrealobj(mult):
            parity = "real-transform"
        return SpectralField.from_coeffs(self.grid, new_coeffs, parity=parity)

    def deriv(self, order: int = 1) -> "SpectralField":
        c = self.coeffs * self.grid.ik**order
        out = SpectralField.from_coeffs(self.grid, c)
        if self.is_real:
            out._values = out.values  # force realness resolution
        return out

    def shift_reflect_defect(self) -> float:
        return _parity_defect(self.grid, self.values, self.parity or "even")

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dz))

    def evaluate_at(self, points) -> np.ndarray:
        """Exact trigonometric evaluation at arbitrary physical points."""
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        c = self.coeffs
        out = np.zeros(pts.shape, dtype=complex)
        k = self.grid.k
        chunk = 1 << 16
        for lo in range(0, pts.size, max(1, chunk // self.grid.N)):
            sl = slice(lo, min(pts.size, lo + max(1, chunk // self.grid.N)))
            out[sl] = np.exp(1j * np.outer(pts[sl], k)) @ c
        if self.is_real:
            return out.real
        return out

    def __add__(self, other):
        self._require_same_grid(other)
        return SpectralField.from_values(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._require_same_grid(other)
        return SpectralField.from_values(self.grid, self.values - other.values)

    def __rmul__(self, scalar):
        return SpectralField.from_values(self.grid, scalar * self.values,
                                         parity=self.parity)

    def _require_same_grid(self, other):
        if not isinstance(other, SpectralField) or other.grid is not self.grid:
            raise GridError("fields live on different grids")


def _reflect_idx(n: int) -> np.ndarray:
    return (-np.arange(n)) % n


def _grid_reflect(self: SpectralGrid) -> np.ndarray:
    if "reflect" not in self._cache:
        self._cache["reflect"] = _reflect_idx(self.N)
    return self._cache["reflect"]


SpectralGrid.reflect_idx = _grid_reflect


def dealiased_product(*fields: SpectralField) -> SpectralField:
    """Exact product of band-limited fields via zero padding."""
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid is not grid:
            raise GridError("product factors live on different grids")
    vals = grid.product_values([f.values for f in fields])
    parity = None
    tags = {f.parity for f in fields}
    if tags == {"even"}:
        parity = "even"
    return SpectralField.from_values(grid, vals, parity=parity)


def coefficient_at(field: SpectralField, k_target: float) -> complex:
    """Coefficient of exp(i k_target z); k_target must sit on the lattice."""
    return complex(field.coeffs[field.grid.mode_index(k_target)])


@dataclass(frozen=True)
class CutoffSpec:
    """Sharp spectral cutoffs around the carrier.

    chi0 is the indicator of |k| < delta; chi is the indicator of the
    carrier bands (+-omega - delta, +-omega + delta), which degenerates to
    chi0 when omega = 0.  Sharp by construction, hence idempotent.
    """

    delta: float
    omega: float = 0.0

    def __post_init__(self):
        if self.delta <= 0:
            raise ParameterError("cutoff width delta must be positive")
        if self.omega > 0 and not (self.delta < self.omega / 3.0):
            raise ParameterError(
                f"weak-regime cutoff needs delta < omega/3 = {self.omega / 3.0}"
            )

    def chi0(self, k) -> np.ndarray:
        return (np.abs(np.asarray(k)) < self.delta).astype(float)

    def chi(self, k) -> np.ndarray:
        return (np.abs(np.abs(np.asarray(k)) - self.omega) < self.delta).astype(
            float
        )
