"""Spectral grid, fields, dealiased products, cutoffs."""

import numpy as np
import pytest

from ferrojet.errors import GridError, ParameterError
from ferrojet.spectral import (
    CutoffSpec,
    SpectralField,
    SpectralGrid,
    coefficient_at,
    dealiased_product,
)


@pytest.fixture(scope="module")
def grid():
    return SpectralGrid.make(8 * np.pi, 128)


def test_grid_validation():
    with pytest.raises(ParameterError):
        SpectralGrid.make(10.0, 100)  # not a power of two
    with pytest.raises(ParameterError):
        SpectralGrid.make(-1.0, 128)


def test_round_trip_random_fields(grid, rng):
    v = rng.standard_normal(grid.N)
    err = np.max(np.abs(grid.to_values(grid.to_coeffs(v)) - v))
    assert err <= 1e-13
    c = rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)
    err = np.max(np.abs(grid.to_coeffs(grid.to_values(c)) - c))
    assert err <= 1e-13


def test_coefficient_semantics(grid):
    f = SpectralField.from_function(grid, lambda z: np.cos(3 * z), parity="even")
    assert coefficient_at(f, 3.0) == pytest.approx(0.5, abs=1e-13)
    assert coefficient_at(f, -3.0) == pytest.approx(0.5, abs=1e-13)
    g = SpectralField.from_function(grid, lambda z: np.sin(2 * z))
    assert coefficient_at(g, 2.0) == pytest.approx(-0.5j, abs=1e-13)


def test_multiplier_identity_and_eigenfunction(grid):
    f = SpectralField.from_function(grid, lambda z: np.sin(2 * z))
    ident = f.apply_multiplier(lambda k: np.ones_like(k))
    assert np.max(np.abs(ident.values - f.values)) <= 1e-14
    d2 = f.apply_multiplier(lambda k: k**2)
    assert np.max(np.abs(d2.values - 4.0 * np.sin(2 * grid.z))) <= 1e-12


def test_multiplier_algebra_composition(grid, rng):
    f = SpectralField.from_values(grid, rng.standard_normal(grid.N))
    a = lambda k: 1.0 + 0.3 * k**2
    b = lambda k: np.cos(k)
    ab = f.apply_multiplier(lambda k: a(k) * b(k))
    seq = f.apply_multiplier(a).apply_multiplier(b)
    assert np.max(np.abs(ab.values - seq.values)) <= 1e-13 * max(
        1.0, np.max(np.abs(ab.values))
    )


def test_dealiased_product_exact(grid):
    a = SpectralField.from_function(grid, lambda z: np.cos(3 * z), parity="even")
    b = SpectralField.from_function(grid, lambda z: np.cos(5 * z), parity="even")
    p = dealiased_product(a, b)
    exact = 0.5 * np.cos(2 * grid.z) + 0.5 * np.cos(8 * grid.z)
    assert np.max(np.abs(p.values - exact)) <= 1e-13
    assert p.parity == "even"


def test_dealiased_product_kills_aliasing(grid):
    # naive pointwise product of high modes aliases into the retained band
    k1, k2 = 50 / 8, 40 / 8
    a = SpectralField.from_function(grid, lambda z: np.cos(k1 * z))
    b = SpectralField.from_function(grid, lambda z: np.cos(k2 * z))
    p = dealiased_product(a, b)
    exact = 0.5 * np.cos((k1 - k2) * grid.z)  # the sum band exceeds Nyquist
    assert np.max(np.abs(p.values - exact)) <= 1e-13
    naive = a.values * b.values
    assert np.max(np.abs(naive - exact)) > 0.4


def test_triple_product_dealiased(grid):
    a = SpectralField.from_function(grid, lambda z: np.cos(2 * z))
    p = dealiased_product(a, a, a)
    exact = 0.75 * np.cos(2 * grid.z) + 0.25 * np.cos(6 * grid.z)
    assert np.max(np.abs(p.values - exact)) <= 1e-13


def test_pad_truncate_nyquist_round_trip(grid):
    c = np.zeros(grid.N, dtype=complex)
    c[grid.N // 2] = 1.0
    padded = grid._padded(2)
    rt = grid.truncate_coeffs(grid.pad_coeffs(c, padded), padded)
    assert np.max(np.abs(rt - c)) == 0.0


def test_parity_tags(grid):
    f = SpectralField.from_function(grid, lambda z: np.cos(z) + 0.2 * np.cos(3 * z),
                                    parity="even", check_parity=True)
    assert f.shift_reflect_defect() <= 1e-12
    with pytest.raises(ParameterError):
        SpectralField.from_function(grid, np.sin, parity="even", check_parity=True)
    # conjugate-even: real coefficients
    c = np.zeros(grid.N)
    c[grid.mode_index(1.0)] = 0.25
    c[grid.mode_index(-2.0)] = 0.5
    g = SpectralField.from_coeffs(grid, c.astype(complex), parity="real-transform")
    vals = g.values
    mirrored = np.conj(np.roll(vals[::-1], 1))
    assert np.max(np.abs(vals - mirrored)) <= 1e-13


def test_even_symbol_preserves_parity(grid):
    f = SpectralField.from_function(grid, lambda z: np.cos(2 * z), parity="even")
    out = f.apply_multiplier(lambda k: k**2 + 1.0)
    assert out.parity == "even"
    assert out.shift_reflect_defect() <= 1e-12


def test_evaluate_at(grid):
    f = SpectralField.from_function(grid, lambda z: np.cos(3 * z))
    pts = np.array([-3.3, 0.1, 7.7])
    assert np.max(np.abs(f.evaluate_at(pts) - np.cos(3 * pts))) <= 1e-13


def test_grid_mismatch_raises(grid):
    other = SpectralGrid.make(grid.L, grid.N)
    a = SpectralField.from_function(grid, np.cos)
    b = SpectralField.from_function(other, np.cos)
    with pytest.raises(GridError):
        dealiased_product(a, b)
    with pytest.raises(GridError):
        grid.mode_index(np.pi / 3.0)  # off-lattice wavenumber


def test_cutoff_spec():
    cs = CutoffSpec(delta=0.5, omega=2.0)
    k = np.linspace(-4, 4, 801)
    chi0 = cs.chi0(k)
    assert np.all(chi0 * chi0 == chi0)  # sharp indicator, idempotent
    assert np.all(chi0[np.abs(k) >= 0.5] == 0.0)
    chi = cs.chi(k)
    assert np.all(chi[np.abs(np.abs(k) - 2.0) >= 0.5] == 0.0)
    with pytest.raises(ParameterError):
        CutoffSpec(delta=0.8, omega=2.0)  # violates delta < omega/3
    CutoffSpec(delta=0.5)  # strong-regime default shape


def test_cutoff_support_after_projection(grid):
    cs = CutoffSpec(delta=1.0)
    f = SpectralField.from_function(grid, lambda z: 1.0 / np.cosh(z))
    cut = f.apply_multiplier(cs.chi0)
    outside = np.abs(grid.k) >= 1.0
    assert np.max(np.abs(cut.coeffs[outside])) == 0.0
    twice = cut.apply_multiplier(cs.chi0)
    assert np.max(np.abs(twice.coeffs - cut.coeffs)) == 0.0


def test_commensurate_grid():
    omega = 2.675240200697746
    g = SpectralGrid.commensurate(omega, 40.0, 256)
    assert g.L >= 40.0
    m = g.mode_index(omega)
    assert abs(g.k[m] - omega) <= 1e-12
    g.mode_index(2 * omega)
