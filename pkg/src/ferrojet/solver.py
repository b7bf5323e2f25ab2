"""Newton continuation for the envelope equations and the full equation.

All solves run in symmetric subspaces, which removes the translation (and,
for the complex envelope, phase) kernel directions so the roots are
isolated:

  * even real fields   -- cosine coefficients, length N/2 + 1
    (stationary KdV, full-dispersion KdV, full travelling-wave equation);
  * conjugate-even complex fields -- real transform coefficients, length N
    (full-dispersion NLS, zeta(-Z) = conj zeta(Z)).

The linear solves use dense factorisations of the reduced Jacobian, which
is assembled by batched application of the analytic derivative to basis
vectors; a finite-difference cross-check of that derivative is part of the
acceptance suite.  Damped steps (halving on residual growth, plus a
geometry guard for the full equation) keep the accepted residual history
strictly decreasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import dno
from . import operators as op
from .dispersion import Regime, make_profile
from .errors import ConvergenceError, ParameterError, RegimeError
from .spectral import SpectralField, SpectralGrid
from .wnl import MagnetizationLaw, WnlCoeffs, kdv_coeffs, nls_coeffs, zeta_kdv, zeta_nls

__all__ = [
    "SolveReport",
    "SolverProblem",
    "solve_stationary_kdv",
    "solve_full_dispersion_kdv",
    "solve_full_dispersion_nls",
    "solve_travelling_wave",
    "reconstruct_eta",
    "convergence_study",
    "ConvergenceStudy",
    "check_jacobian",
    "kdv_problem",
    "fd_kdv_problem",
    "fd_nls_problem",
    "travelling_wave_problem",
    "default_scaled_grid",
]

DEFAULT_SCALED_L = 40.0
DEFAULT_SCALED_N = 1024


def default_scaled_grid() -> SpectralGrid:
    return SpectralGrid.make(DEFAULT_SCALED_L, DEFAULT_SCALED_N)


# -- symmetric-subspace coordinates -------------------------------------------


def _rphase(grid: SpectralGrid) -> np.ndarray:
    if "rphase" not in grid._cache:
        m = np.arange(grid.N // 2 + 1)
        grid._cache["rphase"] = np.where(m % 2 == 0, 1.0, -1.0)
    return grid._cache["rphase"]


class EvenBasis:
    """Even real fields <-> real rfft coefficients (cosine modes)."""

    def __init__(self, grid: SpectralGrid):
        self.grid = grid
        self.dim = grid.N // 2 + 1

    def to_values(self, v: np.ndarray) -> np.ndarray:
        rc = np.asarray(v) * _rphase(self.grid) * self.grid.N
        return np.fft.irfft(rc, n=self.grid.N, axis=-1)

    def to_coords(self, values: np.ndarray) -> np.ndarray:
        rc = np.fft.rfft(values, axis=-1) * (_rphase(self.grid) / self.grid.N)
        return rc.real

    def field(self, v: np.ndarray) -> SpectralField:
        return SpectralField.from_values(self.grid, self.to_values(v),
                                         parity="even")


class ConjugateEvenBasis:
    """zeta(-Z) = conj zeta(Z) fields <-> real full-FFT coefficients."""

    def __init__(self, grid: SpectralGrid):
        self.grid = grid
        self.dim = grid.N

    def to_values(self, v: np.ndarray) -> np.ndarray:
        return self.grid.to_values(np.asarray(v, dtype=complex))

    def to_coords(self, values: np.ndarray) -> np.ndarray:
        return self.grid.to_coeffs(values).real

    def field(self, v: np.ndarray) -> SpectralField:
        return SpectralField.from_coeffs(
            self.grid, np.asarray(v, dtype=complex), parity="real-transform"
        )


# -- generic Newton driver -----------------------------------------------------


@dataclass
class SolverProblem:
    """Residual map in subspace coordinates plus its Jacobian action.

    ``prepare`` (optional) builds a state-dependent linearisation context
    once per assembly; ``jv_batch`` receives it as third argument when set.
    """

    basis: object
    residual: Callable[[np.ndarray], np.ndarray]
    jv_batch: Callable[..., np.ndarray]
    geometry_ok: Optional[Callable[[np.ndarray], bool]] = None
    reassemble_each_step: bool = True
    prepare: Optional[Callable[[np.ndarray], object]] = None

    @property
    def dim(self) -> int:
        return self.basis.dim

    def apply_jacobian(self, v: np.ndarray, W: np.ndarray) -> np.ndarray:
        if self.prepare is None:
            return self.jv_batch(v, W)
        return self.jv_batch(v, W, self.prepare(v))

    def assemble_jacobian(self, v: np.ndarray, chunk: int = 512) -> np.ndarray:
        d = self.dim
        J = np.empty((d, d))
        eye = np.eye(d)
        ctx = self.prepare(v) if self.prepare is not None else None
        for lo in range(0, d, chunk):
            hi = min(d, lo + chunk)
            if ctx is None:
                J[:, lo:hi] = self.jv_batch(v, eye[lo:hi]).T
            else:
                J[:, lo:hi] = self.jv_batch(v, eye[lo:hi], ctx).T
        return J


@dataclass
class SolveReport:
    """Outcome of one Newton run."""

    converged: bool
    iterations: int
    final_residual: float
    final_residual_l2: float
    solution: SpectralField
    epsilon: float
    branch: str
    residual_history: list
    diagnostics: dict = field(default_factory=dict)


def _res_norms(grid: SpectralGrid, basis, r: np.ndarray):
    vals = basis.to_values(r)
    return float(np.max(np.abs(vals))), float(
        np.sqrt(np.sum(np.abs(vals) ** 2) * grid.dz)
    )


def _newton(problem: SolverProblem, v0: np.ndarray, tol: float,
            max_iter: int, min_step: float = 2.0**-10):
    v = np.array(v0, dtype=float)
    grid = problem.basis.grid
    r = problem.residual(v)
    rmax, rl2 = _res_norms(grid, problem.basis, r)
    history = [rmax]
    J = None
    reassemble = True
    its = 0
    for its in range(1, max_iter + 1):
        if rmax <= tol:
            break
        if J is None or reassemble:
            J = problem.assemble_jacobian(v)
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian: {exc}") from exc
        s = 1.0
        while True:
            v_try = v - s * step
            if problem.geometry_ok is not None and not problem.geometry_ok(v_try):
                s *= 0.5
                if s < min_step:
                    raise ConvergenceError(
                        "step damping hit the geometry guard floor"
                    )
                continue
            r_try = problem.residual(v_try)
            rmax_try, rl2_try = _res_norms(grid, problem.basis, r_try)
            if rmax_try < rmax or rmax_try <= tol:
                break
            s *= 0.5
            if s < min_step:
                raise ConvergenceError(
                    f"Newton stagnation: residual stuck at {rmax:.3e}"
                )
        ratio = rmax_try / rmax if rmax > 0 else 0.0
        v, r, rmax, rl2 = v_try, r_try, rmax_try, rl2_try
        history.append(rmax)
        # with a frozen Jacobian, reassemble only when contraction degrades
        reassemble = problem.reassemble_each_step or (ratio > 0.25 and rmax > tol)
    converged = rmax <= tol
    return v, converged, its, rmax, rl2, history


# -- problem factories ---------------------------------------------------------


def kdv_problem(coeffs: WnlCoeffs, grid: SpectralGrid) -> SolverProblem:
    """Stationary KdV: p zeta'' + 2 c0^2 zeta + 2 c0^2 d0 zeta^2 = 0."""
    basis = EvenBasis(grid)
    kh = np.pi * np.arange(grid.N // 2 + 1) / grid.L
    sym = -coeffs.kdv_dispersion * kh**2 + 2.0 * coeffs.c0_squared
    quad = 2.0 * coeffs.c0_squared * coeffs.d0

    def residual(v):
        u = basis.to_values(v)
        u2 = grid.product_values([u, u])
        return sym * v + quad * basis.to_coords(u2)

    def jv_batch(v, W):
        u = basis.to_values(v)
        w = basis.to_values(W)
        return sym[None, :] * W + 2.0 * quad * basis.to_coords(
            grid.product_values([u, w])
        )

    return SolverProblem(basis=basis, residual=residual, jv_batch=jv_batch)


def fd_kdv_problem(gamma: float, law: MagnetizationLaw, epsilon: float,
                   grid: SpectralGrid, delta: float = 0.5) -> SolverProblem:
    """Full-dispersion KdV: eps^-2 g(eps D) + 2 c0^2 + quadratic cutoff term."""
    profile = make_profile(gamma)
    if profile.regime is not Regime.STRONG:
        raise RegimeError("full-dispersion KdV needs the strong regime")
    coeffs = kdv_coeffs(gamma, law)
    basis = EvenBasis(grid)
    kh = np.pi * np.arange(grid.N // 2 + 1) / grid.L
    sym = profile.g_scaled(epsilon, kh) + 2.0 * coeffs.c0_squared
    chi0 = (np.abs(epsilon * kh) < delta).astype(float)
    quad = 2.0 * coeffs.c0_squared * coeffs.d0

    def residual(v):
        u = basis.to_values(v)
        u2 = grid.product_values([u, u])
        return sym * v + quad * chi0 * basis.to_coords(u2)

    def jv_batch(v, W):
        u = basis.to_values(v)
        w = basis.to_values(W)
        return sym[None, :] * W + 2.0 * quad * chi0[None, :] * basis.to_coords(
            grid.product_values([u, w])
        )

    return SolverProblem(basis=basis, residual=residual, jv_batch=jv_batch)


def fd_nls_problem(gamma: float, law: MagnetizationLaw, epsilon: float,
                   grid: SpectralGrid,
                   delta: Optional[float] = None) -> SolverProblem:
    """Full-dispersion NLS: eps^-2 g(w + eps D) + a2 - a3 chi0 |z|^2 z."""
    profile = make_profile(gamma)
    if profile.regime is not Regime.WEAK:
        raise RegimeError("full-dispersion NLS needs the weak regime")
    coeffs = nls_coeffs(gamma, law, profile)
    if delta is None:
        delta = profile.omega / 6.0
    basis = ConjugateEvenBasis(grid)
    k = grid.k
    sym = profile.g(profile.omega + epsilon * k) / epsilon**2 + coeffs.a2
    chi0 = (np.abs(epsilon * k) < delta).astype(float)
    a3 = coeffs.a3

    def cubic(z):
        return grid.product_values([z, np.conj(z), z])

    def residual(v):
        z = basis.to_values(v)
        return sym * v - a3 * chi0 * basis.to_coords(cubic(z))

    def jv_batch(v, W):
        z = basis.to_values(v)
        w = basis.to_values(W)
        dcube = 2.0 * grid.product_values([z, np.conj(z), w]) + grid.product_values(
            [z, z, np.conj(w)]
        )
        return sym[None, :] * W - a3 * chi0[None, :] * basis.to_coords(dcube)

    return SolverProblem(basis=basis, residual=residual, jv_batch=jv_batch)


def travelling_wave_problem(gamma: float, law: MagnetizationLaw, c2: float,
                            grid: SpectralGrid, dn_order: int = 2,
                            dn_oracle: Optional[dno.RadialGrid] = None,
                            oracle_tol: float = 1e-12) -> SolverProblem:
    """Full truncated equation P(eta) - c^2 Q(eta) = 0 in the even subspace.

    The Jacobian always uses the expansion-mode derivative; in oracle mode
    the residual is BVP-backed and Newton becomes a chord method with the
    expansion Jacobian (the two operators differ at cubic order).
    """
    basis = EvenBasis(grid)

    def eta_of(v):
        return basis.to_values(v)

    def residual(v):
        eta = eta_of(v)
        if dn_oracle is not None:
            eta_field = SpectralField.from_values(grid, eta, parity="even")
            dn_apply = dno.dn_oracle_apply(eta_field, dn_oracle, tol=oracle_tol)
        else:
            dn_apply = lambda xi: op.dn_expansion(grid, eta, xi, dn_order)
        vals = op.wave_residual(grid, eta, c2, gamma, law, dn_apply)
        return basis.to_coords(vals)

    def prepare(v):
        eta = eta_of(v)
        return (
            op.pressure_jacobian_fields(grid, eta, gamma, law),
            op.KineticLinearization(grid, eta, dn_order),
        )

    def jv_batch(v, W, ctx=None):
        if ctx is None:
            ctx = prepare(v)
        press, kin = ctx
        w = basis.to_values(W)
        dvals = op.pressure_jvp(grid, press, w) - c2 * kin.apply(w)
        return basis.to_coords(dvals)

    def geometry_ok(v):
        return bool(np.min(1.0 + eta_of(v)) > 0.0)

    return SolverProblem(
        basis=basis,
        residual=residual,
        jv_batch=jv_batch,
        geometry_ok=geometry_ok,
        reassemble_each_step=False,
        prepare=prepare,
    )


# -- public solvers -------------------------------------------------------------


def _report(problem, v, converged, its, rmax, rl2, history, epsilon, branch,
            **extras) -> SolveReport:
    fieldv = problem.basis.field(v)
    diag = {"residual_history": history}
    diag.update(extras)
    return SolveReport(
        converged=converged,
        iterations=its,
        final_residual=rmax,
        final_residual_l2=rl2,
        solution=fieldv,
        epsilon=epsilon,
        branch=branch,
        residual_history=history,
        diagnostics=diag,
    )


def solve_stationary_kdv(coeffs: WnlCoeffs, grid: Optional[SpectralGrid] = None,
                         seed: Optional[np.ndarray] = None,
                         seed_scale: float = 0.9, tol: float = 1e-11,
                         max_iter: int = 40) -> SolveReport:
    """Newton solve of the stationary KdV equation from a scaled sech^2 seed."""
    if grid is None:
        grid = default_scaled_grid()
    problem = kdv_problem(coeffs, grid)
    if seed is None:
        seed = seed_scale * zeta_kdv(grid.z, coeffs)
    v0 = problem.basis.to_coords(np.asarray(seed, dtype=float))
    v, converged, its, rmax, rl2, hist = _newton(problem, v0, tol, max_iter)
    return _report(problem, v, converged, its, rmax, rl2, hist,
                   epsilon=0.0, branch="kdv")


def solve_full_dispersion_kdv(gamma: float, law: MagnetizationLaw,
                              epsilon: float,
                              grid: Optional[SpectralGrid] = None,
                              delta: float = 0.5, tol: float = 1e-10,
                              max_iter: int = 25) -> SolveReport:
    """Solve the full-dispersion KdV equation, seeded by the explicit envelope."""
    if not (0.0 < epsilon <= 0.3):
        raise ParameterError(
            f"full-dispersion KdV is solved for 0 < eps <= 0.3, got {epsilon}"
        )
    if grid is None:
        grid = default_scaled_grid()
    coeffs = kdv_coeffs(gamma, law)
    problem = fd_kdv_problem(gamma, law, epsilon, grid, delta=delta)
    seed = zeta_kdv(grid.z, coeffs)
    v0 = problem.basis.to_coords(seed)
    v, converged, its, rmax, rl2, hist = _newton(problem, v0, tol, max_iter)
    sol = problem.basis.field(v)
    dev = float(np.max(np.abs(sol.values - seed)))
    even_defect = sol.shift_reflect_defect()
    return _report(problem, v, converged, its, rmax, rl2, hist,
                   epsilon=epsilon, branch="kdv",
                   deviation_from_kdv=dev, even_defect=even_defect)


def solve_full_dispersion_nls(gamma: float, law: MagnetizationLaw,
                              epsilon: float, sign: int = +1,
                              grid: Optional[SpectralGrid] = None,
                              delta: Optional[float] = None,
                              tol: float = 1e-10,
                              max_iter: int = 25) -> SolveReport:
    """Solve the full-dispersion NLS equation for the +- branch."""
    if sign not in (+1, -1):
        raise ParameterError("branch sign must be +1 or -1")
    if not (0.0 < epsilon <= 0.3):
        raise ParameterError(
            f"full-dispersion NLS is solved for 0 < eps <= 0.3, got {epsilon}"
        )
    if grid is None:
        grid = default_scaled_grid()
    coeffs = nls_coeffs(gamma, law)
    problem = fd_nls_problem(gamma, law, epsilon, grid, delta=delta)
    seed = sign * zeta_nls(grid.z, coeffs)
    v0 = problem.basis.to_coords(seed.astype(complex))
    v, converged, its, rmax, rl2, hist = _newton(problem, v0, tol, max_iter)
    sol = problem.basis.field(v)
    dev = float(np.max(np.abs(sol.values - seed)))
    subspace_defect = float(np.max(np.abs(sol.coeffs.imag)))
    branch = "nls_plus" if sign > 0 else "nls_minus"
    return _report(problem, v, converged, its, rmax, rl2, hist,
                   epsilon=epsilon, branch=branch,
                   deviation_from_nls=dev, subspace_defect=subspace_defect)


def _auto_wave_grid(profile, epsilon: float, min_box: float) -> SpectralGrid:
    if profile.regime is Regime.STRONG:
        L = max(min_box / epsilon, min_box)
        k_target = 4.0
        n = 1 << int(np.ceil(np.log2(2.0 * L * k_target / np.pi)))
        return SpectralGrid.make(L, max(n, 256))
    omega = profile.omega
    min_L = max(min_box / epsilon, min_box)
    # resolve the second carrier harmonic with margin; the 3 omega band holds
    # only O(eps^3 / g(3 omega)) content and may fall to the truncation
    k_target = 2.0 * omega + 2.5
    grid = SpectralGrid.commensurate(omega, min_L, 256)
    n = 1 << int(np.ceil(np.log2(2.0 * grid.L * k_target / np.pi)))
    return SpectralGrid.commensurate(omega, min_L, max(n, 256))


def reconstruct_eta(zeta: SpectralField, epsilon: float, regime: Regime,
                    omega: float, target_grid: SpectralGrid) -> SpectralField:
    """Surface profile from a scaled envelope.

    Strong regime: eta(z) = eps^2 zeta(eps z); weak regime:
    eta(z) = eps Re(zeta(eps z) exp(i omega z)), even when zeta is in the
    conjugate-even subspace and omega sits on the target lattice.
    """
    zt = target_grid.z
    env = zeta.evaluate_at(epsilon * zt)
    if regime is Regime.STRONG:
        vals = epsilon**2 * np.real(env)
    else:
        target_grid.mode_index(omega)  # raises GridError if incommensurate
        vals = epsilon * np.real(env * np.exp(1j * omega * zt))
    return SpectralField.from_values(target_grid, vals, parity="even")


def solve_travelling_wave(gamma: float, law: MagnetizationLaw, epsilon: float,
                          dn_order: int = 2, dn_oracle: bool = False,
                          grid: Optional[SpectralGrid] = None,
                          rgrid: Optional[dno.RadialGrid] = None,
                          tol: float = 1e-10, max_iter: int = 40,
                          min_box: float = 40.0,
                          oracle_tol: float = 1e-12) -> SolveReport:
    """Newton solve of the full truncated travelling-wave equation.

    Seeded by the reconstructed leading-order profile; reports the
    normalised deviation ||eta - seed||_inf / eps^2 (strong) or / eps
    (weak) alongside the solve diagnostics.
    """
    if epsilon <= 0.0:
        raise ParameterError("epsilon must be positive")
    profile = make_profile(gamma)
    if not profile.solvable:
        raise RegimeError("gamma = 9 admits no solitary-wave continuation")
    c2 = profile.c0_squared * (1.0 - epsilon**2)
    if grid is None:
        grid = _auto_wave_grid(profile, epsilon, min_box)

    if profile.regime is Regime.STRONG:
        coeffs = kdv_coeffs(gamma, law)
        zgrid = SpectralGrid.make(epsilon * grid.L, 1024)
        zeta = SpectralField.from_values(zgrid, zeta_kdv(zgrid.z, coeffs),
                                         parity="even")
        power = 2
    else:
        coeffs = nls_coeffs(gamma, law, profile)
        zgrid = SpectralGrid.make(epsilon * grid.L, 1024)
        zeta = SpectralField.from_values(
            zgrid, zeta_nls(zgrid.z, coeffs).astype(complex),
            parity="real-transform",
        )
        power = 1
    seed_field = reconstruct_eta(zeta, epsilon, profile.regime, profile.omega,
                                 grid)
    seed = seed_field.values

    radial = rgrid if rgrid is not None else (dno.RadialGrid.make() if dn_oracle
                                              else None)
    problem = travelling_wave_problem(
        gamma, law, c2, grid, dn_order=dn_order,
        dn_oracle=radial if dn_oracle else None, oracle_tol=oracle_tol,
    )
    v0 = problem.basis.to_coords(seed)
    v, converged, its, rmax, rl2, hist = _newton(problem, v0, tol, max_iter)
    sol = problem.basis.field(v)
    deviation = float(np.max(np.abs(sol.values - seed))) / epsilon**power
    return _report(
        problem, v, converged, its, rmax, rl2, hist,
        epsilon=epsilon, branch="gzcs",
        normalized_deviation=deviation,
        seed_amplitude=float(np.max(np.abs(seed))),
        even_defect=sol.shift_reflect_defect(),
        regime=profile.regime.value,
    )


# -- convergence studies ---------------------------------------------------------


@dataclass
class ConvergenceStudy:
    epsilons: list
    errors: list
    residuals: list
    converged: list
    slope: float
    fit_residual: float
    complete: bool


def convergence_study(runner: Callable[[float], SolveReport],
                      epsilons: Sequence[float],
                      error_key: str) -> ConvergenceStudy:
    """Run a solver over a geometric epsilon ladder and fit the error slope."""
    if len(epsilons) < 3:
        raise ParameterError("a convergence study needs at least 3 epsilons")
    errors, residuals, flags = [], [], []
    for eps in epsilons:
        try:
            rep = runner(eps)
            errors.append(float(rep.diagnostics[error_key]))
            residuals.append(rep.final_residual)
            flags.append(bool(rep.converged))
        except ConvergenceError:
            errors.append(np.nan)
            residuals.append(np.nan)
            flags.append(False)
    ok = [i for i, f in enumerate(flags) if f and np.isfinite(errors[i])]
    complete = len(ok) == len(epsilons)
    if len(ok) >= 2:
        x = np.log([epsilons[i] for i in ok])
        y = np.log([errors[i] for i in ok])
        coef, res_ls = np.polyfit(x, y, 1, full=True)[:2]
        slope = float(coef[0])
        fit_residual = float(res_ls[0]) if len(res_ls) else 0.0
    else:
        slope, fit_residual = np.nan, np.nan
    return ConvergenceStudy(
        epsilons=list(epsilons), errors=errors, residuals=residuals,
        converged=flags, slope=slope, fit_residual=fit_residual,
        complete=complete,
    )


def check_jacobian(problem: SolverProblem, v: np.ndarray, n_dirs: int = 5,
                   seed: int = 0, h: float = 1e-6) -> float:
    """Worst relative error of the Jacobian action vs central differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    scale = max(1.0, float(np.max(np.abs(v))))
    for _ in range(n_dirs):
        w = rng.standard_normal(problem.dim)
        w /= np.linalg.norm(w)
        jw = problem.apply_jacobian(v, w[None, :])[0]
        step = h * scale
        fd = (problem.residual(v + step * w) - problem.residual(v - step * w)) / (
            2.0 * step
        )
        err = np.linalg.norm(fd - jw) / max(np.linalg.norm(jw), 1e-300)
        worst = max(worst, float(err))
    return worst
