"""Command-line front end: configuration, orchestration, plot-ready output.

Subcommands
    dispersion   tabulate f, c^2, g over a wavenumber grid + regime summary
    wnl          weakly nonlinear constants + operator-extraction comparison
    solve        Newton solves (kdv | nls+ | nls- | gzcs), optionally fanned
                 out over an epsilon ladder
    converge     epsilon ladder with a fitted error slope
    checks       oracle suites with a pass/fail table

Configuration comes from an optional flat key = value file (# comments)
overridden by command-line flags.  Data files are deterministic: floats are
written with 17 significant digits and carry no timestamps; the single
run_metadata.json holds the wall-clock stamp.

Exit codes: 0 success, 2 validation error, 3 numerical failure.  Errors are
mirrored as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import checks as checks_mod
from . import solver
from .dispersion import make_profile
from .errors import (
    ConvergenceError,
    ExistenceError,
    GeometryError,
    GridError,
    ParameterError,
    RegimeError,
)
from .operators import extract_wnl_coefficients
from .spectral import SpectralField, SpectralGrid
from .wnl import MagnetizationLaw, wnl_coeffs

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

_VALIDATION_ERRORS = (ParameterError, RegimeError, GridError, KeyError)
_NUMERICAL_ERRORS = (ConvergenceError, ExistenceError, GeometryError)


def _fmt(x) -> str:
    return "%.17g" % float(x)


@dataclass
class RunConfig:
    gamma: float = 5.0
    law_kind: str = "linear"
    nu2: float = 1.0
    nu3: float = 0.0
    epsilon: list = field(default_factory=lambda: [0.1])
    grid_l: Optional[float] = None
    grid_n: Optional[int] = None
    delta: Optional[float] = None
    k_order: int = 2
    branch: str = "kdv"
    suite: str = "specfun"
    tol: float = 1e-10
    out: Path = Path(".")

    def law(self) -> MagnetizationLaw:
        if self.law_kind == "linear":
            return MagnetizationLaw.linear()
        if self.law_kind == "custom":
            law = MagnetizationLaw.from_derivatives(self.nu2, self.nu3)
            law.validate()
            return law
        raise ParameterError(
            f"law must be 'linear' or 'custom', got {self.law_kind!r}"
        )

    def validate(self) -> None:
        if self.gamma <= 1.0:
            raise ParameterError(f"gamma must exceed 1, got {self.gamma}")
        for eps in self.epsilon:
            if not (0.0 < eps <= 0.5):
                raise ParameterError(
                    f"epsilon must lie in (0, 0.5], got {eps}"
                )
        if self.grid_n is not None and (self.grid_n & (self.grid_n - 1)) != 0:
            raise ParameterError(f"grid N must be a power of two, got {self.grid_n}")
        if self.delta is not None and self.delta <= 0.0:
            raise ParameterError("delta must be positive")
        if self.k_order not in (0, 1, 2):
            raise ParameterError("k-order must be 0, 1 or 2")


_CONFIG_FLOAT = {"gamma", "nu2", "nu3", "delta", "tol", "grid_l"}
_CONFIG_INT = {"grid_n", "k_order"}


def parse_config_file(path: Path) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment; keys match flags."""
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(
                f"{path}:{lineno}: expected 'key = value', got {raw!r}"
            )
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "epsilon":
            out[key] = [float(tok) for tok in value.replace(",", " ").split()]
        elif key in _CONFIG_FLOAT:
            out[key] = float(value)
        elif key in _CONFIG_INT:
            out[key] = int(value)
        elif key in {"law", "law_kind"}:
            out["law_kind"] = value
        elif key in {"branch", "suite", "out"}:
            out[key] = value
        else:
            raise ParameterError(f"{path}:{lineno}: unknown key {key!r}")
    return out


def _build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        for key, value in parse_config_file(Path(args.config)).items():
            setattr(cfg, key, Path(value) if key == "out" else value)
    for key in ("gamma", "nu2", "nu3", "grid_l", "grid_n", "delta", "tol",
                "k_order", "branch", "suite"):
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "law", None) is not None:
        cfg.law_kind = args.law
    if getattr(args, "epsilon", None):
        cfg.epsilon = list(args.epsilon)
    if getattr(args, "out", None) is not None:
        cfg.out = Path(args.out)
    cfg.validate()
    return cfg


# -- output helpers --------------------------------------------------------------


def _write_csv(path: Path, header: list, columns: list) -> None:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_metadata(outdir: Path, command: str, cfg: RunConfig) -> None:
    meta = {
        "command": command,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "config": {
            "gamma": cfg.gamma,
            "law": cfg.law_kind,
            "nu2": cfg.nu2,
            "nu3": cfg.nu3,
            "epsilon": cfg.epsilon,
            "branch": cfg.branch,
            "suite": cfg.suite,
        },
    }
    _write_json(outdir / "run_metadata.json", meta)


def _field_csv(path: Path, field_obj: SpectralField, axis_name: str) -> None:
    vals = field_obj.values
    if np.iscomplexobj(vals):
        _write_csv(path, [axis_name, "re", "im"],
                   [field_obj.grid.z, vals.real, vals.imag])
    else:
        _write_csv(path, [axis_name, "value"], [field_obj.grid.z, vals])


def _spectrum_csv(path: Path, field_obj: SpectralField) -> None:
    order = np.argsort(field_obj.grid.k)
    c = field_obj.coeffs[order]
    _write_csv(path, ["k", "re", "im"],
               [field_obj.grid.k[order], c.real, c.imag])


def _eps_tag(eps: float) -> str:
    return ("%g" % eps).replace(".", "p")


# -- subcommands -----------------------------------------------------------------


def cmd_dispersion(cfg: RunConfig) -> int:
    profile = make_profile(cfg.gamma)
    k_hi = max(10.0, 3.0 * profile.omega + 5.0)
    k = np.linspace(0.0, k_hi, 2001)
    _write_csv(cfg.out / "dispersion.csv", ["k", "f", "c2", "g"],
               [k, profile.f(k), profile.c2(k), profile.g(k)])
    _write_json(cfg.out / "dispersion_summary.json", {
        "gamma": cfg.gamma,
        "regime": profile.regime.value,
        "omega": profile.omega,
        "c0_squared": profile.c0_squared,
        "solvable": profile.solvable,
    })
    return EXIT_OK


def cmd_wnl(cfg: RunConfig) -> int:
    law = cfg.law()
    coeffs = wnl_coeffs(cfg.gamma, law)
    record = extract_wnl_coefficients(cfg.gamma, law)
    payload = {
        "gamma": coeffs.gamma,
        "regime": coeffs.regime.value,
        "omega": coeffs.omega,
        "c0_squared": coeffs.c0_squared,
        "A0": coeffs.A0,
        "B0": coeffs.B0,
        "d0": coeffs.d0,
        "kdv_dispersion": coeffs.kdv_dispersion,
        "a1": coeffs.a1,
        "a2": coeffs.a2,
        "a3": coeffs.a3,
        "capA": coeffs.capA,
        "capB": coeffs.capB,
        "capC": coeffs.capC,
        "capD": coeffs.capD,
        "capE": coeffs.capE,
        "zeta0_coeff": coeffs.zeta0_coeff,
        "zeta2_coeff": coeffs.zeta2_coeff,
        "extraction": {
            "quad_strong_extracted": record.quad_strong_extracted,
            "quad_strong_formula": record.quad_strong_formula,
            "mode0_extracted": record.mode0_extracted,
            "mode0_formula": record.mode0_formula,
            "mode2_extracted": record.mode2_extracted,
            "mode2_formula": record.mode2_formula,
            "a3_extracted": record.a3_extracted,
            "a3_formula": record.a3_formula,
            "a3_formula_alt": record.a3_formula_alt,
            "d_resolution": record.d_resolution,
            "max_rel_err": record.max_rel_err,
        },
    }
    _write_json(cfg.out / "wnl.json", payload)
    return EXIT_OK


def _report_payload(rep: solver.SolveReport, gamma: float) -> dict:
    diag = {
        k: (float(v) if np.isscalar(v) and not isinstance(v, str) else v)
        for k, v in rep.diagnostics.items()
        if k != "residual_history"
    }
    return {
        "branch": rep.branch,
        "gamma": gamma,
        "epsilon": rep.epsilon,
        "converged": rep.converged,
        "iterations": rep.iterations,
        "final_residual": rep.final_residual,
        "final_residual_l2": rep.final_residual_l2,
        "residual_history": [float(r) for r in rep.residual_history],
        "grid": {"L": rep.solution.grid.L, "N": rep.solution.grid.N},
        "diagnostics": diag,
    }


def _solve_one(cfg: RunConfig, branch: str, eps: float):
    law = cfg.law()
    grid = None
    if cfg.grid_l is not None or cfg.grid_n is not None:
        grid = SpectralGrid.make(cfg.grid_l or solver.DEFAULT_SCALED_L,
                                 cfg.grid_n or solver.DEFAULT_SCALED_N)
    if branch == "kdv":
        kwargs = {} if cfg.delta is None else {"delta": cfg.delta}
        rep = solver.solve_full_dispersion_kdv(cfg.gamma, law, eps, grid=grid,
                                               tol=cfg.tol, **kwargs)
    elif branch in ("nls+", "nls-"):
        sign = +1 if branch.endswith("+") else -1
        rep = solver.solve_full_dispersion_nls(cfg.gamma, law, eps, sign,
                                               grid=grid, delta=cfg.delta,
                                               tol=cfg.tol)
    elif branch == "gzcs":
        rep = solver.solve_travelling_wave(
            cfg.gamma, law, eps, dn_order=cfg.k_order, grid=grid, tol=cfg.tol,
        )
    else:
        raise ParameterError(f"unknown branch {branch!r}")
    return rep


def _solve_task(payload):
    cfg_dict, branch, eps = payload
    cfg = RunConfig(**cfg_dict)
    cfg.out = Path(cfg.out)
    rep = _solve_one(cfg, branch, eps)
    return eps, rep


def _cfg_dict(cfg: RunConfig) -> dict:
    d = dict(cfg.__dict__)
    d["out"] = str(d["out"])
    return d


def _reconstruct_for_report(cfg, rep, eps):
    profile = make_profile(cfg.gamma)
    target = solver._auto_wave_grid(profile, eps, 40.0)
    return solver.reconstruct_eta(rep.solution, eps, profile.regime,
                                  profile.omega, target)


def cmd_solve(cfg: RunConfig) -> int:
    branch = cfg.branch
    eps_list = sorted(cfg.epsilon)
    results = {}
    if len(eps_list) > 1:
        with ProcessPoolExecutor(max_workers=min(4, len(eps_list))) as pool:
            futures = {
                eps: pool.submit(_solve_task, (_cfg_dict(cfg), branch, eps))
                for eps in eps_list
            }
            for eps, fut in futures.items():
                results[eps] = fut.result()[1]
    else:
        results[eps_list[0]] = _solve_one(cfg, branch, eps_list[0])

    reports = []
    failed = False
    for eps in eps_list:
        rep = results[eps]
        tag = _eps_tag(eps)
        axis = "Z" if branch != "gzcs" else "z"
        _field_csv(cfg.out / f"profile_{branch.replace('+', 'plus').replace('-', 'minus')}_eps{tag}.csv",
                   rep.solution, axis)
        _spectrum_csv(cfg.out / f"spectrum_{branch.replace('+', 'plus').replace('-', 'minus')}_eps{tag}.csv",
                      rep.solution)
        if branch != "gzcs":
            eta = _reconstruct_for_report(cfg, rep, eps)
            _field_csv(cfg.out / f"eta_{branch.replace('+', 'plus').replace('-', 'minus')}_eps{tag}.csv",
                       eta, "z")
        reports.append(_report_payload(rep, cfg.gamma))
        failed = failed or not rep.converged
    _write_json(cfg.out / f"solve_{branch.replace('+', 'plus').replace('-', 'minus')}.json",
                {"reports": reports})
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_converge(cfg: RunConfig) -> int:
    if len(cfg.epsilon) < 3:
        raise ParameterError("converge needs at least 3 epsilon values")
    branch = cfg.branch
    law = cfg.law()
    error_key = {
        "kdv": "deviation_from_kdv",
        "nls+": "deviation_from_nls",
        "nls-": "deviation_from_nls",
        "gzcs": "normalized_deviation",
    }[branch]

    def runner(eps):
        return _solve_one(cfg, branch, eps)

    study = solver.convergence_study(runner, sorted(cfg.epsilon, reverse=True),
                                     error_key)
    _write_csv(cfg.out / "converge.csv",
               ["epsilon", "error", "residual", "converged"],
               [study.epsilons, study.errors, study.residuals,
                [float(c) for c in study.converged]])
    _write_json(cfg.out / "converge.json", {
        "branch": branch,
        "gamma": cfg.gamma,
        "error_key": error_key,
        "slope": study.slope,
        "fit_residual": study.fit_residual,
        "complete": study.complete,
    })
    if not study.complete:
        print("warning: partial ladder (some solves failed)", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_checks(cfg: RunConfig) -> int:
    import csv
    import io

    rows = checks_mod.run_suite(cfg.suite)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "value", "target", "error", "tol", "passed"])
    for r in rows:
        writer.writerow([r.name, _fmt(r.value), _fmt(r.target), _fmt(r.error),
                         _fmt(r.tol), _fmt(float(r.passed))])
    (cfg.out / f"checks_{cfg.suite}.csv").write_text(buf.getvalue())
    n_fail = 0
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.suite}: {r.name} (error={r.error:.3e}, tol={r.tol:g})")
        n_fail += 0 if r.passed else 1
    print(f"{len(rows) - n_fail}/{len(rows)} checks passed")
    return EXIT_NUMERICAL if n_fail else EXIT_OK


# -- entry point -------------------------------------------------------------------


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ferrojet",
        description="Solitary waves on a ferrofluid jet: dispersion, "
                    "weakly nonlinear constants, Newton solves, oracle checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--gamma", type=float)
        p.add_argument("--law", choices=["linear", "custom"])
        p.add_argument("--nu2", type=float)
        p.add_argument("--nu3", type=float)
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default: current)")

    p = sub.add_parser("dispersion", help="dispersion relation tables")
    common(p)

    p = sub.add_parser("wnl", help="weakly nonlinear constants + extraction")
    common(p)

    for name in ("solve", "converge"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--branch", choices=["kdv", "nls+", "nls-", "gzcs"],
                       default=None)
        p.add_argument("--epsilon", type=float, nargs="+")
        p.add_argument("--grid-n", dest="grid_n", type=int)
        p.add_argument("--grid-l", dest="grid_l", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--k-order", dest="k_order", type=int)
        p.add_argument("--tol", type=float)

    p = sub.add_parser("checks", help="oracle check suites")
    common(p)
    p.add_argument("--suite", choices=sorted(checks_mod.SUITES), default=None)
    return parser


_COMMANDS = {
    "dispersion": cmd_dispersion,
    "wnl": cmd_wnl,
    "solve": cmd_solve,
    "converge": cmd_converge,
    "checks": cmd_checks,
}


def main(argv=None) -> int:
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        _write_metadata(cfg.out, args.command, cfg)
        return _COMMANDS[args.command](cfg)
    except _VALIDATION_ERRORS as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_VALIDATION
    except _NUMERICAL_ERRORS as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
