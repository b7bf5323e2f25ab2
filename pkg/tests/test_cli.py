"""Command-line front end: outputs, exit codes, determinism."""

import json

import pytest

from ferrojet.cli import main, parse_config_file
from ferrojet.errors import ParameterError


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def test_dispersion_outputs(tmp_path):
    rc = main(["dispersion", "--gamma", "5", "--out", str(tmp_path)])
    assert rc == 0
    summary = read_json(tmp_path / "dispersion_summary.json")
    assert summary["schema_version"] == "1"
    assert summary["regime"] == "strong"
    assert summary["c0_squared"] == 2.0
    header = (tmp_path / "dispersion.csv").read_text().splitlines()[0]
    assert header == "k,f,c2,g"


def test_dispersion_weak_summary(tmp_path):
    rc = main(["dispersion", "--gamma", "15", "--out", str(tmp_path)])
    assert rc == 0
    summary = read_json(tmp_path / "dispersion_summary.json")
    assert summary["regime"] == "weak"
    assert summary["omega"] == pytest.approx(2.675240200697746, abs=1e-9)


def test_validation_exit_code(tmp_path, capsys):
    rc = main(["dispersion", "--gamma", "0.5", "--out", str(tmp_path)])
    assert rc == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "ParameterError"


def test_wnl_output(tmp_path):
    rc = main(["wnl", "--gamma", "5", "--out", str(tmp_path)])
    assert rc == 0
    payload = read_json(tmp_path / "wnl.json")
    assert payload["d0"] == 0.875
    assert payload["extraction"]["max_rel_err"] <= 1e-8


def test_wnl_extraction_weak(tmp_path):
    rc = main(["wnl", "--gamma", "15", "--out", str(tmp_path)])
    assert rc == 0
    payload = read_json(tmp_path / "wnl.json")
    assert payload["extraction"]["max_rel_err"] <= 1e-6
    assert payload["extraction"]["d_resolution"] == "f(omega)^2"


def test_wnl_rejects_critical(tmp_path):
    assert main(["wnl", "--gamma", "9", "--out", str(tmp_path)]) == 2


def test_solve_kdv(tmp_path):
    rc = main(["solve", "--branch", "kdv", "--gamma", "5",
               "--epsilon", "0.1", "--out", str(tmp_path)])
    assert rc == 0
    report = read_json(tmp_path / "solve_kdv.json")["reports"][0]
    assert report["converged"] and report["final_residual"] <= 1e-9
    assert (tmp_path / "profile_kdv_eps0p1.csv").exists()
    assert (tmp_path / "eta_kdv_eps0p1.csv").exists()
    assert (tmp_path / "spectrum_kdv_eps0p1.csv").exists()


def test_solve_epsilon_ladder_fans_out(tmp_path):
    rc = main(["solve", "--branch", "kdv", "--gamma", "5",
               "--epsilon", "0.2", "0.1", "--out", str(tmp_path)])
    assert rc == 0
    reports = read_json(tmp_path / "solve_kdv.json")["reports"]
    assert [r["epsilon"] for r in reports] == [0.1, 0.2]  # sorted merge
    assert all(r["converged"] for r in reports)
    assert (tmp_path / "profile_kdv_eps0p2.csv").exists()


def test_solve_rejects_zero_epsilon(tmp_path):
    rc = main(["solve", "--branch", "gzcs", "--gamma", "5",
               "--epsilon", "0", "--out", str(tmp_path)])
    assert rc == 2


def test_checks_suite_passes(tmp_path, capsys):
    rc = main(["checks", "--suite", "specfun", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "[FAIL]" not in out
    lines = (tmp_path / "checks_specfun.csv").read_text().splitlines()
    assert lines[0] == "name,value,target,error,tol,passed"
    assert all(line.endswith(",1") for line in lines[1:])


def test_checks_greens_rows_identify_parameters(tmp_path):
    import csv

    rc = main(["checks", "--suite", "greens", "--out", str(tmp_path)])
    assert rc == 0
    with open(tmp_path / "checks_greens.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert any("k=20.0, r=0.9" in r["name"] for r in rows)
    assert all(float(r["passed"]) == 1.0 for r in rows)


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# sample configuration\n"
        "gamma = 7.0\n"
        "law = linear\n"
        "epsilon = 0.2 0.1\n"
    )
    outdir = tmp_path / "out"
    rc = main(["dispersion", "--config", str(cfg), "--out", str(outdir)])
    assert rc == 0
    assert read_json(outdir / "dispersion_summary.json")["gamma"] == 7.0
    # command line wins over the file
    rc = main(["dispersion", "--config", str(cfg), "--gamma", "5",
               "--out", str(outdir)])
    assert read_json(outdir / "dispersion_summary.json")["gamma"] == 5.0


def test_config_file_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("gamma = 5\nwhatever = 3\n")
    with pytest.raises(ParameterError):
        parse_config_file(cfg)


def test_deterministic_outputs(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    for d in (d1, d2):
        assert main(["dispersion", "--gamma", "7", "--out", str(d)]) == 0
    assert (d1 / "dispersion.csv").read_bytes() == (d2 / "dispersion.csv").read_bytes()
    assert (d1 / "dispersion_summary.json").read_bytes() == (
        d2 / "dispersion_summary.json"
    ).read_bytes()


def test_float_round_trip_precision(tmp_path):
    assert main(["dispersion", "--gamma", "5", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "dispersion.csv").read_text().splitlines()
    k, f, c2, g = (float(tok) for tok in lines[2].split(","))
    from ferrojet.dispersion import make_profile

    p = make_profile(5.0)
    assert f == p.f(k)  # 17 significant digits round-trip exactly
    assert c2 == p.c2(k)
