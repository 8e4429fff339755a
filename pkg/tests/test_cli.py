import math
from pathlib import Path

import numpy as np
import pytest

from bcsgap.cli import (
    EXIT_BAD_CONFIG,
    EXIT_CERTIFICATE,
    EXIT_NO_CONVERGENCE,
    EXIT_OK,
    ConfigError,
    build_inputs,
    main,
    parse_config,
)

BASE_CONFIG = """\
# constant-coupling run, shrunk for test speed
params.hbar_omega_d = 1.0
params.epsilon = 0.005
params.n0 = 1.0
potential.variant = constant
potential.u0 = 0.3
grid.panels = 16
grid.order = 10
solver.t_resolution = 10
solver.span_decades = 2.05
solver.tol = 1e-9
"""


def _write_config(tmp_path: Path, extra: str = "", name: str = "run.cfg") -> Path:
    path = tmp_path / name
    path.write_text(BASE_CONFIG + extra)
    return path


def test_parse_config_values(tmp_path):
    cfg = parse_config(_write_config(tmp_path, "seed = 7\n"))
    assert cfg.get("params.epsilon") == 0.005
    assert cfg.get("solver.t_resolution") == 10
    assert cfg.get("seed") == 7
    assert cfg.get("seed_missing") is None


def test_parse_config_rejects_unknown_key(tmp_path):
    path = _write_config(tmp_path, "params.bogus = 1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(path)


def test_parse_config_rejects_duplicates_and_syntax(tmp_path):
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(_write_config(tmp_path, "params.epsilon = 0.004\n"))
    bad = tmp_path / "bad.cfg"
    bad.write_text("params.epsilon\n")
    with pytest.raises(ConfigError, match="expected key = value"):
        parse_config(bad)
    worse = tmp_path / "worse.cfg"
    worse.write_text("params.epsilon = not_a_number\n")
    with pytest.raises(ConfigError, match="bad value"):
        parse_config(worse)


def test_build_inputs_applies_margin(tmp_path):
    params, potential, grid, margin = build_inputs(
        parse_config(_write_config(tmp_path))
    )
    assert margin == 0.03
    assert params.u_lower == pytest.approx(0.291, rel=1e-15)
    assert params.u_upper == pytest.approx(0.309, rel=1e-15)
    assert grid.size == 160


def test_build_inputs_explicit_bounds(tmp_path):
    cfg = parse_config(
        _write_config(tmp_path, "params.u1 = 0.25\nparams.u2 = 0.35\n")
    )
    params, _, _, margin = build_inputs(cfg)
    assert margin is None
    assert params.u_lower == 0.25


def test_cmd_simple_outputs(tmp_path):
    cfg_path = _write_config(tmp_path, f"output.dir = {tmp_path / 'out'}\n")
    assert main(["simple", str(cfg_path)]) == EXIT_OK
    out = tmp_path / "out"
    lines = (out / "simple_summary.txt").read_text().splitlines()
    entries = dict(line.split(" = ") for line in lines)
    tau1, tau2 = float(entries["tau_U1"]), float(entries["tau_U2"])
    assert tau1 < tau2
    d0 = float(entries["delta0_U1"])
    u1 = 0.291
    expected = math.sqrt(
        (1 - 0.005 * math.exp(1 / u1)) * (1 - 0.005 * math.exp(-1 / u1))
    ) / math.sinh(1 / u1)
    assert d0 == pytest.approx(expected, rel=1e-9)
    for name in ("envelope_U1.csv", "envelope_U2.csv"):
        rows = (out / name).read_text().splitlines()
        assert rows[0] == "T,delta"
        deltas = [float(r.split(",")[1]) for r in rows[1:]]
        assert all(b <= a for a, b in zip(deltas, deltas[1:]))


def test_cmd_certify_reports_failure(tmp_path):
    cfg_path = _write_config(tmp_path, f"output.dir = {tmp_path / 'out'}\n")
    assert main(["certify", str(cfg_path)]) == EXIT_CERTIFICATE
    report = (tmp_path / "out" / "certificate.txt").read_text()
    assert "status = failed" in report
    assert "best_alpha = " in report


def test_cmd_solve_and_thermo_outputs(tmp_path):
    out = tmp_path / "out"
    cfg_path = _write_config(tmp_path, f"output.dir = {out}\n")
    assert main(["thermo", str(cfg_path)]) == EXIT_OK
    assert main(["solve", str(cfg_path)]) == EXIT_OK

    surface_rows = (out / "surface.csv").read_text().splitlines()
    assert surface_rows[0] == "T,x,u"
    tc = float((out / "tc.txt").read_text().split(" = ")[1])
    terminal = [r for r in surface_rows[1:] if float(r.split(",")[0]) == tc]
    assert len(terminal) == 160
    assert all(float(r.split(",")[2]) == 0.0 for r in terminal)

    trace_rows = (out / "trace.csv").read_text().splitlines()
    assert trace_rows[0] == "T,iterations,final_ratio"

    summary = dict(
        line.split(" = ")
        for line in (out / "thermo_summary.txt").read_text().splitlines()
    )
    assert set(summary) == {
        "t_c", "alpha", "delta_cv", "psi_second_tc",
        "verdict_a", "verdict_b", "verdict_c",
    }
    assert float(summary["delta_cv"]) > 0.0
    assert float(summary["psi_second_tc"]) < 0.0
    assert summary["verdict_a"] == summary["verdict_b"] == summary["verdict_c"] == "true"

    psi_rows = (out / "psi.csv").read_text().splitlines()
    last = psi_rows[-1].split(",")
    assert float(last[0]) == tc
    assert float(last[1]) == 0.0

    for name in ("entropy.csv", "heat.csv", "v.csv", "w.csv"):
        assert (out / name).exists()
    v_rows = (out / "v.csv").read_text().splitlines()
    assert v_rows[0] == "x,v,error"
    assert all(float(r.split(",")[1]) > 0 for r in v_rows[1:])


def test_cmd_gcheck(tmp_path):
    assert main(["gcheck", "--out", str(tmp_path)]) == EXIT_OK
    g_rows = (tmp_path / "g.csv").read_text().splitlines()
    assert g_rows[0] == "eta,g"
    values = np.array([float(r.split(",")[1]) for r in g_rows[1:]])
    assert np.all(values < 0.0)
    summary = dict(
        line.split(" = ") for line in (tmp_path / "g_summary.txt").read_text().splitlines()
    )
    assert float(summary["g_zero"]) == -2.0 / 3.0
    assert float(summary["integral_estimate"]) == pytest.approx(-0.852557, abs=2e-6)
    assert float(summary["tail_bound"]) <= 1e-6


def test_exit_code_invalid_config(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("params.bogus = 1\n")
    assert main(["simple", str(bad)]) == EXIT_BAD_CONFIG
    missing = tmp_path / "nope.cfg"
    assert main(["simple", str(missing)]) == EXIT_BAD_CONFIG
    # physically invalid parameters also map to config failure
    physics = tmp_path / "physics.cfg"
    physics.write_text(BASE_CONFIG.replace("0.005", "0.5"))
    assert main(["simple", str(physics)]) == EXIT_BAD_CONFIG


def test_exit_code_non_convergence(tmp_path):
    cfg_path = _write_config(
        tmp_path, f"solver.max_iter = 5\noutput.dir = {tmp_path / 'out'}\n"
    )
    assert main(["solve", str(cfg_path)]) == EXIT_NO_CONVERGENCE


def test_rerun_is_byte_identical(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    cfg_a = _write_config(tmp_path, f"output.dir = {out_a}\n", name="a.cfg")
    cfg_b = _write_config(tmp_path, f"output.dir = {out_b}\n", name="b.cfg")
    assert main(["simple", str(cfg_a)]) == EXIT_OK
    assert main(["simple", str(cfg_b)]) == EXIT_OK
    for name in ("envelope_U1.csv", "envelope_U2.csv", "simple_summary.txt"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
