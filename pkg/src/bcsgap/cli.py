"""Command-line orchestration: config ingestion, pipeline execution, CSV and
report emission.

Config format: flat ``key = value`` text with dotted section prefixes and
``#`` comments, e.g.::

    params.epsilon = 0.005
    potential.variant = constant
    potential.u0 = 0.3

Exit codes: 0 ok, 2 certificate failure, 3 non-convergence, 4 invalid
config.  Re-running a command with the same config produces byte-identical
output; nothing here draws randomness.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .certificate import ContractionCertificate, format_certificate_report, search_certificate
from .fileio import atomic_write_text, fmt, write_csv
from .model import (
    ConstantPotential,
    EnergyGrid,
    GaussianBumpPotential,
    ParamsError,
    PhysicalParams,
    PotentialError,
    PotentialSpec,
    build_grid,
    coupling_margin_bounds,
    load_potential_table_csv,
    make_params,
    validate_potential,
)
from .quadrature import gap_curvature
from .simple_gap import envelope_curve
from .solver import ConvergenceError, solve_surface
from .thermo import build_thermo_report, g_integral_to_infinity

__all__ = ["ConfigError", "RunConfig", "parse_config", "build_inputs", "main"]

EXIT_OK = 0
EXIT_CERTIFICATE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_BAD_CONFIG = 4

_DEFAULT_MARGIN = 0.03

_KNOWN_KEYS = {
    "params.hbar_omega_d": float,
    "params.epsilon": float,
    "params.n0": float,
    "params.u1": float,
    "params.u2": float,
    "potential.variant": str,
    "potential.u0": float,
    "potential.csv": str,
    "potential.base": float,
    "potential.amplitude": float,
    "potential.width": float,
    "grid.panels": int,
    "grid.order": int,
    "solver.tol": float,
    "solver.max_iter": int,
    "solver.t_resolution": int,
    "solver.span_decades": float,
    "output.dir": str,
    "seed": int,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    raw: dict[str, object] = field(default_factory=dict)

    def get(self, key: str, default=None):
        return self.raw.get(key, default)

    def require(self, key: str):
        if key not in self.raw:
            raise ConfigError(f"missing required key {key}")
        return self.raw[key]


def parse_config(path: str | Path) -> RunConfig:
    """Parse a flat key = value config file; unknown keys are rejected."""
    raw: dict[str, object] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        caster = _KNOWN_KEYS[key]
        try:
            raw[key] = caster(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return RunConfig(raw=raw)


def build_inputs(
    cfg: RunConfig,
) -> tuple[PhysicalParams, PotentialSpec, EnergyGrid, float | None]:
    """Materialise params, potential and grid from a parsed config.

    For constant potentials without explicit coupling bounds, a strict
    margin band is imposed; the margin used is returned for the record.
    """
    variant = str(cfg.get("potential.variant", "constant"))
    margin_used: float | None = None

    if variant == "constant":
        u0 = float(cfg.require("potential.u0"))
        potential: PotentialSpec = ConstantPotential(u0=u0)
    elif variant == "gaussian_bump":
        potential = GaussianBumpPotential(
            base=float(cfg.require("potential.base")),
            amplitude=float(cfg.require("potential.amplitude")),
            width=float(cfg.require("potential.width")),
        )
    elif variant == "table":
        potential = load_potential_table_csv(str(cfg.require("potential.csv")))
    else:
        raise ConfigError(f"unknown potential.variant {variant!r}")

    if "params.u1" in cfg.raw and "params.u2" in cfg.raw:
        u1, u2 = float(cfg.raw["params.u1"]), float(cfg.raw["params.u2"])
    elif variant == "constant":
        u1, u2 = coupling_margin_bounds(float(cfg.require("potential.u0")), _DEFAULT_MARGIN)
        margin_used = _DEFAULT_MARGIN
    else:
        raise ConfigError("params.u1 and params.u2 are required for non-constant potentials")

    params = make_params(
        hbar_omega_d=float(cfg.get("params.hbar_omega_d", 1.0)),
        epsilon_cutoff=float(cfg.require("params.epsilon")),
        n0_dos=float(cfg.get("params.n0", 1.0)),
        u_lower=u1,
        u_upper=u2,
    )
    validate_potential(potential, params)
    grid = build_grid(
        params,
        panels=int(cfg.get("grid.panels", 16)),
        order=int(cfg.get("grid.order", 10)),
    )
    return params, potential, grid, margin_used


def _outdir(cfg: RunConfig) -> Path:
    out = Path(str(cfg.get("output.dir", ".")))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simple(cfg: RunConfig) -> int:
    params, _, _, _ = build_inputs(cfg)
    out = _outdir(cfg)
    summary: list[str] = []
    for name, u in (("U1", params.u_lower), ("U2", params.u_upper)):
        curve = envelope_curve(u, params)
        write_csv(
            out / f"envelope_{name}.csv",
            ["T", "delta"],
            zip(curve.t_nodes, curve.delta_values),
        )
        summary.append(f"tau_{name} = {fmt(curve.tau)}")
        summary.append(f"delta0_{name} = {fmt(curve.delta0)}")
    atomic_write_text(out / "simple_summary.txt", "\n".join(summary) + "\n")
    return EXIT_OK


def cmd_certify(cfg: RunConfig) -> int:
    params, potential, grid, margin = build_inputs(cfg)
    out = _outdir(cfg)
    outcome = search_certificate(potential, params, grid, coupling_margin=margin)
    atomic_write_text(out / "certificate.txt", format_certificate_report(outcome))
    return EXIT_OK if isinstance(outcome, ContractionCertificate) else EXIT_CERTIFICATE


def _solve(cfg: RunConfig):
    params, potential, grid, _ = build_inputs(cfg)
    surface = solve_surface(
        potential,
        params,
        grid,
        t_resolution=int(cfg.get("solver.t_resolution", 24)),
        tol=float(cfg.get("solver.tol", 1e-11)),
        span_decades=float(cfg.get("solver.span_decades", 2.2)),
        max_iter=int(cfg.get("solver.max_iter", 2_000_000)),
    )
    return params, potential, grid, surface


def _write_surface(out: Path, surface) -> None:
    rows = (
        (T, x, surface.values[i, j])
        for i, T in enumerate(surface.t_nodes)
        for j, x in enumerate(surface.x_nodes)
    )
    write_csv(out / "surface.csv", ["T", "x", "u"], rows)
    atomic_write_text(out / "tc.txt", f"t_c = {fmt(surface.t_c)}\n")
    trace_rows = (
        (T, tr.iterations, tr.asymptotic_ratio())
        for T, tr in zip(surface.t_nodes[:-1], surface.traces)
    )
    write_csv(out / "trace.csv", ["T", "iterations", "final_ratio"], trace_rows)


def cmd_solve(cfg: RunConfig) -> int:
    try:
        _, _, _, surface = _solve(cfg)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    _write_surface(_outdir(cfg), surface)
    return EXIT_OK


def cmd_thermo(cfg: RunConfig) -> int:
    try:
        params, potential, grid, surface = _solve(cfg)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    report = build_thermo_report(surface, potential, params, grid)
    out = _outdir(cfg)
    write_csv(out / "psi.csv", ["T", "psi"], zip(report.t_nodes, report.psi_values))
    write_csv(
        out / "entropy.csv", ["T", "s"], zip(report.t_nodes, report.entropy_values)
    )
    write_csv(
        out / "heat.csv", ["T", "cv"], zip(report.t_nodes, report.specific_heat_values)
    )
    write_csv(
        out / "v.csv",
        ["x", "v", "error"],
        zip(surface.x_nodes, report.v_table.values, report.v_table.extrapolation_error),
    )
    write_csv(
        out / "w.csv",
        ["x", "w", "error"],
        zip(surface.x_nodes, report.w_table.values, report.w_table.extrapolation_error),
    )
    lines = [
        f"t_c = {fmt(report.t_c)}",
        f"alpha = {fmt(report.alpha)}",
        f"delta_cv = {fmt(report.delta_cv)}",
        f"psi_second_tc = {fmt(report.psi_second_tc_form_a)}",
        f"verdict_a = {str(report.verdict.a).lower()}",
        f"verdict_b = {str(report.verdict.b).lower()}",
        f"verdict_c = {str(report.verdict.c).lower()}",
    ]
    atomic_write_text(out / "thermo_summary.txt", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_gcheck(out_dir: str | Path = ".") -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    etas = np.concatenate(([0.0], np.geomspace(1e-3, 1e3, 121)))
    write_csv(out / "g.csv", ["eta", "g"], zip(etas, gap_curvature(etas)))
    estimate, tail = g_integral_to_infinity()
    lines = [
        f"g_zero = {fmt(gap_curvature(0.0))}",
        f"integral_estimate = {fmt(estimate)}",
        f"tail_bound = {fmt(tail)}",
    ]
    atomic_write_text(out / "g_summary.txt", "\n".join(lines) + "\n")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="bcsgap",
        description="Gap-equation solver and phase-transition thermodynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simple", "certify", "solve", "thermo"):
        p = sub.add_parser(name)
        p.add_argument("config", help="path to a key = value config file")
    g = sub.add_parser("gcheck")
    g.add_argument("--out", default=".", help="output directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "gcheck":
            return cmd_gcheck(args.out)
        cfg = parse_config(args.config)
        handler = {
            "simple": cmd_simple,
            "certify": cmd_certify,
            "solve": cmd_solve,
            "thermo": cmd_thermo,
        }[args.command]
        return handler(cfg)
    except (ConfigError, ParamsError, PotentialError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
