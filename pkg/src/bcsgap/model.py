"""Physical parameters, interaction potentials and the shared energy grid.

All values are immutable after construction and every operation is a pure
function of its inputs, so everything here is safe to share across
parallel temperature sweeps.  Units: k_B = 1, so temperatures and energies
share one unit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import gauss_legendre_panels

__all__ = [
    "ParamsError",
    "PotentialError",
    "PhysicalParams",
    "make_params",
    "coupling_margin_bounds",
    "ConstantPotential",
    "TablePotential",
    "GaussianBumpPotential",
    "PotentialSpec",
    "eval_potential",
    "potential_matrix",
    "validate_potential",
    "load_potential_table_csv",
    "EnergyGrid",
    "build_grid",
]


class ParamsError(ValueError):
    """Raised when physical parameters violate a standing assumption."""


class PotentialError(ValueError):
    """Raised when a potential leaves its admissible coupling band."""


@dataclass(frozen=True)
class PhysicalParams:
    """Debye energy, infrared cutoff, density of states, coupling bounds."""

    hbar_omega_d: float
    epsilon_cutoff: float
    n0_dos: float
    u_lower: float
    u_upper: float

    def closed_form_factor(self, u: float) -> float:
        """hbar_omega_d - epsilon * e^{1/u}; must be positive for the
        zero-temperature gap closed form to be real."""
        return self.hbar_omega_d - self.epsilon_cutoff * math.exp(1.0 / u)


def make_params(
    hbar_omega_d: float,
    epsilon_cutoff: float,
    n0_dos: float,
    u_lower: float,
    u_upper: float,
) -> PhysicalParams:
    """Validate raw values and build PhysicalParams.

    Every violated invariant is reported by name in a single error.
    """
    raw = (hbar_omega_d, epsilon_cutoff, n0_dos, u_lower, u_upper)
    if not all(math.isfinite(x) for x in raw):
        raise ParamsError("all parameters must be finite")

    p = PhysicalParams(hbar_omega_d, epsilon_cutoff, n0_dos, u_lower, u_upper)
    problems: list[str] = []
    if not (0.0 < epsilon_cutoff < hbar_omega_d):
        problems.append(
            f"cutoff_ordering: need 0 < epsilon ({epsilon_cutoff!r}) "
            f"< hbar_omega_d ({hbar_omega_d!r})"
        )
    if not n0_dos > 0.0:
        problems.append(f"density_of_states: N0 ({n0_dos!r}) must be > 0")
    if not (0.0 < u_lower < u_upper):
        problems.append(
            f"coupling_ordering: need 0 < U1 ({u_lower!r}) < U2 ({u_upper!r})"
        )
    else:
        if 0.0 < epsilon_cutoff < hbar_omega_d:
            for name, u in (("U1", u_lower), ("U2", u_upper)):
                factor = p.closed_form_factor(u)
                if not factor > 0.0:
                    problems.append(
                        f"closed_form_validity[{name}]: factor "
                        f"hbar_omega_d - epsilon*e^(1/{name}) = {factor!r} <= 0"
                    )
            span = u_lower * math.log(hbar_omega_d / epsilon_cutoff)
            if not span > 1.0:
                problems.append(
                    f"tau_existence: U1*ln(hbar_omega_d/epsilon) = {span!r} <= 1, "
                    "the linearised gap equation has no root"
                )
    if problems:
        raise ParamsError("; ".join(problems))
    return p


def coupling_margin_bounds(u0: float, margin: float = 0.03) -> tuple[float, float]:
    """Strict coupling band around a constant coupling value.

    Used when a run specifies only the constant potential: the envelope
    bounds must hold strictly, so a small margin is imposed and recorded.
    """
    if not (u0 > 0 and 0 < margin < 1):
        raise ParamsError("need u0 > 0 and 0 < margin < 1")
    return u0 * (1.0 - margin), u0 * (1.0 + margin)


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class ConstantPotential:
    u0: float


@dataclass(frozen=True)
class TablePotential:
    """Tabulated kernel with bilinear interpolation between lattice nodes."""

    x_nodes: np.ndarray
    xi_nodes: np.ndarray
    values: np.ndarray  # shape (len(x_nodes), len(xi_nodes))

    def __post_init__(self):
        object.__setattr__(self, "x_nodes", np.asarray(self.x_nodes, dtype=float))
        object.__setattr__(self, "xi_nodes", np.asarray(self.xi_nodes, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


@dataclass(frozen=True)
class GaussianBumpPotential:
    """base + amplitude * exp(-(x - xi)^2 / (2 width^2))."""

    base: float
    amplitude: float
    width: float


PotentialSpec = ConstantPotential | TablePotential | GaussianBumpPotential


def _bilinear(table: TablePotential, x, xi):
    xn, yn, v = table.x_nodes, table.xi_nodes, table.values
    i = np.clip(np.searchsorted(xn, x) - 1, 0, xn.size - 2)
    j = np.clip(np.searchsorted(yn, xi) - 1, 0, yn.size - 2)
    tx = (x - xn[i]) / (xn[i + 1] - xn[i])
    ty = (xi - yn[j]) / (yn[j + 1] - yn[j])
    return (
        v[i, j] * (1 - tx) * (1 - ty)
        + v[i + 1, j] * tx * (1 - ty)
        + v[i, j + 1] * (1 - tx) * ty
        + v[i + 1, j + 1] * tx * ty
    )


def potential_matrix(spec: PotentialSpec, x, xi) -> np.ndarray:
    """Kernel values on the outer product of x and xi samples (no domain check)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if isinstance(spec, ConstantPotential):
        return np.full((x.size, xi.size), spec.u0)
    if isinstance(spec, GaussianBumpPotential):
        dx = x[:, None] - xi[None, :]
        return spec.base + spec.amplitude * np.exp(-dx * dx / (2.0 * spec.width**2))
    if isinstance(spec, TablePotential):
        xm, ym = np.meshgrid(x, xi, indexing="ij")
        return _bilinear(spec, xm, ym)
    raise TypeError(f"unknown potential spec {type(spec).__name__}")


def eval_potential(spec: PotentialSpec, x: float, xi: float, params: PhysicalParams) -> float:
    """Single kernel value U(x, xi) with domain validation."""
    lo, hi = params.epsilon_cutoff, params.hbar_omega_d
    if not (lo <= x <= hi and lo <= xi <= hi):
        raise PotentialError(
            f"arguments ({x!r}, {xi!r}) outside the energy domain [{lo!r}, {hi!r}]"
        )
    return float(potential_matrix(spec, x, xi)[0, 0])


def validate_potential(
    spec: PotentialSpec, params: PhysicalParams, lattice: int = 64
) -> None:
    """Check the kernel lies strictly inside (U1, U2) on a dense lattice.

    The lattice density (64 x 64 by default) is a pragmatic stand-in for the
    continuous strict-bounds requirement.
    """
    lo, hi = params.epsilon_cutoff, params.hbar_omega_d
    if isinstance(spec, TablePotential):
        for name, nodes in (("x_nodes", spec.x_nodes), ("xi_nodes", spec.xi_nodes)):
            if nodes.ndim != 1 or nodes.size < 2 or not np.all(np.diff(nodes) > 0):
                raise PotentialError(f"table {name} must be strictly increasing")
            if not (nodes[0] <= lo and nodes[-1] >= hi):
                raise PotentialError(
                    f"table {name} [{nodes[0]!r}, {nodes[-1]!r}] does not span "
                    f"the energy domain [{lo!r}, {hi!r}]"
                )
        if spec.values.shape != (spec.x_nodes.size, spec.xi_nodes.size):
            raise PotentialError("table value matrix shape does not match nodes")
    pts = np.linspace(lo, hi, lattice)
    vals = potential_matrix(spec, pts, pts)
    vmin, vmax = float(vals.min()), float(vals.max())
    if not (params.u_lower < vmin and vmax < params.u_upper):
        raise PotentialError(
            f"potential range [{vmin!r}, {vmax!r}] leaves the open coupling band "
            f"({params.u_lower!r}, {params.u_upper!r})"
        )


def load_potential_table_csv(path) -> TablePotential:
    """Read a tabulated kernel from CSV with header x,xi,u, row-major in x then xi."""
    xs: list[float] = []
    xis: list[float] = []
    rows: list[tuple[float, float, float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["x", "xi", "u"]:
            raise PotentialError(f"expected header x,xi,u, got {header!r}")
        for rec in reader:
            x, xi, u = (float(c) for c in rec)
            rows.append((x, xi, u))
            if x not in xs:
                xs.append(x)
            if xi not in xis:
                xis.append(xi)
    if len(rows) != len(xs) * len(xis):
        raise PotentialError(
            f"{len(rows)} rows do not form a full {len(xs)}x{len(xis)} lattice"
        )
    values = np.array([u for _, _, u in rows], dtype=float).reshape(len(xs), len(xis))
    return TablePotential(np.array(xs), np.array(xis), values)


# ---------------------------------------------------------------------------
# energy grid


@dataclass(frozen=True)
class EnergyGrid:
    """Composite Gauss-Legendre nodes/weights on [epsilon, hbar_omega_d].

    The nodes double as the collocation points for all gap fields, so
    applying the integral operator is a dense matrix-vector product with no
    interpolation inside the fixed-point loop.
    """

    nodes: np.ndarray
    weights: np.ndarray
    panel_count: int
    order: int = field(default=10)

    @property
    def size(self) -> int:
        return self.nodes.size


def build_grid(params: PhysicalParams, panels: int = 16, order: int = 10) -> EnergyGrid:
    """Build the shared quadrature grid, panels log-spaced toward the cutoff.

    Log spacing concentrates nodes near xi = epsilon where the 1/xi-type
    integrands vary fastest.
    """
    if panels < 1:
        raise ValueError("panels must be >= 1")
    if order < 2:
        raise ValueError("order must be >= 2")
    a, b = params.epsilon_cutoff, params.hbar_omega_d
    edges = np.geomspace(a, b, panels + 1)
    nodes, weights = gauss_legendre_panels(edges, order)

    grid = EnergyGrid(nodes=nodes, weights=weights, panel_count=panels, order=order)
    width = b - a
    if abs(float(weights.sum()) - width) > 1e-12 * width:
        raise RuntimeError("quadrature weights do not sum to the interval length")
    moment2 = float(np.dot(weights, nodes**2))
    exact2 = (b**3 - a**3) / 3.0
    if abs(moment2 - exact2) > 1e-12 * exact2:
        raise RuntimeError("quadrature is not exact on xi^2")
    return grid
