"""Fixed-point iteration to the gap-equation solution and assembly of the
gap surface on [tau, T_c] x [epsilon, hbar_omega_d], including T_c itself.

Each temperature is solved independently (the solves share nothing mutable
and may run concurrently).  Iteration starts from the upper envelope and
stops through an a-posteriori bound: if successive differences contract at
rate rho, then ||u_n - u*|| <= rho/(1-rho) * ||u_n - u_{n-1}||.  The rate
used in the bound is the larger of the supplied contraction constant and
the observed difference ratio, because near T_c the true rate approaches
one like 1 - O(T_c - T) and a fixed constant would understate the error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .certificate import (
    CertificateFailure,
    ContractionCertificate,
    search_certificate,
)
from .gap_operator import (
    GapField,
    apply_values,
    radius_crossing_temperature,
    spectral_radius,
    weighted_potential_matrix,
)
from .model import EnergyGrid, PhysicalParams, PotentialSpec
from .simple_gap import solve_delta, tau_root

__all__ = [
    "ConvergenceError",
    "SolveTrace",
    "GapSurface",
    "picard_solve",
    "critical_temperature",
    "solve_surface",
]

# Perron roots this close to or below one admit only the zero field inside
# the envelope, so iteration is unnecessary (and would stall sublinearly).
_ZERO_PHASE_SLACK = 1e-9


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted; carries the observed rate for diagnosis."""

    def __init__(self, message: str, observed_ratio: float):
        super().__init__(message)
        self.observed_ratio = observed_ratio


@dataclass(frozen=True)
class SolveTrace:
    """Successive sup-norm differences of one fixed-point solve."""

    iterates: np.ndarray
    final_residual: float
    iterations: int

    def asymptotic_ratio(self, window: int = 10) -> float:
        """Largest ratio of successive differences over the final window."""
        d = self.iterates
        if d.size < 2:
            return 0.0
        tail = d[-(window + 1):]
        ratios = tail[1:] / np.maximum(tail[:-1], 1e-300)
        return float(np.max(ratios))


@dataclass(frozen=True)
class GapSurface:
    """Solution values on a temperature x energy lattice, plus T_c."""

    t_nodes: np.ndarray
    x_nodes: np.ndarray
    values: np.ndarray  # shape (len(t_nodes), len(x_nodes))
    t_c: float
    certificate_alpha: float
    certified: bool
    traces: list[SolveTrace] = field(repr=False, default_factory=list)

    @property
    def tau(self) -> float:
        return float(self.t_nodes[0])

    def row(self, i: int) -> GapField:
        return GapField(temperature=float(self.t_nodes[i]), values=self.values[i])


def picard_solve(
    T: float,
    potential: PotentialSpec,
    params: PhysicalParams,
    grid: EnergyGrid,
    alpha: float = 0.5,
    tol: float = 1e-9,
    max_iter: int = 2_000_000,
    initial: np.ndarray | None = None,
) -> tuple[GapField, SolveTrace]:
    """Iterate u <- A u from the upper envelope until within tol of the
    fixed point.

    Stops when the sup-norm difference drops below tol*(1-rho)/rho for the
    effective rate rho described in the module docstring, which guarantees
    ||u - u*|| <= tol, and leaves the returned field with residual
    ||u - Au|| <= tol*(1+rho) <= 2 tol.

    If the zero-field Perron root at T is <= 1 (temperature at or above the
    transition), the zero field is the unique fixed point inside the
    envelope and is returned directly.

    ``initial`` overrides the upper-envelope start, e.g. for uniqueness
    probes from the lower envelope.  Note the zero field is always a fixed
    point, so a probe start must be positive somewhere.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if spectral_radius(T, potential, grid).radius <= 1.0 + _ZERO_PHASE_SLACK:
        zero = np.zeros(grid.size)
        return (
            GapField(temperature=T, values=zero),
            SolveTrace(iterates=np.array([]), final_residual=0.0, iterations=0),
        )

    weighted = weighted_potential_matrix(potential, grid)
    xi = grid.nodes
    if initial is not None:
        u = np.asarray(initial, dtype=float).copy()
        if u.shape != grid.nodes.shape:
            raise ValueError("initial field does not match the grid")
    else:
        u = np.full(grid.size, solve_delta(params.u_upper, T, params))
    diffs: list[float] = []
    rho = alpha
    prev_diff = None
    for n in range(1, max_iter + 1):
        au = apply_values(weighted, xi, u, T)
        diff = float(np.max(np.abs(au - u)))
        diffs.append(diff)
        u = au
        if prev_diff is not None and prev_diff > 0.0:
            # decay the estimate slowly so one noisy ratio cannot hide the
            # true asymptotic rate, then track the current observation
            rho = max(alpha, rho * 0.9, min(diff / prev_diff, 1.0 - 1e-15))
        prev_diff = diff
        if diff <= tol * (1.0 - rho) / rho:
            residual = float(
                np.max(np.abs(apply_values(weighted, xi, u, T) - u))
            )
            return (
                GapField(temperature=T, values=u),
                SolveTrace(
                    iterates=np.array(diffs), final_residual=residual, iterations=n
                ),
            )
    raise ConvergenceError(
        f"no convergence at T={T!r} after {max_iter} iterations "
        f"(observed ratio {rho:.6f})",
        observed_ratio=rho,
    )


def critical_temperature(
    potential: PotentialSpec,
    params: PhysicalParams,
    grid: EnergyGrid,
    *,
    cross_check: bool = True,
    tol: float = 1e-9,
) -> float:
    """Transition temperature: unit crossing of the zero-field Perron root.

    Bracketed by the envelope vanishing temperatures [tau1, tau2]; bracket
    validity is asserted.  With ``cross_check`` the locator is validated
    against the solution itself: just below T_c the solved field must shrink
    like sqrt(T_c - T) (sup-norm ratio ~2 between offsets delta and
    delta/4), and just above T_c the linearised radius must fall below one.
    Disagreement raises rather than silently preferring one criterion.
    """
    tau1 = tau_root(params.u_lower, params)
    tau2 = tau_root(params.u_upper, params)
    t_c = radius_crossing_temperature(potential, grid, tau1, tau2)

    if cross_check:
        delta = 1e-2 * t_c
        u1, _ = picard_solve(t_c - delta, potential, params, grid, tol=tol)
        u2, _ = picard_solve(t_c - delta / 4.0, potential, params, grid, tol=tol)
        ratio = u1.sup_norm / max(u2.sup_norm, 1e-300)
        if not 1.5 <= ratio <= 2.5:
            raise RuntimeError(
                f"spectral locator and solution norm disagree: sup-norm ratio "
                f"{ratio!r} at offsets {delta!r}, {delta/4!r} is far from the "
                "square-root scaling value 2"
            )
        above = spectral_radius(t_c + delta, potential, grid).radius
        if not above < 1.0:
            raise RuntimeError(
                f"linearised radius {above!r} at T_c + {delta!r} is not below one"
            )
    return t_c


def solve_surface(
    potential: PotentialSpec,
    params: PhysicalParams,
    grid: EnergyGrid,
    t_resolution: int = 24,
    tol: float = 1e-11,
    *,
    span_decades: float = 2.2,
    t_min: float | None = None,
    certificate: ContractionCertificate | CertificateFailure | None = None,
    run_certificate_search: bool = True,
    max_iter: int = 2_000_000,
) -> GapSurface:
    """Solve the gap equation on a clustered temperature lattice up to T_c.

    Temperature nodes approach T_c geometrically (spacing proportional to
    T_c - T over ``span_decades`` decades) so that downstream extrapolation
    can resolve the sqrt(T_c - T) shrinkage of the gap; the exact zero row
    at T_c is appended.  When no contraction certificate is available the
    surface is marked uncertified and carries the empirical rate bound
    min(max observed ratio + 0.1, 0.95) instead.
    """
    if t_resolution < 2:
        raise ValueError("need at least 2 temperature nodes")
    t_c = critical_temperature(potential, params, grid, cross_check=False)

    if certificate is None and run_certificate_search:
        certificate = search_certificate(potential, params, grid, t_c=t_c)
    certified = isinstance(certificate, ContractionCertificate)
    alpha0 = certificate.alpha if certified else 0.5

    tau = t_min if t_min is not None else tau_root(params.u_lower, params)
    if not tau < t_c:
        raise ValueError(f"lower temperature {tau!r} must be below T_c = {t_c!r}")

    d0 = t_c - tau
    ratio = 10.0 ** (-span_decades / (t_resolution - 1))
    offsets = d0 * ratio ** np.arange(t_resolution)
    t_nodes = t_c - offsets  # increasing toward T_c

    rows: list[np.ndarray] = []
    traces: list[SolveTrace] = []
    observed = 0.0
    for T in t_nodes:
        u, trace = picard_solve(
            float(T), potential, params, grid, alpha=alpha0, tol=tol,
            max_iter=max_iter,
        )
        rows.append(u.values)
        traces.append(trace)
        if trace.iterates.size >= 2:
            observed = max(observed, trace.asymptotic_ratio())

    values = np.vstack(rows + [np.zeros(grid.size)])
    t_all = np.append(t_nodes, t_c)
    alpha_out = (
        certificate.alpha if certified else min(observed + 0.1, 0.95)
    )
    surface = GapSurface(
        t_nodes=t_all,
        x_nodes=grid.nodes,
        values=values,
        t_c=t_c,
        certificate_alpha=alpha_out,
        certified=certified,
        traces=traces,
    )
    _validate_surface(surface, params, tol)
    return surface


def _validate_surface(surface: GapSurface, params: PhysicalParams, tol: float) -> None:
    """Abort with the offending (T, x) pair on any invariant violation."""
    vals = surface.values
    if np.any(vals[-1] != 0.0):
        raise RuntimeError("terminal row at T_c is not identically zero")
    # monotone non-increasing in T for each x, up to twice the solve tolerance
    rising = vals[1:] > vals[:-1] + 2.0 * tol
    if np.any(rising):
        i, j = np.argwhere(rising)[0]
        raise RuntimeError(
            f"monotonicity violated at T={surface.t_nodes[i + 1]!r}, "
            f"x={surface.x_nodes[j]!r}"
        )
    envelope_tol = 1e-9 + 2.0 * tol
    for i, T in enumerate(surface.t_nodes[:-1]):
        d1 = solve_delta(params.u_lower, float(T), params)
        d2 = solve_delta(params.u_upper, float(T), params)
        row = vals[i]
        bad = (row < d1 - envelope_tol) | (row > d2 + envelope_tol)
        if np.any(bad):
            j = int(np.argwhere(bad)[0][0])
            raise RuntimeError(
                f"envelope violated at T={T!r}, x={surface.x_nodes[j]!r}: "
                f"u={row[j]!r} outside [{d1!r}, {d2!r}]"
            )
