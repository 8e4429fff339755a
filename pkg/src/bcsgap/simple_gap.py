"""Constant-coupling gap curves: closed form at T = 0, vanishing temperature,
bisection solutions, and the implicit-function slope of the squared gap.

These scalar solutions serve two roles: they are physically meaningful in
their own right (constant-potential superconductor), and they bracket the
full solution pointwise, making them the independent oracle against which
the field solver is checked.  All integrals here use their own adaptive
quadrature rather than the shared collocation grid, which keeps this
module an independent computation route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import ParamsError, PhysicalParams
from .quadrature import (
    adaptive_integrate,
    gap_curvature,
    gap_kernel,
    gauss_legendre_panels,
)

__all__ = [
    "NoRootError",
    "delta0_closed_form",
    "tau_root",
    "solve_delta",
    "implicit_slope_v",
    "EnvelopeCurve",
    "envelope_curve",
    "gap_equation_residual",
]


class NoRootError(ParamsError):
    """The linearised gap equation has no vanishing temperature."""


def delta0_closed_form(U: float, params: PhysicalParams) -> float:
    """Zero-temperature gap for a constant coupling U.

    sqrt((hw - eps*e^{1/U}) (hw - eps*e^{-1/U})) / sinh(1/U); requires the
    first factor to be positive.
    """
    factor = params.closed_form_factor(U)
    if not factor > 0.0:
        raise ParamsError(
            f"closed_form_validity: hbar_omega_d - epsilon*e^(1/U) = {factor!r} <= 0"
        )
    other = params.hbar_omega_d - params.epsilon_cutoff * math.exp(-1.0 / U)
    return math.sqrt(factor * other) / math.sinh(1.0 / U)


@lru_cache(maxsize=32)
def _reference_rule(params: PhysicalParams) -> tuple[np.ndarray, np.ndarray]:
    """High-resolution quadrature rule for the scalar gap equations.

    Built once per parameter set: log-spaced panels against the 1/xi
    character of the integrands, validated by a panel-doubling check on the
    hardest integrand in scope (the zero-gap kernel at a temperature well
    below the cutoff, where the tanh knee is sharpest).
    """
    edges = np.geomspace(params.epsilon_cutoff, params.hbar_omega_d, 33)
    nodes, weights = gauss_legendre_panels(edges, 12)
    fine_edges = np.geomspace(params.epsilon_cutoff, params.hbar_omega_d, 65)
    fine_nodes, fine_weights = gauss_legendre_panels(fine_edges, 12)
    t_probe = params.epsilon_cutoff / 4.0
    coarse = float(np.dot(weights, gap_kernel(nodes, 0.0, t_probe)))
    fine = float(np.dot(fine_weights, gap_kernel(fine_nodes, 0.0, t_probe)))
    if abs(fine - coarse) > max(1e-12, 1e-10 * abs(fine)):
        raise RuntimeError(
            f"reference quadrature not converged: doubling moved the probe "
            f"integral by {abs(fine - coarse):.3e}"
        )
    return fine_nodes, fine_weights


def _coupling_integral(s: float, T: float, params: PhysicalParams) -> float:
    """integral of the gap kernel over the energy band at squared gap s."""
    nodes, weights = _reference_rule(params)
    return float(np.dot(weights, gap_kernel(nodes, s, T)))


def gap_equation_residual(U: float, delta: float, T: float, params: PhysicalParams) -> float:
    """1 - U * integral; zero at a root of the constant-coupling gap equation."""
    return 1.0 - U * _coupling_integral(delta * delta, T, params)


@lru_cache(maxsize=4096)
def tau_root(U: float, params: PhysicalParams) -> float:
    """Temperature at which the constant-coupling gap closes.

    The defining right side U * integral(tanh(xi/2T)/xi) is strictly
    decreasing in T, so a doubling bracket plus bisection is guaranteed.
    Requires U * ln(hbar_omega_d/epsilon) > 1, otherwise no root exists.
    Cached: a pure function of hashable inputs called from many hot paths.
    """
    span = U * math.log(params.hbar_omega_d / params.epsilon_cutoff)
    if not span > 1.0:
        raise NoRootError(
            f"tau_existence: U*ln(hbar_omega_d/epsilon) = {span!r} <= 1"
        )

    def f(T: float) -> float:
        return U * _coupling_integral(0.0, T, params) - 1.0

    lo = params.epsilon_cutoff * 1e-3
    while f(lo) <= 0.0:
        lo *= 0.5
        if lo < 1e-300:  # unreachable once span > 1, kept as a hard stop
            raise NoRootError("failed to bracket the vanishing temperature from below")
    hi = lo
    while f(hi) > 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    return 0.5 * (lo + hi)


@lru_cache(maxsize=262144)
def solve_delta(U: float, T: float, params: PhysicalParams) -> float:
    """Gap value for constant coupling U at temperature T.

    Returns the unique positive bisection root for 0 <= T < tau_U and
    exactly 0 for T >= tau_U (zero extension beyond the transition).  The
    right side is strictly decreasing in the gap, so the bracket
    (0, delta0] cannot fail.  Cached like tau_root.
    """
    if T < 0:
        raise ValueError("temperature must be nonnegative")
    tau = tau_root(U, params)
    if T >= tau:
        return 0.0
    d0 = delta0_closed_form(U, params)

    def f(delta: float) -> float:
        return U * _coupling_integral(delta * delta, T, params) - 1.0

    lo, hi = 0.0, d0 * (1.0 + 1e-12)
    if T > 0.0 and f(hi) > 0.0:  # T just below tau with root at ~d0: widen once
        hi = d0 * 1.5
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= max(1e-15 * d0, 1e-18):
            break
    return 0.5 * (lo + hi)


def implicit_slope_v(U: float, params: PhysicalParams) -> float:
    """Limit slope v = -d(Delta^2)/dT at the vanishing temperature.

    Differentiating Phi(T, s) = U * integral(gap_kernel(xi, s, T)) - 1 = 0
    implicitly at (tau_U, s=0) and reducing the integrals analytically:

        Phi_T = -(U/T) * [tanh(hw/(2T)) - tanh(eps/(2T))]
        Phi_s = (U/(8 T^2)) * integral of gap_curvature over
                [eps/(2T), hw/(2T)]

    so v = Phi_T / Phi_s = -8T * (tanh(hw/2T) - tanh(eps/2T)) / integral.
    Both reductions follow from d/dT tanh(xi/2T)/xi = -sech^2(xi/2T)/(2T^2)
    and d/ds of the kernel at s=0 being gap_curvature(xi/2T)/(16 T^3);
    positive because the curvature kernel is negative.
    """
    tau = tau_root(U, params)
    a = params.epsilon_cutoff / (2.0 * tau)
    b = params.hbar_omega_d / (2.0 * tau)
    curv = adaptive_integrate(gap_curvature, a, b, log_spacing=False)
    d = math.tanh(b) - math.tanh(a)
    return -8.0 * tau * d / curv


@dataclass(frozen=True)
class EnvelopeCurve:
    """Constant-coupling gap curve Delta(T) on [0, tau], zero beyond."""

    coupling: float
    tau: float
    t_nodes: np.ndarray
    delta_values: np.ndarray
    delta0: float

    def __call__(self, T: float) -> float:
        """Interpolated gap value; exactly 0 for T > tau (zero extension)."""
        if T > self.tau:
            return 0.0
        return float(np.interp(T, self.t_nodes, self.delta_values))


def envelope_curve(U: float, params: PhysicalParams, n_nodes: int = 129) -> EnvelopeCurve:
    """Sample the constant-coupling gap curve on [0, tau].

    Nodes cluster toward tau where the curve has a square-root drop.
    """
    if n_nodes < 3:
        raise ValueError("need at least 3 temperature nodes")
    tau = tau_root(U, params)
    # quadratic clustering toward tau resolves Delta ~ sqrt(tau - T)
    frac = 1.0 - (1.0 - np.linspace(0.0, 1.0, n_nodes)) ** 2
    t_nodes = tau * frac
    deltas = np.array([solve_delta(U, float(t), params) for t in t_nodes])
    return EnvelopeCurve(
        coupling=U,
        tau=tau,
        t_nodes=t_nodes,
        delta_values=deltas,
        delta0=delta0_closed_form(U, params),
    )
