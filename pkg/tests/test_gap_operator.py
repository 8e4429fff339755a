import numpy as np
import pytest

from bcsgap.gap_operator import (
    GapField,
    apply_A,
    kernel_matrix,
    radius_crossing_temperature,
    sample_envelope_field,
    spectral_radius,
)
from bcsgap.model import ConstantPotential
from bcsgap.quadrature import gap_kernel
from bcsgap.simple_gap import solve_delta, tau_root


def test_apply_preserves_zero(const_potential, params, grid):
    zero = GapField(temperature=0.03, values=np.zeros(grid.size))
    out = apply_A(zero, const_potential, grid)
    assert np.all(out.values == 0.0)
    assert out.temperature == 0.03


def test_constant_input_gives_constant_output(const_potential, params, grid):
    u = GapField(temperature=0.03, values=np.full(grid.size, 0.02))
    out = apply_A(u, const_potential, grid).values
    assert np.max(out) - np.min(out) <= 1e-15 * np.max(out)


def test_apply_rejects_mismatched_grid(const_potential, grid):
    with pytest.raises(ValueError, match="does not match"):
        apply_A(GapField(0.03, np.zeros(grid.size - 1)), const_potential, grid)


def test_gap_field_rejects_negative_values():
    with pytest.raises(ValueError, match="nonnegative"):
        GapField(0.03, np.array([0.1, -0.1]))


def test_envelope_preservation(const_potential, params, grid):
    # fields between the envelope curves stay between them under the operator
    rng = np.random.default_rng(42)
    tau1 = tau_root(params.u_lower, params)
    t_c = tau_root(0.3, params)
    for _ in range(100):
        t = float(rng.uniform(0.8 * tau1, t_c))
        u = sample_envelope_field(t, params, grid, rng)
        out = apply_A(u, const_potential, grid).values
        d1 = solve_delta(params.u_lower, t, params)
        d2 = solve_delta(params.u_upper, t, params)
        assert np.all(out >= d1 - 1e-9)
        assert np.all(out <= d2 + 1e-9)


def test_monotone_in_field(const_potential, params, grid):
    rng = np.random.default_rng(42)
    t_c = tau_root(0.3, params)
    for _ in range(100):
        t = float(rng.uniform(0.02, t_c))
        d2 = solve_delta(params.u_upper, t, params)
        lo = rng.uniform(0.0, 0.7, grid.size) * d2
        hi = lo + rng.uniform(0.0, 0.3, grid.size) * d2
        out_lo = apply_A(GapField(t, lo), const_potential, grid).values
        out_hi = apply_A(GapField(t, np.minimum(hi, d2)), const_potential, grid).values
        assert np.all(out_lo <= out_hi + 1e-12)


def test_monotone_in_temperature(const_potential, params, grid):
    # the same field values applied at a colder temperature dominate
    rng = np.random.default_rng(7)
    for _ in range(100):
        t1 = float(rng.uniform(0.01, 0.05))
        t2 = t1 + float(rng.uniform(1e-4, 0.05))
        vals = rng.uniform(0.0, 0.06, grid.size)
        cold = apply_A(GapField(t1, vals), const_potential, grid).values
        warm = apply_A(GapField(t2, vals), const_potential, grid).values
        assert np.all(cold >= warm - 1e-12)


def test_positivity(const_potential, params, grid):
    u = np.zeros(grid.size)
    u[grid.size // 2] = 0.01  # nonzero somewhere only
    out = apply_A(GapField(0.03, u), const_potential, grid).values
    assert np.all(out > 0.0)


def test_kernel_matrix_row_sums_constant_potential(const_potential, params, grid):
    t = 0.035
    k = kernel_matrix(t, const_potential, grid)
    rows = k.entries.sum(axis=1)
    expected = 0.3 * float(np.dot(grid.weights, gap_kernel(grid.nodes, 0.0, t)))
    assert rows == pytest.approx(np.full(grid.size, expected), rel=1e-14)
    assert np.all(k.entries > 0.0)


def test_kernel_matrix_unit_row_sum_at_tau(const_potential, params, grid):
    tau = tau_root(0.3, params)
    rows = kernel_matrix(tau, const_potential, grid).entries.sum(axis=1)
    assert rows == pytest.approx(np.ones(grid.size), abs=1e-12)


def test_kernel_matrix_entries_decrease_with_temperature(const_potential, grid):
    cold = kernel_matrix(0.03, const_potential, grid).entries
    warm = kernel_matrix(0.04, const_potential, grid).entries
    assert np.all(warm < cold)


def test_kernel_matrix_requires_positive_temperature(const_potential, grid):
    with pytest.raises(ValueError):
        kernel_matrix(0.0, const_potential, grid)


def test_spectral_radius_constant_potential(const_potential, params, grid):
    t = 0.035
    result = spectral_radius(t, const_potential, grid)
    expected = 0.3 * float(np.dot(grid.weights, gap_kernel(grid.nodes, 0.0, t)))
    assert result.radius == pytest.approx(expected, rel=1e-12)
    vec = result.eigenvector
    assert np.max(vec) == pytest.approx(1.0, rel=1e-15)  # sup-norm one
    assert np.max(vec) - np.min(vec) <= 1e-10  # constant eigenvector


def test_spectral_radius_decreasing_in_temperature(gauss_potential, grid):
    ts = np.linspace(0.03, 0.045, 6)
    radii = [spectral_radius(float(t), gauss_potential, grid).radius for t in ts]
    assert np.all(np.diff(radii) < 0.0)


def test_spectral_radius_is_one_at_tau(const_potential, params, grid):
    tau = tau_root(0.3, params)
    assert spectral_radius(tau, const_potential, grid).radius == pytest.approx(
        1.0, abs=1e-9
    )


def test_radius_crossing_requires_valid_bracket(params, grid):
    # a potential outside the coupling band breaks the bracket
    tau1, tau2 = tau_root(params.u_lower, params), tau_root(params.u_upper, params)
    with pytest.raises(ValueError, match="bracket invalid"):
        radius_crossing_temperature(ConstantPotential(0.35), grid, tau1, tau2)


def test_sampled_envelope_fields_are_admissible(params, grid):
    rng = np.random.default_rng(3)
    t = 0.03
    d1 = solve_delta(params.u_lower, t, params)
    d2 = solve_delta(params.u_upper, t, params)
    for _ in range(20):
        u = sample_envelope_field(t, params, grid, rng).values
        assert np.all(u >= d1 - 1e-15)
        assert np.all(u <= d2 + 1e-15)
