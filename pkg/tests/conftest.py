"""Shared fixtures: the default configuration solved once per session."""

from __future__ import annotations

import time

import pytest

from bcsgap.certificate import search_certificate
from bcsgap.model import ConstantPotential, GaussianBumpPotential, build_grid, make_params
from bcsgap.solver import solve_surface
from bcsgap.thermo import build_thermo_report


@pytest.fixture(scope="session")
def params():
    # hbar_omega_d = 1, cutoff 0.005, N0 = 1, margin envelope around U = 0.30
    return make_params(1.0, 0.005, 1.0, 0.291, 0.309)


@pytest.fixture(scope="session")
def grid(params):
    return build_grid(params, panels=16, order=10)


@pytest.fixture(scope="session")
def const_potential():
    return ConstantPotential(u0=0.3)


@pytest.fixture(scope="session")
def gauss_potential():
    return GaussianBumpPotential(base=0.30, amplitude=0.005, width=0.2)


@pytest.fixture(scope="session")
def const_surface(const_potential, params, grid):
    """Default-config surface; elapsed wall time kept for the runtime gate."""
    t0 = time.perf_counter()
    surface = solve_surface(const_potential, params, grid)
    elapsed = time.perf_counter() - t0
    return surface, elapsed


@pytest.fixture(scope="session")
def const_report(const_surface, const_potential, params, grid):
    surface, _ = const_surface
    return build_thermo_report(surface, const_potential, params, grid)


@pytest.fixture(scope="session")
def gauss_surface(gauss_potential, params, grid):
    return solve_surface(gauss_potential, params, grid, t_resolution=20)


@pytest.fixture(scope="session")
def default_search_outcome(const_potential, params, grid, const_surface):
    surface, _ = const_surface
    return search_certificate(const_potential, params, grid, t_c=surface.t_c)
