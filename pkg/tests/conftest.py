"""Shared fixtures: models, grids and a few reference surfaces."""

import numpy as np
import pytest

from warpgraphs.cmc_solver import make_perturbed
from warpgraphs.warp_core import Grid, WarpedModel, WarpFamily, WarpKind, hyperbolic_space, steady_state_space

TWO_PI = 2.0 * np.pi


@pytest.fixture(params=["hyperbolic", "steady_state"])
def exp_model(request):
    return hyperbolic_space(2) if request.param == "hyperbolic" else steady_state_space(2)


@pytest.fixture
def hyp():
    return hyperbolic_space(2)


@pytest.fixture
def steady():
    return steady_state_space(2)


def cosh_model(eps):
    return WarpedModel(eps, WarpFamily(WarpKind.COSH), 2)


def periodic_grid(n, length=TWO_PI, dim=2):
    return Grid.box((n,) * dim, length, "periodic")


def unit_box(n=33, length=1.0):
    return Grid.box((n, n), length, "dirichlet")


def random_periodic_surface(model, grid, rng, amplitude=0.05, t0=None):
    """Sum-free single-mode graph with random integer wave numbers and height."""
    L = grid.lengths[0]
    k = 2.0 * np.pi / L * rng.integers(1, 3, size=grid.dim)
    t0 = rng.uniform(-0.3, 0.3) if t0 is None else t0
    return make_perturbed(model, grid, t0, amplitude, k)


def observed_order(errors, ratio=2.0):
    errors = np.asarray(errors, dtype=float)
    return np.log(errors[:-1] / errors[1:]) / np.log(ratio)
