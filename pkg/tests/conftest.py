"""Shared fixtures: the two-Gaussian benchmark and session-scoped solves."""

import numpy as np
import pytest

from geodense import (AmbientSpace, BvpConfig, GaussianMixture, init_path,
                      solve_bvp)

# benchmark: equal-weight isotropic Gaussians at (+-1.5, 0) with sigma = 0.5;
# endpoints straddle the low-density region below the saddle
BENCH_A = np.array([-1.5, -1.2])
BENCH_B = np.array([1.5, -1.2])


def make_benchmark_mixture() -> GaussianMixture:
    return GaussianMixture(
        weights=[0.5, 0.5],
        means=[[-1.5, 0.0], [1.5, 0.0]],
        diag=[[0.25, 0.25], [0.25, 0.25]])


def benchmark_bvp_config(**overrides) -> BvpConfig:
    base = dict(steps=400, lr0=0.01, lr_schedule="linear",
                bisection_levels=(1, 3, 7, 15), refine_every=100,
                beta=1.0, derivative_mode="direction", quad_n=1024)
    base.update(overrides)
    return BvpConfig(**base)


@pytest.fixture(scope="session")
def benchmark_mixture():
    return make_benchmark_mixture()


@pytest.fixture(scope="session")
def euclidean2():
    return AmbientSpace.euclidean(2)


@pytest.fixture(scope="session")
def benchmark_solve(benchmark_mixture, euclidean2):
    """Converged across-gap solve shared by the slower tests."""
    path, trace = solve_bvp(euclidean2, BENCH_A, BENCH_B, benchmark_mixture,
                            None, benchmark_bvp_config())
    straight = init_path(euclidean2, BENCH_A, BENCH_B, 15)
    return {"path": path, "trace": trace, "straight": straight,
            "provider": benchmark_mixture, "space": euclidean2}
