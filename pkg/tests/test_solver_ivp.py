import numpy as np
import pytest

from geodense import (AmbientSpace, ConfigError, DomainError, GaussianMixture,
                      IvpConfig, UniformDensity, ZeroVelocityError, init_velocity,
                      ivp_rhs, solve_ivp)
from geodense.density import ScoreProvider, ScoreResult
from geodense.errors import RemoteProviderError

E2 = AmbientSpace.euclidean(2)
S3 = AmbientSpace.sphere(3, 1.0)


def test_config_validation():
    with pytest.raises(ConfigError):
        IvpConfig(steps=0)
    with pytest.raises(ConfigError):
        IvpConfig(beta=0.0)
    assert IvpConfig().steps == 200


def test_init_velocity_examples():
    v = init_velocity(E2, np.zeros(2), np.array([3.0, 4.0]), 1.0)
    np.testing.assert_allclose(v, [0.6, 0.8], rtol=1e-14)
    v = init_velocity(AmbientSpace.sphere(2, 1.0),
                      np.array([1.0, 0.0]), np.array([1.0, 1.0]), 2.0)
    np.testing.assert_allclose(v, [0.0, 2.0], atol=1e-14)
    with pytest.raises(ZeroVelocityError):
        init_velocity(AmbientSpace.sphere(2, 1.0), np.array([1.0, 0.0]),
                      np.array([2.0, 0.0]), 1.0)
    with pytest.raises(DomainError):
        init_velocity(E2, np.zeros(2), np.ones(2), 0.0)


def test_ivp_rhs_zeros():
    u = UniformDensity(2)
    a = ivp_rhs(E2, np.array([0.3, 0.4]), np.array([1.0, 0.0]), u)
    np.testing.assert_array_equal(a, np.zeros(2))
    # score parallel to velocity is annihilated
    m = GaussianMixture([1.0], [[0.0, 0.0]], diag=[[1.0, 1.0]])
    a = ivp_rhs(E2, np.array([-2.0, 0.0]), np.array([3.0, 0.0]), m)
    np.testing.assert_allclose(a, np.zeros(2), atol=1e-14)


def test_ivp_rhs_standard_normal_direction():
    # x=(0,1), v=(1,0): score -x is already orthogonal to v, so the printed
    # ODE gives a = -|v|^2 * (0,-1) = (0,+1); the sign is pinned by the
    # BVP-vs-IVP consistency oracle (acceptance A9)
    m = GaussianMixture([1.0], [[0.0, 0.0]], diag=[[1.0, 1.0]])
    a = ivp_rhs(E2, np.array([0.0, 1.0]), np.array([1.0, 0.0]), m, beta=1.0)
    np.testing.assert_allclose(a, [0.0, 1.0], atol=1e-14)


def test_ivp_rhs_orthogonality(benchmark_mixture):
    rng = np.random.default_rng(6)
    for _ in range(20):
        x = rng.normal(size=2)
        v = rng.normal(size=2)
        a = ivp_rhs(E2, x, v, benchmark_mixture)
        assert abs(a @ v) <= 1e-10 * (np.linalg.norm(a) * np.linalg.norm(v) + 1e-300)
    s = AmbientSpace.sphere(3, 2.0)
    m3 = GaussianMixture([1.0], [[1.0, 0.5, -0.2]], diag=[[0.5, 0.5, 0.5]])
    for _ in range(20):
        x = rng.normal(size=3)
        x = 2.0 * x / np.linalg.norm(x)
        v = rng.normal(size=3)
        v = v - (v @ x) / 4.0 * x
        a = ivp_rhs(s, x, v, m3)
        scale = np.linalg.norm(a) + 1e-300
        assert abs(a @ v) <= 1e-10 * scale * np.linalg.norm(v)
        assert abs(a @ x) <= 1e-10 * scale * 2.0


def test_solve_ivp_uniform_euclidean_straight_line():
    u = UniformDensity(2)
    x0 = np.array([0.5, -0.25])
    v0 = np.array([1.0, 2.0])
    states, path, summary = solve_ivp(E2, x0, v0, u, None, IvpConfig(steps=50))
    np.testing.assert_allclose(path.points[-1], x0 + v0, atol=1e-12)
    np.testing.assert_allclose(summary.endpoint, x0 + v0, atol=1e-12)
    # samples sit on the line at t = i/n
    np.testing.assert_allclose(path.points, x0[None] + path.ts[:, None] * v0[None],
                               atol=1e-12)
    assert summary.speed_drift <= 1e-12


def test_solve_ivp_uniform_sphere_great_circle():
    u = UniformDensity(3)
    x0 = np.array([0.0, 0.0, 1.0])
    d = np.array([1.0, 1.0, 0.0])
    speed = 1.5
    v0 = init_velocity(S3, x0, d, speed)
    states, path, summary = solve_ivp(S3, x0, v0, u, None, IvpConfig(steps=200))
    closed = np.cos(speed) * x0 + np.sin(speed) * d / np.linalg.norm(d)
    assert np.linalg.norm(summary.endpoint - closed) <= 1e-6
    radii = np.linalg.norm(path.points, axis=1)
    assert np.max(np.abs(radii - 1.0)) <= 1e-9
    assert summary.speed_drift <= 1e-4


def test_solve_ivp_time_reversal_euclidean():
    u = UniformDensity(2)
    x0 = np.array([1.0, 2.0])
    v0 = np.array([0.5, -1.0])
    _, _, fwd = solve_ivp(E2, x0, v0, u, None, IvpConfig(steps=64))
    _, _, back = solve_ivp(E2, fwd.endpoint, -v0, u, None, IvpConfig(steps=64))
    assert np.linalg.norm(back.endpoint - x0) <= 1e-9


def test_solve_ivp_tangency_required_on_sphere():
    u = UniformDensity(3)
    with pytest.raises(DomainError):
        solve_ivp(S3, np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.1, 1.0]), u)


def test_solve_ivp_record_every():
    u = UniformDensity(2)
    states, path, _ = solve_ivp(E2, np.zeros(2), np.ones(2), u, None,
                                IvpConfig(steps=20, record_every=5))
    assert [s.t for s in states] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert path.n_samples == 21


class _FailingProvider(ScoreProvider):
    """Raises a provider error after a set number of score calls."""

    has_log_density = False

    def __init__(self, dim, fail_after):
        self.dim = dim
        self.calls = 0
        self.fail_after = fail_after

    def score(self, points, cond=None, t=None):
        self.calls += 1
        if self.calls > self.fail_after:
            raise RemoteProviderError("provider died", request_id=self.calls)
        pts = np.asarray(points, dtype=float)
        return ScoreResult(np.zeros_like(pts), None)


def test_solve_ivp_partial_states_on_provider_failure():
    provider = _FailingProvider(2, fail_after=41)   # fails mid-step at i=10
    with pytest.raises(RemoteProviderError) as info:
        solve_ivp(E2, np.zeros(2), np.ones(2), provider, None, IvpConfig(steps=50))
    partial = info.value.partial_states
    assert len(partial) == 11   # states 0..10 were recorded before the failure
    assert partial[-1].t == pytest.approx(0.2)
