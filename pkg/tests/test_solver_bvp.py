import numpy as np
import pytest

from geodense import (AmbientSpace, BvpConfig, ConfigError, DomainError,
                      UniformDensity, bisect_path, bvp_step, init_path,
                      relative_geodesic_distance, solve_bvp)
from geodense.solver_bvp import interpolant_rel_distance

from conftest import BENCH_A, BENCH_B, benchmark_bvp_config

E2 = AmbientSpace.euclidean(2)
S2 = AmbientSpace.sphere(2, 1.0)


def test_config_validation():
    with pytest.raises(ConfigError):
        BvpConfig(bisection_levels=(1, 3, 8))
    with pytest.raises(ConfigError):
        BvpConfig(steps=100, bisection_levels=(1, 3, 7), refine_every=100)
    with pytest.raises(ConfigError):
        BvpConfig(lr0=-0.1)
    with pytest.raises(ConfigError):
        BvpConfig(lr_schedule="cosine")
    cfg = BvpConfig()
    assert cfg.steps == 400 and cfg.lr0 == 0.1
    assert cfg.bisection_levels == (1, 3, 7, 15) and cfg.refine_every == 100
    assert cfg.learning_rate(0) == 0.1
    assert cfg.learning_rate(200) == pytest.approx(0.05)
    const = BvpConfig(lr_schedule="constant", lr0=0.02)
    assert const.learning_rate(399) == 0.02


def test_init_path_examples():
    p = init_path(E2, np.array([0.0, 0.0]), np.array([2.0, 0.0]), 1)
    np.testing.assert_allclose(p.points[1], [1.0, 0.0])
    np.testing.assert_array_equal(p.ts, [0.0, 0.5, 1.0])

    q = init_path(S2, np.array([1.0, 0.0]), np.array([0.0, 1.0]), 3)
    angles = np.arctan2(q.points[:, 1], q.points[:, 0])
    np.testing.assert_allclose(angles[1:-1], [np.pi / 8, np.pi / 4, 3 * np.pi / 8],
                               atol=1e-12)

    r = init_path(E2, np.zeros(2), np.ones(2), 0)
    assert r.n_samples == 2

    with pytest.raises(DomainError):
        init_path(E2, np.ones(2), np.ones(2), 1)


def test_bisect_path():
    p = init_path(E2, np.zeros(2), np.array([2.0, 0.0]), 1)
    q = bisect_path(p)
    assert q.interior_count == 3
    np.testing.assert_array_equal(q.points[2], p.points[1])   # original midpoint kept
    r = bisect_path(q)
    assert r.interior_count == 7
    # collinear points stay collinear
    assert np.allclose(r.points[:, 1], 0.0)


def test_bvp_step_uniform_density_fixed_point():
    u = UniformDensity(2)
    cfg = BvpConfig()
    path = init_path(E2, np.zeros(2), np.array([1.0, 1.0]), 7)
    stepped, norm = bvp_step(path, u, None, cfg, lr=0.1)
    assert norm <= 1e-12
    np.testing.assert_allclose(stepped.points, path.points, atol=1e-12)


def test_bvp_step_zero_lr_is_identity(benchmark_mixture):
    cfg = BvpConfig()
    path = init_path(E2, BENCH_A, BENCH_B, 7)
    stepped, _ = bvp_step(path, benchmark_mixture, None, cfg, lr=0.0)
    np.testing.assert_array_equal(stepped.points, path.points)


def test_bvp_step_decreases_distance(benchmark_mixture):
    cfg = BvpConfig()
    path = init_path(E2, BENCH_A, BENCH_B, 7)
    before = relative_geodesic_distance(path, benchmark_mixture, n=2048)[-1]
    stepped, _ = bvp_step(path, benchmark_mixture, None, cfg, lr=0.005)
    after = relative_geodesic_distance(stepped, benchmark_mixture, n=2048)[-1]
    assert after < before


def test_bvp_step_endpoints_bit_identical(benchmark_mixture):
    cfg = BvpConfig()
    path = init_path(E2, BENCH_A, BENCH_B, 7)
    stepped, _ = bvp_step(path, benchmark_mixture, None, cfg, lr=0.01)
    assert stepped.points[0].tobytes() == path.points[0].tobytes()
    assert stepped.points[-1].tobytes() == path.points[-1].tobytes()


def test_solve_bvp_uniform_returns_initialization():
    u = UniformDensity(2)
    cfg = BvpConfig(steps=40, refine_every=10, quad_n=64)
    a, b = np.array([0.0, 0.0]), np.array([2.0, 1.0])
    path, trace = solve_bvp(E2, a, b, u, None, cfg)
    ref = init_path(E2, a, b, 15)
    assert np.max(np.linalg.norm(path.points - ref.points, axis=1)) <= 1e-9
    assert trace.k[-1] == 15


def test_solve_bvp_sphere_norms_and_radius_validation():
    u = UniformDensity(3)
    s = AmbientSpace.sphere(3, 1.0)
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([0.0, 1.0, 0.0])
    cfg = BvpConfig(steps=40, refine_every=10, quad_n=64)
    path, trace = solve_bvp(s, a, b, u, None, cfg)
    assert np.max(np.abs(np.linalg.norm(path.points, axis=1) - 1.0)) <= 1e-9
    with pytest.raises(DomainError):
        solve_bvp(s, a, 1.2 * b, u, None, cfg)


def test_refinement_preserves_interpolant_distance(benchmark_mixture):
    path = init_path(E2, BENCH_A, BENCH_B, 3)
    before = interpolant_rel_distance(path, benchmark_mixture, n=1024)
    after = interpolant_rel_distance(bisect_path(path), benchmark_mixture, n=1024)
    assert abs(after - before) / before <= 0.01


def test_solve_bvp_determinism(benchmark_mixture):
    cfg = benchmark_bvp_config(steps=60, refine_every=20, quad_n=128,
                               bisection_levels=(1, 3, 7))
    out1 = solve_bvp(E2, BENCH_A, BENCH_B, benchmark_mixture, None, cfg)
    out2 = solve_bvp(E2, BENCH_A, BENCH_B, benchmark_mixture, None, cfg)
    assert out1[0].points.tobytes() == out2[0].points.tobytes()
    assert out1[1].rel_distance == out2[1].rel_distance
    assert out1[1].mean_grad_norm == out2[1].mean_grad_norm


def test_solve_bvp_early_stop():
    u = UniformDensity(2)
    cfg = BvpConfig(steps=400, refine_every=100, quad_n=64, convergence_tol=1e-6)
    _, trace = solve_bvp(E2, np.zeros(2), np.ones(2), u, None, cfg)
    assert len(trace.iterations) == 1   # uniform density converges immediately


def test_solve_bvp_partial_trace_on_provider_failure():
    import numpy as _np
    from geodense.density import ScoreProvider, ScoreResult
    from geodense.errors import RemoteProviderError

    class Flaky(ScoreProvider):
        has_log_density = False
        dim = 2

        def __init__(self):
            self.calls = 0

        def score(self, points, cond=None, t=None):
            self.calls += 1
            if self.calls > 12:
                raise RemoteProviderError("gone")
            pts = _np.asarray(points, dtype=float)
            return ScoreResult(_np.zeros_like(pts), None)

    cfg = BvpConfig(steps=40, refine_every=10, quad_n=16)
    with pytest.raises(RemoteProviderError) as info:
        solve_bvp(E2, np.zeros(2), np.ones(2), Flaky(), None, cfg)
    partial = info.value.partial_trace
    assert len(partial.iterations) == 6   # two provider calls per iteration


def test_solve_bvp_snapshots_record_refinements(benchmark_mixture):
    cfg = benchmark_bvp_config(steps=40, refine_every=10, quad_n=64,
                               bisection_levels=(1, 3, 7, 15))
    _, trace = solve_bvp(E2, BENCH_A, BENCH_B, benchmark_mixture, None, cfg)
    ks = [snap.interior_count for _, snap in trace.snapshots]
    assert ks[0] == 1 and ks[-1] == 15
    assert set(ks) == {1, 3, 7, 15}
