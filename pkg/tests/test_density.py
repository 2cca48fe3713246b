import numpy as np
import pytest

from geodense import (ConditionalMixturePair, ConditioningSchedule, DomainError,
                      GaussianMixture, GridField, UniformDensity)
from oracles import finite_diff_gradient

LOG_2PI = np.log(2.0 * np.pi)


def std_normal_2d():
    return GaussianMixture([1.0], [[0.0, 0.0]], diag=[[1.0, 1.0]])


def test_log_density_standard_normal():
    m = std_normal_2d()
    assert m.score(np.zeros((1, 2))).log_density[0] == pytest.approx(-LOG_2PI, abs=1e-14)
    assert m.score(np.array([[1.0, 0.0]])).log_density[0] == pytest.approx(
        -LOG_2PI - 0.5, abs=1e-14)


def test_log_density_two_well_separated_components():
    m = GaussianMixture([0.5, 0.5], [[-20.0, 0.0], [20.0, 0.0]],
                        diag=[[1.0, 1.0], [1.0, 1.0]])
    # direct summation oracle at the first mean
    x = np.array([-20.0, 0.0])
    direct = np.log(
        0.5 * np.exp(-LOG_2PI)
        + 0.5 * np.exp(-LOG_2PI - 0.5 * np.sum((x - np.array([20.0, 0.0])) ** 2)))
    got = m.score(x[None, :]).log_density[0]
    assert got == pytest.approx(direct, abs=1e-9)
    assert got == pytest.approx(np.log(0.5) - LOG_2PI, abs=1e-9)


def test_score_isotropic_gaussian():
    m = std_normal_2d()
    np.testing.assert_allclose(
        m.score(np.array([[3.0, -2.0]])).scores[0], [-3.0, 2.0], rtol=1e-14)


def test_score_zero_at_stationary_point():
    # symmetric two-component mixture: the origin is a critical point of log p
    m = GaussianMixture([0.5, 0.5], [[-1.0, 0.0], [1.0, 0.0]],
                        diag=[[0.5, 0.5], [0.5, 0.5]])
    np.testing.assert_allclose(m.score(np.zeros((1, 2))).scores[0], 0.0, atol=1e-14)


def test_score_matches_finite_differences(benchmark_mixture):
    rng = np.random.default_rng(10)
    pts = rng.uniform(-2.5, 2.5, size=(100, 2))
    scores = benchmark_mixture.score(pts).scores
    for x, s in zip(pts, scores):
        fd = finite_diff_gradient(
            lambda q: benchmark_mixture.score(q[None, :]).log_density[0], x)
        np.testing.assert_allclose(s, fd, atol=1e-6)


def test_component_permutation_invariance():
    rng = np.random.default_rng(11)
    w = [0.2, 0.5, 0.3]
    mu = [[0.0, 0.0], [1.0, -1.0], [-2.0, 0.5]]
    d = [[0.3, 0.4], [1.0, 0.7], [0.5, 0.5]]
    m1 = GaussianMixture(w, mu, diag=d)
    perm = [2, 0, 1]
    m2 = GaussianMixture([w[i] for i in perm], [mu[i] for i in perm],
                         diag=[d[i] for i in perm])
    pts = rng.normal(size=(20, 2))
    r1, r2 = m1.score(pts), m2.score(pts)
    np.testing.assert_allclose(r1.log_density, r2.log_density, rtol=1e-12)
    np.testing.assert_allclose(r1.scores, r2.scores, rtol=1e-12, atol=1e-13)


def test_full_covariance_matches_diag():
    w = [0.6, 0.4]
    mu = [[0.0, 1.0], [2.0, -1.0]]
    d = [[0.5, 0.25], [1.5, 0.75]]
    full = [np.diag(row).tolist() for row in d]
    m_diag = GaussianMixture(w, mu, diag=d)
    m_full = GaussianMixture(w, mu, covariances=full)
    pts = np.random.default_rng(12).normal(size=(10, 2))
    rd, rf = m_diag.score(pts), m_full.score(pts)
    np.testing.assert_allclose(rd.log_density, rf.log_density, rtol=1e-12)
    np.testing.assert_allclose(rd.scores, rf.scores, rtol=1e-12, atol=1e-14)


def test_full_covariance_score_finite_difference():
    cov = [[[0.5, 0.2], [0.2, 0.8]]]
    m = GaussianMixture([1.0], [[0.5, -0.5]], covariances=cov)
    x = np.array([0.3, 0.9])
    fd = finite_diff_gradient(lambda q: m.score(q[None, :]).log_density[0], x)
    np.testing.assert_allclose(m.score(x[None, :]).scores[0], fd, atol=1e-6)


def test_mixture_validation():
    with pytest.raises(DomainError):
        GaussianMixture([0.5, 0.6], [[0.0], [1.0]], diag=[[1.0], [1.0]])
    with pytest.raises(DomainError):
        GaussianMixture([1.0], [[0.0, 0.0]], diag=[[1.0, -1.0]])
    with pytest.raises(DomainError):
        GaussianMixture([1.0], [[0.0, 0.0]])
    with pytest.raises(DomainError):
        std_normal_2d().score(np.zeros((1, 3)))


def conditional_pair():
    m0 = GaussianMixture([1.0], [[-1.0, 0.0]], diag=[[0.4, 0.4]])
    m1 = GaussianMixture([1.0], [[1.0, 0.5]], diag=[[0.6, 0.3]])
    return ConditionalMixturePair(m0, m1)


def test_conditional_blend_boundaries_bit_match():
    pair = conditional_pair()
    pts = np.random.default_rng(13).normal(size=(8, 2))
    r0 = pair.score(pts, cond=np.zeros((8, 1)))
    ru = pair.mixture_0.score(pts)
    np.testing.assert_array_equal(r0.scores, ru.scores)
    np.testing.assert_array_equal(r0.log_density, ru.log_density)
    r1 = pair.score(pts, cond=np.ones((8, 1)))
    rv = pair.mixture_1.score(pts)
    np.testing.assert_array_equal(r1.scores, rv.scores)
    np.testing.assert_array_equal(r1.log_density, rv.log_density)


def test_conditional_blend_midpoint_finite_difference():
    pair = conditional_pair()
    x = np.array([0.2, -0.1])

    def blended_logp(q):
        return pair.score(q[None, :], cond=np.array([[0.5]])).log_density[0]

    fd = finite_diff_gradient(blended_logp, x)
    got = pair.score(x[None, :], cond=np.array([[0.5]])).scores[0]
    np.testing.assert_allclose(got, fd, atol=1e-6)


def test_conditional_z_range_enforced():
    pair = conditional_pair()
    with pytest.raises(DomainError):
        pair.score(np.zeros((1, 2)), cond=np.array([[1.5]]))
    with pytest.raises(DomainError):
        pair.score(np.zeros((1, 2)))


def test_schedule_examples():
    s = ConditioningSchedule(np.array([0.0, 0.0]), np.array([2.0, 4.0]))
    np.testing.assert_array_equal(s.condition_at(0.0), [0.0, 0.0])
    np.testing.assert_array_equal(s.condition_at(1.0), [2.0, 4.0])
    np.testing.assert_allclose(s.condition_at(0.25), [0.5, 1.0])
    with pytest.raises(DomainError):
        s.condition_at(1.5)
    batch = s.condition_at(np.array([0.0, 0.5, 1.0]))
    np.testing.assert_allclose(batch, [[0.0, 0.0], [1.0, 2.0], [2.0, 4.0]])


def gaussian_grid(spacing=0.05, half=3.0):
    n = int(round(2 * half / spacing)) + 1
    xs = np.linspace(-half, half, n)
    XX, YY = np.meshgrid(xs, xs, indexing="ij")
    vals = -0.5 * (XX ** 2 + YY ** 2) - LOG_2PI
    return GridField(origin=[-half, -half], spacing=[spacing, spacing], values=vals)


def test_grid_reproduces_nodes():
    g = gaussian_grid(spacing=0.5)
    got = g.score(np.array([[1.0, -1.5]]))
    assert got.log_density[0] == pytest.approx(-0.5 * (1.0 + 2.25) - LOG_2PI, abs=1e-12)


def test_grid_constant_field_zero_score():
    g = GridField([0.0, 0.0], [1.0, 1.0], np.full((5, 5), 2.5))
    res = g.score(np.array([[1.3, 2.7], [2.0, 2.0]]))
    np.testing.assert_allclose(res.scores, 0.0, atol=1e-12)
    np.testing.assert_allclose(res.log_density, 2.5)


def test_grid_accuracy_against_analytic():
    g = gaussian_grid(spacing=0.05)
    rng = np.random.default_rng(14)
    pts = rng.uniform(-2.0, 2.0, size=(100, 2))
    res = g.score(pts)
    exact_logp = -0.5 * np.sum(pts ** 2, axis=1) - LOG_2PI
    assert np.max(np.abs(res.log_density - exact_logp)) <= 1e-3
    assert np.max(np.abs(res.scores - (-pts))) <= 5e-2


def test_grid_out_of_bounds_errors():
    g = gaussian_grid(spacing=0.5)
    with pytest.raises(DomainError):
        g.score(np.array([[3.4, 0.0]]))   # inside box but within the margin cell
    with pytest.raises(DomainError):
        g.score(np.array([[5.0, 0.0]]))


def test_grid_validation():
    with pytest.raises(DomainError):
        GridField([0.0], [1.0], np.zeros(4))
    with pytest.raises(DomainError):
        GridField([0.0, 0.0], [1.0, -1.0], np.zeros((3, 3)))


def test_uniform_provider():
    u = UniformDensity(3)
    res = u.score(np.ones((4, 3)))
    np.testing.assert_array_equal(res.scores, np.zeros((4, 3)))
    np.testing.assert_array_equal(res.log_density, np.zeros(4))
