import numpy as np
import pytest

from geodense.errors import DomainError
from geodense.quadrature import (cumulative_integral, cumulative_simpson,
                                 cumulative_trapezoid)


def test_trapezoid_matches_written_form():
    rng = np.random.default_rng(0)
    n = 16
    f = rng.normal(size=n + 1)
    h = 1.0 / n
    got = cumulative_trapezoid(f, h)
    assert got[0] == 0.0
    for i in range(1, n + 1):
        direct = h * (0.5 * f[0] + f[1:i].sum() + 0.5 * f[i])
        assert got[i] == pytest.approx(direct, rel=1e-14)


def test_simpson_exact_for_quadratics():
    n = 10
    t = np.linspace(0.0, 1.0, n + 1)
    f = 3.0 * t ** 2 - 2.0 * t + 0.5
    exact = t ** 3 - t ** 2 + 0.5 * t
    got = cumulative_simpson(f, 1.0 / n)
    np.testing.assert_allclose(got, exact, atol=1e-14)


def test_simpson_beats_trapezoid_on_smooth_integrand():
    n = 100
    t = np.linspace(0.0, 1.0, n + 1)
    f = np.exp(np.sin(3.0 * t))
    dense_t = np.linspace(0.0, 1.0, 2 ** 16 + 1)
    exact = np.trapezoid(np.exp(np.sin(3.0 * dense_t)), dense_t)
    err_t = abs(cumulative_trapezoid(f, 1.0 / n)[-1] - exact)
    err_s = abs(cumulative_simpson(f, 1.0 / n)[-1] - exact)
    assert err_s < err_t


def test_trapezoid_second_order_convergence():
    def value(n):
        t = np.linspace(0.0, 1.0, n + 1)
        return cumulative_trapezoid(np.exp(t), 1.0 / n)[-1]

    exact = np.e - 1.0
    ratios = []
    for n in (64, 128, 256):
        ratios.append(abs(value(n) - exact) / abs(value(2 * n) - exact))
    assert all(3.5 <= r <= 4.5 for r in ratios)


def test_simpson_parity_enforced():
    with pytest.raises(DomainError):
        cumulative_simpson(np.zeros(4), 0.25)   # 3 intervals
    with pytest.raises(DomainError):
        cumulative_integral(np.zeros(2), 1.0, rule="simpson")
    with pytest.raises(DomainError):
        cumulative_integral(np.zeros(3), 0.5, rule="gauss")
