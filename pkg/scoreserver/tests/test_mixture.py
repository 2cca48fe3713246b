import json

import numpy as np
import pytest

from scoreserver.mixture import Mixture, load_mixture

LOG_2PI = np.log(2.0 * np.pi)


def test_standard_normal_values():
    m = Mixture([1.0], [[0.0, 0.0]], diag=[[1.0, 1.0]])
    scores, logp = m.score_and_log_density(np.array([[0.0, 0.0], [2.0, 0.0]]))
    assert logp[0] == pytest.approx(-LOG_2PI, abs=1e-14)
    assert logp[1] == pytest.approx(-LOG_2PI - 2.0, abs=1e-14)
    np.testing.assert_allclose(scores[1], [-2.0, 0.0], atol=1e-14)


def test_score_is_gradient_of_log_density():
    m = Mixture([0.3, 0.7], [[-1.0, 0.5], [1.0, -0.5]],
                diag=[[0.5, 0.8], [0.4, 0.6]])
    rng = np.random.default_rng(0)
    h = 1e-5
    for x in rng.normal(size=(50, 2)):
        s, _ = m.score_and_log_density(x[None])
        fd = np.zeros(2)
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            _, lp_p = m.score_and_log_density((x + e)[None])
            _, lp_m = m.score_and_log_density((x - e)[None])
            fd[j] = (lp_p[0] - lp_m[0]) / (2.0 * h)
        np.testing.assert_allclose(s[0], fd, atol=1e-6)


def test_full_covariance_supported():
    m = Mixture([1.0], [[0.0, 0.0]], covariances=[[[1.0, 0.3], [0.3, 1.0]]])
    _, logp = m.score_and_log_density(np.zeros((1, 2)))
    expected = -LOG_2PI - 0.5 * np.log(1.0 - 0.09)
    assert logp[0] == pytest.approx(expected, abs=1e-12)


def test_validation():
    with pytest.raises(ValueError):
        Mixture([0.5, 0.6], [[0.0], [1.0]], diag=[[1.0], [1.0]])
    with pytest.raises(ValueError):
        Mixture([1.0], [[0.0, 0.0]], diag=[[1.0, 0.0]])
    with pytest.raises(ValueError):
        Mixture([1.0], [[0.0, 0.0]])


def test_load_mixture_formats(tmp_path):
    f = tmp_path / "m.json"
    f.write_text(json.dumps({
        "weights": [1.0], "means": [[0.0, 0.0]],
        "covariances": {"diag": [[1.0, 1.0]]}}))
    assert load_mixture(str(f)).dim == 2
    f.write_text(json.dumps({
        "weights": [1.0], "means": [[0.0, 0.0]],
        "covariances": [[[1.0, 0.0], [0.0, 1.0]]]}))
    assert load_mixture(str(f)).dim == 2
