"""Gaussian-mixture log-density and score, self-contained.

Implements the same math as in-process clients (log-sum-exp over component
log-pdfs, responsibility-weighted score) so that numeric parity across the
wire holds to near machine precision.
"""

from __future__ import annotations

import json

import numpy as np

_LOG_2PI = float(np.log(2.0 * np.pi))


class Mixture:
    """Gaussian mixture with diagonal or full covariances."""

    def __init__(self, weights, means, covariances=None, diag=None):
        self.weights = np.asarray(weights, dtype=float)
        self.means = np.asarray(means, dtype=float)
        if self.means.ndim != 2:
            raise ValueError("means must be a (k, d) array")
        k, d = self.means.shape
        if self.weights.shape != (k,) or np.any(self.weights <= 0):
            raise ValueError("weights must be k positive reals")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        if (covariances is None) == (diag is None):
            raise ValueError("provide exactly one of covariances or diag")
        self.dim = d
        if diag is not None:
            self._diag = np.asarray(diag, dtype=float)
            if self._diag.shape != (k, d) or np.any(self._diag <= 0):
                raise ValueError("diag covariances must be (k, d), positive")
            self._chol = None
            self._logdet = np.log(self._diag).sum(axis=1)
        else:
            cov = np.asarray(covariances, dtype=float)
            if cov.shape != (k, d, d):
                raise ValueError("covariances must be a (k, d, d) array")
            self._diag = None
            self._chol = np.linalg.cholesky(cov)
            self._logdet = 2.0 * np.log(
                np.diagonal(self._chol, axis1=1, axis2=2)).sum(axis=1)

    def score_and_log_density(self, points: np.ndarray):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(f"points must be (n, {self.dim})")
        diff = self.means[None, :, :] - pts[:, None, :]
        if self._diag is not None:
            solved = diff / self._diag[None, :, :]
            maha = np.sum(diff * solved, axis=2)
        else:
            solved = np.empty_like(diff)
            for i in range(len(self.weights)):
                y = np.linalg.solve(self._chol[i], diff[:, i, :].T)
                solved[:, i, :] = np.linalg.solve(self._chol[i].T, y).T
            maha = np.sum(diff * solved, axis=2)
        log_pdf = -0.5 * (maha + self.dim * _LOG_2PI + self._logdet[None, :])
        logw = np.log(self.weights)[None, :] + log_pdf
        m = logw.max(axis=1, keepdims=True)
        expw = np.exp(logw - m)
        norm = expw.sum(axis=1, keepdims=True)
        log_density = (m + np.log(norm))[:, 0]
        resp = expw / norm
        scores = np.einsum("nk,nkd->nd", resp, solved)
        return scores, log_density


def load_mixture(filename: str) -> Mixture:
    """Load the shared mixture JSON format.

    {"weights": [...], "means": [[...], ...],
     "covariances": [[[...]], ...] | {"diag": [[...], ...]}}
    """
    with open(filename, encoding="utf-8") as fh:
        spec = json.load(fh)
    weights = spec["weights"]
    means = spec["means"]
    cov = spec["covariances"]
    if isinstance(cov, dict) and "diag" in cov:
        return Mixture(weights, means, diag=cov["diag"])
    return Mixture(weights, means, covariances=cov)
