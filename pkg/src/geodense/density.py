"""Score providers: everything that answers log-density and score queries.

A provider exposes

    dim              ambient dimension d
    cond_dim         dimension of the condition vector, or None if unconditioned
    has_log_density  whether ScoreResult.log_density is populated
    score(points, cond=None, t=None) -> ScoreResult

where points is (n, d), cond is (n, c) or None and t is (n,) or None. The
t batch is an opaque passthrough for external providers (e.g. a diffusion
timestep) and is ignored by the analytic providers here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, DomainError

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class ScoreResult:
    """Batched provider answer: scores (n, d) and optional log_density (n,)."""

    scores: np.ndarray
    log_density: np.ndarray | None = None


def _check_points(points: np.ndarray, dim: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise DomainError(f"expected points of dimension {dim}, got shape {pts.shape}")
    return pts


class ScoreProvider:
    """Minimal base class; concrete providers override score()."""

    dim: int
    cond_dim: int | None = None
    has_log_density: bool = False

    def score(self, points, cond=None, t=None) -> ScoreResult:
        raise NotImplementedError

    def log_density(self, points, cond=None) -> np.ndarray:
        """Convenience accessor; raises if the capability is missing."""
        if not self.has_log_density:
            raise CapabilityError(f"{type(self).__name__} does not expose log-density")
        res = self.score(points, cond=cond)
        return res.log_density

    def close(self):
        pass


class UniformDensity(ScoreProvider):
    """Flat density: zero score everywhere, log-density identically 0."""

    has_log_density = True

    def __init__(self, dim: int):
        self.dim = int(dim)

    def score(self, points, cond=None, t=None) -> ScoreResult:
        pts = _check_points(points, self.dim)
        return ScoreResult(np.zeros_like(pts), np.zeros(len(pts)))


class GaussianMixture(ScoreProvider):
    """Gaussian mixture with full or diagonal covariances.

    Log-density is computed through log-sum-exp; the score is the
    responsibility-weighted sum of per-component gradients,
    sum_i r_i(x) Sigma_i^{-1} (mu_i - x), which equals the gradient of the
    log-density.
    """

    has_log_density = True

    def __init__(self, weights, means, covariances=None, diag=None):
        self.weights = np.asarray(weights, dtype=float)
        self.means = np.asarray(means, dtype=float)
        if self.means.ndim != 2:
            raise DomainError("means must be a (k, d) array")
        k, d = self.means.shape
        if self.weights.shape != (k,) or np.any(self.weights <= 0):
            raise DomainError("weights must be k positive reals")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise DomainError(f"weights must sum to 1, got {self.weights.sum()!r}")
        if (covariances is None) == (diag is None):
            raise DomainError("provide exactly one of covariances= or diag=")
        self.dim = d
        if diag is not None:
            self._diag = np.asarray(diag, dtype=float)
            if self._diag.shape != (k, d) or np.any(self._diag <= 0):
                raise DomainError("diag covariances must be (k, d) with positive entries")
            self._cov = None
            self._logdet = np.log(self._diag).sum(axis=1)
        else:
            self._cov = np.asarray(covariances, dtype=float)
            if self._cov.shape != (k, d, d):
                raise DomainError("covariances must be a (k, d, d) array")
            self._diag = None
            try:
                self._chol = np.linalg.cholesky(self._cov)
            except np.linalg.LinAlgError as exc:
                raise DomainError("every covariance must be SPD") from exc
            self._logdet = 2.0 * np.log(
                np.diagonal(self._chol, axis1=1, axis2=2)).sum(axis=1)

    @property
    def n_components(self) -> int:
        return len(self.weights)

    def _component_log_pdf_and_glinear(self, pts):
        """Per-component log N(x; mu_i, Sigma_i) and Sigma_i^{-1}(mu_i - x)."""
        diff = self.means[None, :, :] - pts[:, None, :]          # (n, k, d)
        if self._diag is not None:
            solved = diff / self._diag[None, :, :]
            maha = np.sum(diff * solved, axis=2)
        else:
            # solve Sigma z = diff via the cholesky factors, per component
            n = len(pts)
            solved = np.empty_like(diff)
            for i in range(self.n_components):
                y = np.linalg.solve(self._chol[i], diff[:, i, :].T)
                solved[:, i, :] = np.linalg.solve(self._chol[i].T, y).T
            maha = np.sum(diff * solved, axis=2)
        log_pdf = -0.5 * (maha + self.dim * _LOG_2PI + self._logdet[None, :])
        return log_pdf, solved

    def score(self, points, cond=None, t=None) -> ScoreResult:
        pts = _check_points(points, self.dim)
        log_pdf, glin = self._component_log_pdf_and_glinear(pts)
        logw = np.log(self.weights)[None, :] + log_pdf                # (n, k)
        m = logw.max(axis=1, keepdims=True)
        expw = np.exp(logw - m)
        norm = expw.sum(axis=1, keepdims=True)
        log_density = (m + np.log(norm))[:, 0]
        resp = expw / norm
        scores = np.einsum("nk,nkd->nd", resp, glin)
        return ScoreResult(scores, log_density)


class ConditionalMixturePair(ScoreProvider):
    """Condition-blended density p(x | z) = (1 - z) p0(x) + z p1(x), z in [0, 1].

    The condition is a length-1 vector; the blend is exact at the endpoints
    (z=0 and z=1 fall through to the unconditioned mixtures bit-for-bit).
    """

    has_log_density = True
    cond_dim = 1

    def __init__(self, mixture_0: GaussianMixture, mixture_1: GaussianMixture):
        if mixture_0.dim != mixture_1.dim:
            raise DomainError("both mixtures must share one dimension")
        self.mixture_0 = mixture_0
        self.mixture_1 = mixture_1
        self.dim = mixture_0.dim

    def score(self, points, cond=None, t=None) -> ScoreResult:
        pts = _check_points(points, self.dim)
        if cond is None:
            raise DomainError("ConditionalMixturePair requires a condition batch")
        z = np.asarray(cond, dtype=float)
        if z.size != len(pts):
            raise DomainError(
                f"condition batch of size {z.size} does not match {len(pts)} points")
        z = z.reshape(len(pts))
        if np.any(z < 0.0) or np.any(z > 1.0):
            raise DomainError("condition z must lie in [0, 1]")
        r0 = self.mixture_0.score(pts)
        r1 = self.mixture_1.score(pts)
        scores = np.empty_like(pts)
        log_density = np.empty(len(pts))
        at0 = z == 0.0
        at1 = z == 1.0
        mid = ~(at0 | at1)
        scores[at0] = r0.scores[at0]
        log_density[at0] = r0.log_density[at0]
        scores[at1] = r1.scores[at1]
        log_density[at1] = r1.log_density[at1]
        if np.any(mid):
            l0 = np.log1p(-z[mid]) + r0.log_density[mid]
            l1 = np.log(z[mid]) + r1.log_density[mid]
            m = np.maximum(l0, l1)
            e0 = np.exp(l0 - m)
            e1 = np.exp(l1 - m)
            log_density[mid] = m + np.log(e0 + e1)
            w0 = (e0 / (e0 + e1))[:, None]
            scores[mid] = w0 * r0.scores[mid] + (1.0 - w0) * r1.scores[mid]
        return ScoreResult(scores, log_density)


class GridField(ScoreProvider):
    """Log-density samples on a regular 2D or 3D grid.

    Queries are answered by multilinear interpolation; the score comes from
    central differences of the interpolated field with step = half the grid
    spacing, so accuracy is bounded by the spacing. Queries must stay one
    cell inside the bounding box; there is no extrapolation.
    """

    has_log_density = True

    def __init__(self, origin, spacing, values):
        self.origin = np.asarray(origin, dtype=float)
        self.spacing = np.asarray(spacing, dtype=float)
        self.values = np.asarray(values, dtype=float)
        d = self.values.ndim
        if d not in (2, 3):
            raise DomainError("grid values must be a 2D or 3D array")
        if self.origin.shape != (d,) or self.spacing.shape != (d,):
            raise DomainError("origin and spacing must match the grid rank")
        if np.any(self.spacing <= 0):
            raise DomainError("all spacings must be positive")
        if any(s < 2 for s in self.values.shape):
            raise DomainError("grid needs at least 2 samples per axis")
        self.dim = d

    def _interp(self, pts):
        frac = (pts - self.origin[None, :]) / self.spacing[None, :]
        shape = np.array(self.values.shape)
        if np.any(frac < -1e-12) or np.any(frac > shape[None, :] - 1 + 1e-12):
            raise DomainError("grid query outside the sampled box")
        idx = np.clip(frac.astype(int), 0, shape[None, :] - 2)
        f = frac - idx
        out = np.zeros(len(pts))
        for corner in range(2 ** self.dim):
            offs = [(corner >> ax) & 1 for ax in range(self.dim)]
            w = np.ones(len(pts))
            loc = []
            for ax, o in enumerate(offs):
                w *= f[:, ax] if o else (1.0 - f[:, ax])
                loc.append(idx[:, ax] + o)
            out += w * self.values[tuple(loc)]
        return out

    def score(self, points, cond=None, t=None) -> ScoreResult:
        pts = _check_points(points, self.dim)
        # central differences need one interior cell of clearance
        lo = self.origin + self.spacing
        hi = self.origin + self.spacing * (np.array(self.values.shape) - 2)
        if np.any(pts < lo[None, :] - 1e-12) or np.any(pts > hi[None, :] + 1e-12):
            raise DomainError("grid score query must stay one cell inside the box")
        log_density = self._interp(pts)
        scores = np.empty_like(pts)
        for ax in range(self.dim):
            h = 0.5 * self.spacing[ax]
            step = np.zeros(self.dim)
            step[ax] = h
            scores[:, ax] = (self._interp(pts + step) - self._interp(pts - step)) / (2 * h)
        return ScoreResult(scores, log_density)


@dataclass(frozen=True)
class ConditioningSchedule:
    """Condition vector along the path: linear in t between z0 and z1."""

    z0: np.ndarray
    z1: np.ndarray

    def __post_init__(self):
        z0 = np.asarray(self.z0, dtype=float)
        z1 = np.asarray(self.z1, dtype=float)
        if z0.shape != z1.shape or z0.ndim != 1:
            raise DomainError("z0 and z1 must be vectors of equal dimension")
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "z1", z1)

    @property
    def cond_dim(self) -> int:
        return len(self.z0)

    def condition_at(self, t) -> np.ndarray:
        """(1 - t) z0 + t z1; t outside [0, 1] is a contract violation."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0) or np.any(t > 1.0):
            raise DomainError("schedule parameter t must lie in [0, 1]")
        if t.ndim == 0:
            return (1.0 - t) * self.z0 + t * self.z1
        return (1.0 - t)[:, None] * self.z0[None, :] + t[:, None] * self.z1[None, :]


def conditions_for(schedule: ConditioningSchedule | None, t) -> np.ndarray | None:
    """Batch of condition vectors for a provider call, or None without a schedule."""
    if schedule is None:
        return None
    return schedule.condition_at(t)
