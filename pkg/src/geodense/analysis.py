"""Geodesic analysis of imported trajectories: baselines and norm profiles.

Given a set of trajectories, each path is compared against reference
variants: a re-optimized version (BVP solve between the path's endpoints),
sinusoidally perturbed versions at several amplitudes, and a smoothed
version. The comparison metric is the mean norm of the path-length
functional derivative along each (constant-speed reparameterized) path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import make_smoothing_spline

from .density import ScoreProvider, conditions_for
from .errors import DomainError, GeodenseError
from .pathcalc import (DIRECTION, DiscretePath, fit_spline, functional_derivative,
                       reparameterize_constant_speed)
from .solver_bvp import BvpConfig, solve_bvp

LITERAL = "literal"
ENDPOINT_PRESERVING = "endpoint_preserving"

ORIGINAL = "original"
OPTIMIZED = "optimized"
SMOOTHED = "smoothed"


@dataclass
class TrajectorySet:
    """Named trajectories sharing one ambient space."""

    paths: dict[str, DiscretePath]

    def __post_init__(self):
        if not self.paths:
            raise DomainError("trajectory set is empty")
        spaces = {(p.space.kind, p.space.dim) for p in self.paths.values()}
        if len(spaces) > 1:
            raise DomainError(f"trajectories mix spaces: {sorted(spaces)}")

    @property
    def space(self):
        return next(iter(self.paths.values())).space

    def items(self):
        return self.paths.items()


def perturb_path(path: DiscretePath, delta: float,
                 mode: str = ENDPOINT_PRESERVING, seed: int = 0) -> DiscretePath:
    """Sinusoidal perturbation of a path.

    Literal mode applies the printed formula coordinatewise,
    x_j <- x_j + delta * sin(pi * x_j), which moves endpoints too.
    Endpoint-preserving mode displaces along a fixed random unit vector u with
    envelope delta * sin(pi * t), vanishing at both endpoints; u is drawn
    deterministically from the seed. Sphere paths are re-projected.
    """
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    pts = path.points.copy()
    if delta > 0:
        if mode == LITERAL:
            pts = pts + delta * np.sin(np.pi * pts)
        elif mode == ENDPOINT_PRESERVING:
            rng = np.random.default_rng(seed)
            u = rng.normal(size=path.dim)
            u /= np.linalg.norm(u)
            envelope = delta * np.sin(np.pi * path.ts)
            pts = pts + envelope[:, None] * u[None, :]
        else:
            raise DomainError(f"unknown perturbation mode {mode!r}")
        if path.space.is_sphere:
            pts = path.space.project_point(pts)
    return DiscretePath(path.space, path.ts.copy(), pts)


def smooth_path(path: DiscretePath, smoothing: float = 0.9999) -> DiscretePath:
    """Per-coordinate cubic smoothing spline evaluated back at the sample knots.

    The smoothing factor s in (0, 1] trades data fidelity against curvature:
    the fit minimizes sum of squared residuals plus lam * integral of squared
    second derivative with lam = (1 - s) / s, so s = 1 reproduces the samples
    exactly and s -> 0 tends to the least-squares line. Endpoints are pinned
    to the originals; sphere paths are re-projected.
    """
    if not 0.0 < smoothing <= 1.0:
        raise DomainError("smoothing factor must lie in (0, 1]")
    if path.n_samples < 4:
        raise DomainError("smoothing needs at least 4 samples")
    if smoothing == 1.0:
        return path.copy()
    lam = (1.0 - smoothing) / smoothing
    pts = np.empty_like(path.points)
    if lam > 1e8:
        # the lam -> infinity limit is the least-squares line; the banded
        # solve loses conditioning well before that, so take the limit directly
        for j in range(path.dim):
            coef = np.polynomial.polynomial.polyfit(path.ts, path.points[:, j], 1)
            pts[:, j] = np.polynomial.polynomial.polyval(path.ts, coef)
    else:
        for j in range(path.dim):
            spl = make_smoothing_spline(path.ts, path.points[:, j], lam=lam)
            pts[:, j] = spl(path.ts)
    pts[0] = path.points[0]
    pts[-1] = path.points[-1]
    if path.space.is_sphere:
        pts = path.space.project_point(pts)
        pts[0] = path.points[0]
        pts[-1] = path.points[-1]
    return DiscretePath(path.space, path.ts.copy(), pts)


def gradient_norm_profile(path: DiscretePath, provider: ScoreProvider,
                          schedule=None, n: int = 256, mode: str = DIRECTION,
                          beta: float = 1.0, reparameterize: bool = True) -> np.ndarray:
    """Norm of the path-length functional derivative at n+1 uniform parameters.

    The derivative assumes constant speed, so the path is reparameterized
    first (default on).
    """
    eval_path = reparameterize_constant_speed(path) if reparameterize else path
    sp = fit_spline(eval_path)
    tq = np.linspace(0.0, 1.0, n + 1)
    xq, vq, aq = sp(tq), sp(tq, 1), sp(tq, 2)
    res = provider.score(xq, cond=conditions_for(schedule, tq))
    log_density = res.log_density if provider.has_log_density else None
    deriv = functional_derivative(beta * res.scores, vq, aq,
                                  log_density=log_density, mode=mode)
    return np.linalg.norm(deriv, axis=-1)


@dataclass
class ComparisonReport:
    """Mean derivative norms per path and variant, plus dataset aggregates.

    per_path[name][variant] is the mean norm or None when that variant
    failed; dataset_means holds the arithmetic mean over the paths for which
    the variant succeeded.
    """

    per_path: dict[str, dict[str, float | None]] = field(default_factory=dict)
    dataset_means: dict[str, float] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)

    def aggregate(self):
        variants: dict[str, list[float]] = {}
        for stats in self.per_path.values():
            for variant, value in stats.items():
                if value is not None:
                    variants.setdefault(variant, []).append(value)
        self.dataset_means = {v: float(np.mean(vals)) for v, vals in variants.items()}

    def to_dict(self) -> dict:
        return {
            "per_path": self.per_path,
            "dataset_means": self.dataset_means,
            "failures": self.failures,
        }

    def rows(self):
        for name, stats in sorted(self.per_path.items()):
            for variant, value in sorted(stats.items()):
                yield name, variant, value


def compare_trajectories(trajectories: TrajectorySet, provider: ScoreProvider,
                         schedule=None, deltas=(0.01, 0.05, 0.1),
                         bvp_config: BvpConfig | None = None,
                         smoothing: float = 0.9999, n: int = 256,
                         mode: str = DIRECTION, beta: float = 1.0,
                         seed: int = 0,
                         include_optimized: bool = True,
                         include_smoothed: bool = True) -> ComparisonReport:
    """Mean derivative norm of every path and its variants.

    Variants per path: the original, the re-optimized path (a fresh BVP solve
    between the path's endpoints), one perturbed copy per delta, and the
    smoothed copy. A failing variant is recorded and skipped; aggregation
    continues over the remaining paths.
    """
    report = ComparisonReport()

    def mean_norm(p):
        return float(np.mean(gradient_norm_profile(
            p, provider, schedule, n=n, mode=mode, beta=beta)))

    for name, path in trajectories.items():
        stats: dict[str, float | None] = {}
        try:
            stats[ORIGINAL] = mean_norm(path)
        except GeodenseError as exc:
            stats[ORIGINAL] = None
            report.failures[f"{name}:{ORIGINAL}"] = str(exc)
        if include_optimized:
            try:
                optimized, _ = solve_bvp(path.space, path.points[0], path.points[-1],
                                         provider, schedule, bvp_config)
                stats[OPTIMIZED] = mean_norm(optimized)
            except GeodenseError as exc:
                stats[OPTIMIZED] = None
                report.failures[f"{name}:{OPTIMIZED}"] = str(exc)
        for delta in deltas:
            key = f"perturbed_{delta:g}"
            try:
                stats[key] = mean_norm(perturb_path(path, delta, seed=seed))
            except GeodenseError as exc:
                stats[key] = None
                report.failures[f"{name}:{key}"] = str(exc)
        if include_smoothed:
            try:
                stats[SMOOTHED] = mean_norm(smooth_path(path, smoothing))
            except GeodenseError as exc:
                stats[SMOOTHED] = None
                report.failures[f"{name}:{SMOOTHED}"] = str(exc)
        report.per_path[name] = stats
    report.aggregate()
    return report
