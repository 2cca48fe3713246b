"""Boundary value problem solver: projected gradient descent on control points.

The path is represented by control points joined piecewise by the space's
geodesic interpolant (segments or great-circle arcs); velocities and
accelerations for the descent direction come from a natural cubic spline fit
to the control points and endpoints. Optimization is coarse-to-fine: the
interior control-point count steps through bisection levels, inserting
geodesic midpoints, while the learning rate follows the configured schedule.

Each iteration reads all spline quantities before writing any point
(simultaneous updates), so runs are deterministic and parallelizable. The
update at each control point is projected onto the orthogonal complement of
the local velocity (a pure reparameterization direction along the curve) and,
on the sphere, of the radial direction; endpoints never move.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .density import ScoreProvider, conditions_for
from .errors import AntipodalError, ConfigError, DomainError, ProviderError
from .geometry import (AmbientSpace, geodesic_interpolate, retract,
                       slerp_velocity, sphere_radius_from_endpoints)
from .pathcalc import DIRECTION, EXACT, DiscretePath, fit_spline, functional_derivative
from .quadrature import cumulative_trapezoid

LINEAR = "linear"
CONSTANT = "constant"


@dataclass
class BvpConfig:
    """Solver hyperparameters; defaults follow the reference optimization recipe."""

    steps: int = 400
    lr0: float = 0.1
    lr_schedule: str = LINEAR
    bisection_levels: tuple[int, ...] = (1, 3, 7, 15)
    refine_every: int = 100
    beta: float = 1.0
    derivative_mode: str = DIRECTION
    quad_n: int = 1024
    convergence_tol: float | None = None
    snapshot_every: int = 0          # 0: snapshot at refinements and the end only

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.lr0 <= 0:
            raise ConfigError("lr0 must be positive")
        if self.lr_schedule not in (LINEAR, CONSTANT):
            raise ConfigError(f"unknown lr schedule {self.lr_schedule!r}")
        if self.refine_every < 1:
            raise ConfigError("refine_every must be >= 1")
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        if self.derivative_mode not in (DIRECTION, EXACT):
            raise ConfigError(f"unknown derivative mode {self.derivative_mode!r}")
        levels = tuple(int(k) for k in self.bisection_levels)
        if not levels:
            raise ConfigError("at least one bisection level is required")
        for prev, cur in zip(levels, levels[1:]):
            if cur != 2 * prev + 1:
                raise ConfigError(
                    f"bisection levels must each be 2*previous + 1, got {levels}")
        if self.steps < self.refine_every * (len(levels) - 1):
            raise ConfigError(
                "steps must cover refine_every * (number of levels - 1)")
        self.bisection_levels = levels

    def learning_rate(self, i: int) -> float:
        if self.lr_schedule == CONSTANT:
            return self.lr0
        return self.lr0 * (1.0 - i / self.steps)

    def level_at(self, i: int) -> int:
        idx = min(i // self.refine_every, len(self.bisection_levels) - 1)
        return self.bisection_levels[idx]


@dataclass
class BvpTrace:
    """Per-iteration solver record plus optional full-path snapshots."""

    iterations: list[int] = field(default_factory=list)
    lr: list[float] = field(default_factory=list)
    k: list[int] = field(default_factory=list)
    mean_grad_norm: list[float] = field(default_factory=list)
    rel_distance: list[float] = field(default_factory=list)
    snapshots: list[tuple[int, DiscretePath]] = field(default_factory=list)

    def record(self, i, lr, k, grad_norm, rel_distance):
        self.iterations.append(int(i))
        self.lr.append(float(lr))
        self.k.append(int(k))
        self.mean_grad_norm.append(float(grad_norm))
        self.rel_distance.append(float(rel_distance))

    def rows(self):
        return zip(self.iterations, self.lr, self.k,
                   self.mean_grad_norm, self.rel_distance)


def init_path(space: AmbientSpace, a: np.ndarray, b: np.ndarray, k: int) -> DiscretePath:
    """k interior control points at uniform t on the geodesic between a and b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.array_equal(a, b):
        raise DomainError("endpoints coincide; the path is degenerate")
    ts = np.linspace(0.0, 1.0, k + 2)
    pts = np.stack([geodesic_interpolate(space, a, b, float(t)) for t in ts])
    pts[0], pts[-1] = a, b
    return DiscretePath(space, ts, pts)


def bisect_path(path: DiscretePath) -> DiscretePath:
    """Insert the geodesic midpoint of every adjacent sample pair (k -> 2k + 1)."""
    ts, pts = path.ts, path.points
    new_ts = np.empty(2 * len(ts) - 1)
    new_pts = np.empty((2 * len(ts) - 1, path.dim))
    new_ts[0::2] = ts
    new_pts[0::2] = pts
    new_ts[1::2] = 0.5 * (ts[:-1] + ts[1:])
    for i in range(len(ts) - 1):
        new_pts[2 * i + 1] = geodesic_interpolate(path.space, pts[i], pts[i + 1], 0.5)
    return DiscretePath(path.space, new_ts, new_pts)


def _gauge_filtered_update(space, points, velocities, deriv):
    """Project the descent direction off the radial and velocity directions.

    The functional derivative of a constant-speed path is orthogonal to the
    velocity; any velocity-parallel component of the discrete estimate only
    slides control points along the curve (a reparameterization, not a shape
    change) and is removed. On the sphere the radial component is removed
    first (tangent-space projection), which together with the velocity filter
    makes exact geodesics exact fixed points of the iteration.
    """
    g = deriv
    if space.is_sphere:
        xhat = points / np.linalg.norm(points, axis=-1, keepdims=True)
        g = g - np.sum(g * xhat, axis=-1, keepdims=True) * xhat
        v_t = velocities - np.sum(velocities * xhat, axis=-1, keepdims=True) * xhat
    else:
        v_t = velocities
    vn = np.linalg.norm(v_t, axis=-1, keepdims=True)
    ok = vn[:, 0] > 0
    vhat = np.where(vn > 0, v_t / np.where(vn > 0, vn, 1.0), 0.0)
    g = g - np.sum(g * vhat, axis=-1, keepdims=True) * vhat * ok[:, None]
    return g


def bvp_step(path: DiscretePath, provider: ScoreProvider, schedule,
             config: BvpConfig, lr: float) -> tuple[DiscretePath, float]:
    """One simultaneous descent step over all interior control points.

    Returns the updated path and the mean norm of the projected update
    direction over the interior points. Endpoints are returned bit-identical.
    """
    sp = fit_spline(path)
    ts = path.ts
    pts = path.points
    vel = sp(ts, 1)
    acc = sp(ts, 2)
    res = provider.score(pts, cond=conditions_for(schedule, ts))
    scores = config.beta * res.scores
    log_density = res.log_density if provider.has_log_density else None
    deriv = functional_derivative(scores, vel, acc, log_density=log_density,
                                  mode=config.derivative_mode)
    g = _gauge_filtered_update(path.space, pts, vel, deriv)
    new_pts = pts.copy()
    interior = slice(1, len(ts) - 1)
    new_pts[interior] = retract(path.space, pts[interior], lr * g[interior])
    mean_norm = float(np.linalg.norm(g[interior], axis=-1).mean()) if path.interior_count else 0.0
    return DiscretePath(path.space, ts, new_pts), mean_norm


def interpolant_rel_distance(path: DiscretePath, provider: ScoreProvider,
                             schedule=None, n: int = 1024, beta: float = 1.0) -> float:
    """Relative geodesic distance of the piecewise-geodesic interpolant.

    Positions and velocities are taken from the control-point interpolant
    itself (segments or great-circle arcs), not the spline, so the measure is
    invariant under midpoint insertion. Used for the per-iteration trace.
    """
    ts, pts = path.ts, path.points
    tq = np.linspace(0.0, 1.0, n + 1)
    seg = np.clip(np.searchsorted(ts, tq, side="right") - 1, 0, len(ts) - 2)
    xq = np.empty((n + 1, path.dim))
    vq = np.empty_like(xq)
    dt = np.diff(ts)
    for i in range(len(ts) - 1):
        mask = seg == i
        if not np.any(mask):
            continue
        u = (tq[mask] - ts[i]) / dt[i]
        xq[mask] = geodesic_interpolate(path.space, pts[i], pts[i + 1], u)
        vq[mask] = slerp_velocity(path.space, pts[i], pts[i + 1], u) / dt[i]
    res = provider.score(xq, cond=conditions_for(schedule, tq))
    f = beta * np.sum(vq * res.scores, axis=-1)
    rel_log_p = cumulative_trapezoid(f, 1.0 / n)
    integrand = np.linalg.norm(vq, axis=-1) * np.exp(-rel_log_p)
    return float(cumulative_trapezoid(integrand, 1.0 / n)[-1])


def solve_bvp(space: AmbientSpace, a: np.ndarray, b: np.ndarray,
              provider: ScoreProvider, schedule=None,
              config: BvpConfig | None = None) -> tuple[DiscretePath, BvpTrace]:
    """Run the coarse-to-fine BVP optimization between fixed endpoints.

    The path starts as the geodesic of the uniform metric (straight segment or
    great circle) with the first level's control-point count; every
    refine_every iterations the point count advances to the next level by
    geodesic-midpoint insertion. Stops early only when convergence_tol is set
    and the mean update norm falls below it.
    """
    config = config or BvpConfig()
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if space.is_sphere:
        # the sphere is defined by the input points; radius from the start point
        radius = sphere_radius_from_endpoints(a, b)
        if abs(radius - space.radius) > 1e-9 * space.radius:
            raise DomainError(
                f"endpoint norm {radius:.6g} does not match the sphere radius "
                f"{space.radius:.6g}")
        cos_th = np.clip(np.dot(a, b) / (radius * np.linalg.norm(b)), -1.0, 1.0)
        if float(np.arccos(cos_th)) > np.pi - 1e-6:
            raise AntipodalError("antipodal endpoints; perturb one endpoint")
    path = init_path(space, a, b, config.bisection_levels[0])
    trace = BvpTrace()
    trace.snapshots.append((0, path.copy()))
    for i in range(config.steps):
        want = config.level_at(i)
        refined = False
        while path.interior_count < want:
            path = bisect_path(path)
            refined = True
        if refined and config.snapshot_every == 0:
            trace.snapshots.append((i, path.copy()))
        lr = config.learning_rate(i)
        try:
            path, mean_norm = bvp_step(path, provider, schedule, config, lr)
            rel_dist = interpolant_rel_distance(path, provider, schedule,
                                                config.quad_n, config.beta)
        except ProviderError as exc:
            exc.partial_trace = trace
            raise
        trace.record(i, lr, path.interior_count, mean_norm, rel_dist)
        if config.snapshot_every and (i + 1) % config.snapshot_every == 0:
            trace.snapshots.append((i, path.copy()))
        if config.convergence_tol is not None and mean_norm < config.convergence_tol:
            break
    trace.snapshots.append((trace.iterations[-1], path.copy()))
    return path, trace
