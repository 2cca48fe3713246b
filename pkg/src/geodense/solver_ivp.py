"""Initial value problem solver: RK4 integration of the projected geodesic ODE.

The covariant acceleration is

    a = -||v||² (I - x̂ x̂ᵀ)(I - v̂ v̂ᵀ) ∇log p(x)      (sphere)
    a = -||v||²              (I - v̂ v̂ᵀ) ∇log p(x)      (flat space)

with ∇log p = beta * provider score. The integrator advances the coupled
first-order system (x, v) with one classical RK4 step of size 1/n per
iteration, re-evaluating the right-hand side at every substage. On the sphere
the integrated field additionally carries the centripetal constraint term
-(||v||²/||x||²) x, which is what keeps the ambient-coordinate flow on the
sphere; the position is renormalized and the velocity re-projected to the new
tangent space after each step to absorb the residual drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .density import ScoreProvider, conditions_for
from .errors import ConfigError, DomainError, ProviderError, ZeroVelocityError
from .geometry import AmbientSpace, project_to_tangent
from .pathcalc import DiscretePath


@dataclass
class IvpConfig:
    steps: int = 200
    beta: float = 1.0
    speed: float = 1.0      # initial velocity magnitude used by init_velocity
    record_every: int = 1

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        if self.speed <= 0:
            raise ConfigError("speed must be positive")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")


@dataclass
class IvpState:
    """Integration snapshot: position, velocity and path parameter."""

    x: np.ndarray
    v: np.ndarray
    t: float


@dataclass
class IvpSummary:
    """Per-run diagnostics emitted alongside the trajectory."""

    endpoint: np.ndarray
    speed_drift: float
    accel_norms: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "endpoint": self.endpoint.tolist(),
            "speed_drift": self.speed_drift,
            "accel_norms": self.accel_norms,
        }


def init_velocity(space: AmbientSpace, x: np.ndarray, direction: np.ndarray,
                  speed: float) -> np.ndarray:
    """Tangent vector at x along the projected direction, scaled to the speed."""
    if speed <= 0:
        raise DomainError("speed must be positive")
    direction = np.asarray(direction, dtype=float)
    tangent = project_to_tangent(space, np.asarray(x, dtype=float), direction)
    norm = np.linalg.norm(tangent)
    if norm == 0.0:
        raise ZeroVelocityError(
            "direction is parallel to the base point; nothing tangent remains")
    return (speed / norm) * tangent


def ivp_rhs(space: AmbientSpace, x: np.ndarray, v: np.ndarray,
            provider: ScoreProvider, schedule=None, beta: float = 1.0,
            t: float = 0.0) -> np.ndarray:
    """Covariant geodesic acceleration at (x, v); orthogonal to v (and x on the sphere)."""
    vn2 = float(v @ v)
    if vn2 == 0.0:
        raise ZeroVelocityError("the geodesic ODE needs nonzero velocity")
    cond = conditions_for(schedule, np.array([t]))
    s = beta * provider.score(x[None, :], cond=cond).scores[0]
    vhat = v / np.sqrt(vn2)
    s = s - (s @ vhat) * vhat
    if space.is_sphere:
        xhat = x / np.linalg.norm(x)
        s = s - (s @ xhat) * xhat
    return -vn2 * s


def _field(space, provider, schedule, beta):
    """Right-hand side of the coupled (x, v) system actually integrated."""
    if space.is_sphere:
        def rhs(t, x, v):
            a = ivp_rhs(space, x, v, provider, schedule, beta, t)
            return v, a - (float(v @ v) / float(x @ x)) * x
    else:
        def rhs(t, x, v):
            return v, ivp_rhs(space, x, v, provider, schedule, beta, t)
    return rhs


def solve_ivp(space: AmbientSpace, x0: np.ndarray, v0: np.ndarray,
              provider: ScoreProvider, schedule=None,
              config: IvpConfig | None = None
              ) -> tuple[list[IvpState], DiscretePath, IvpSummary]:
    """Integrate the geodesic flow from (x0, v0) over t in [0, 1].

    Returns the recorded states, the trajectory as a DiscretePath with
    samples at t = i/n, and a summary (endpoint, relative speed drift,
    per-step acceleration norms). A provider failure mid-run raises
    ProviderError after attaching the states integrated so far to the
    exception as `partial_states`.
    """
    config = config or IvpConfig()
    x = np.asarray(x0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    if space.is_sphere:
        if abs(float(v @ x)) > 1e-8 * np.linalg.norm(v) * np.linalg.norm(x):
            raise DomainError("initial velocity is not tangent to the sphere at x0")
    n = config.steps
    h = 1.0 / n
    rhs = _field(space, provider, schedule, config.beta)
    radius = float(np.linalg.norm(x)) if space.is_sphere else None
    speed0 = float(np.linalg.norm(v))
    states = [IvpState(x.copy(), v.copy(), 0.0)]
    ts = [0.0]
    pts = [x.copy()]
    accel_norms = []
    max_drift = 0.0
    for i in range(n):
        t = i * h
        try:
            k1x, k1v = rhs(t, x, v)
            k2x, k2v = rhs(t + 0.5 * h, x + 0.5 * h * k1x, v + 0.5 * h * k1v)
            k3x, k3v = rhs(t + 0.5 * h, x + 0.5 * h * k2x, v + 0.5 * h * k2v)
            k4x, k4v = rhs(t + h, x + h * k3x, v + h * k3v)
        except ProviderError as exc:
            exc.partial_states = states
            raise
        x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if space.is_sphere:
            x = radius * x / np.linalg.norm(x)
            v = v - (float(v @ x) / (radius * radius)) * x
        accel_norms.append(float(np.linalg.norm(k1v)))
        max_drift = max(max_drift, abs(float(np.linalg.norm(v)) - speed0) / speed0)
        ts.append((i + 1) * h)
        pts.append(x.copy())
        if (i + 1) % config.record_every == 0 or i == n - 1:
            states.append(IvpState(x.copy(), v.copy(), (i + 1) * h))
    ts = np.array(ts)
    ts[-1] = 1.0
    path = DiscretePath(space, ts, np.array(pts))
    summary = IvpSummary(endpoint=x.copy(), speed_drift=max_drift,
                         accel_norms=accel_norms)
    return states, path, summary
