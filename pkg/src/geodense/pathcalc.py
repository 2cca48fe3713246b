"""Discrete paths and the variational calculus on them.

The central objects are DiscretePath (ordered (t, point) samples over [0, 1])
and the operations that treat it as a curve under the inverse-density metric:
the functional derivative of the weighted path length, the second-order
optimality residual, relative log-probability and geodesic distance along the
path, weighted path length, and constant-speed reparameterization.

Velocities and accelerations always come from the natural cubic spline fit to
the samples, never from finite differences of the control points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .density import ScoreProvider, conditions_for
from .errors import CapabilityError, DomainError, ZeroVelocityError
from .geometry import AmbientSpace
from .quadrature import TRAPEZOID, cumulative_integral, cumulative_trapezoid
from .spline import PathSpline

EXACT = "exact"
DIRECTION = "direction"


@dataclass
class DiscretePath:
    """Ordered path samples: t strictly increasing from 0 to 1, points (n, d)."""

    space: AmbientSpace
    ts: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        self.ts = np.asarray(self.ts, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        if self.ts.ndim != 1 or len(self.ts) < 2:
            raise DomainError("a path needs at least 2 samples")
        if self.points.shape != (len(self.ts), self.space.dim):
            raise DomainError(
                f"points shape {self.points.shape} does not match "
                f"{len(self.ts)} samples of dimension {self.space.dim}")
        if self.ts[0] != 0.0 or self.ts[-1] != 1.0:
            raise DomainError("path parameters must start at 0 and end at 1")
        if np.any(np.diff(self.ts) <= 0):
            raise DomainError("path parameters must be strictly increasing")
        if self.space.is_sphere and not self.space.contains(self.points):
            raise DomainError("path samples violate the sphere invariant")

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def n_samples(self) -> int:
        return len(self.ts)

    @property
    def interior_count(self) -> int:
        return len(self.ts) - 2

    def copy(self) -> "DiscretePath":
        return DiscretePath(self.space, self.ts.copy(), self.points.copy())

    def spline(self) -> PathSpline:
        return fit_spline(self)


def fit_spline(path: DiscretePath) -> PathSpline:
    """Natural cubic spline through the path samples (linear for 2 samples)."""
    return PathSpline(path.ts, path.points)


def functional_derivative(score: np.ndarray, velocity: np.ndarray,
                          acceleration: np.ndarray,
                          log_density: np.ndarray | float | None = None,
                          mode: str = DIRECTION) -> np.ndarray:
    """Gradient of the path-length functional at points of a constant-speed path.

    Exact mode returns

        -1 / (p ||v||) * [ (I - v̂ v̂ᵀ) score + a / ||v||² ]

    with p = exp(log_density). Direction mode drops the positive prefactor
    1/(p ||v||), keeping the same direction pointwise; it is what a score-only
    provider can compute and is the solver default.

    All arguments broadcast over a leading batch axis.
    """
    score = np.asarray(score, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    acceleration = np.asarray(acceleration, dtype=float)
    vn2 = np.sum(velocity * velocity, axis=-1, keepdims=True)
    if np.any(vn2 == 0.0):
        raise ZeroVelocityError("functional derivative needs nonzero velocity")
    vhat = velocity / np.sqrt(vn2)
    score_perp = score - np.sum(score * vhat, axis=-1, keepdims=True) * vhat
    bracket = score_perp + acceleration / vn2
    if mode == DIRECTION:
        return -bracket
    if mode == EXACT:
        if log_density is None:
            raise CapabilityError("exact mode requires log-density")
        log_density = np.asarray(log_density, dtype=float)
        pref = np.exp(-log_density)[..., None] / np.sqrt(vn2)
        return -pref * bracket
    raise DomainError(f"unknown derivative mode {mode!r}")


def _spline_query(path: DiscretePath, n: int):
    """Uniform-grid spline samples used by the analytics operations."""
    sp = fit_spline(path)
    tq = np.linspace(0.0, 1.0, n + 1)
    return tq, sp(tq), sp(tq, 1), sp(tq, 2)


def el_residual(path: DiscretePath, provider: ScoreProvider,
                schedule=None, n: int = 256, beta: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Second-order optimality residual at n+1 uniform parameters.

    Evaluates the transverse residual

        (I - v̂ v̂ᵀ) γ̈ + ||γ̇||² (I - v̂ v̂ᵀ) ∇log p(γ)

    which vanishes along a geodesic and is orthogonal to the velocity for any
    path. For a constant-speed path the first projector is a no-op and the
    expression reduces to the raw optimality condition.
    """
    tq, xq, vq, aq = _spline_query(path, n)
    res = provider.score(xq, cond=conditions_for(schedule, tq))
    s = beta * res.scores
    vn2 = np.sum(vq * vq, axis=-1, keepdims=True)
    if np.any(vn2 == 0.0):
        raise ZeroVelocityError("residual needs nonzero velocity everywhere")
    vhat = vq / np.sqrt(vn2)
    a_perp = aq - np.sum(aq * vhat, axis=-1, keepdims=True) * vhat
    s_perp = s - np.sum(s * vhat, axis=-1, keepdims=True) * vhat
    return tq, a_perp + vn2 * s_perp


def relative_log_probability(path: DiscretePath, provider: ScoreProvider,
                             schedule=None, n: int = 1024,
                             rule: str = TRAPEZOID) -> np.ndarray:
    """Cumulative log p(γ(t_i)) - log p(γ(0)) from the score line integral.

    Integrates f(t) = γ̇(t)ᵀ ∇log p(γ(t)) on the uniform grid t_i = i/n with
    the requested quadrature rule; the first entry is exactly 0.
    """
    if n < 2:
        raise DomainError("relative log-probability needs n >= 2")
    tq, xq, vq, _ = _spline_query(path, n)
    res = provider.score(xq, cond=conditions_for(schedule, tq))
    f = np.sum(vq * res.scores, axis=-1)
    return cumulative_integral(f, 1.0 / n, rule)


def relative_geodesic_distance(path: DiscretePath, provider: ScoreProvider,
                               schedule=None, n: int = 1024,
                               rel_log_p: np.ndarray | None = None) -> np.ndarray:
    """Cumulative relative geodesic distance on the uniform grid t_i = i/n.

    Trapezoid quadrature of ||γ̇|| / p̃(γ) exactly as the distance formula is
    written: half-weights at both ends, with the relative density anchored to
    p̃(γ(0)) = 1. A precomputed rel_log_p on the same grid may be passed in.
    """
    tq, xq, vq, _ = _spline_query(path, n)
    if rel_log_p is None:
        rel_log_p = relative_log_probability(path, provider, schedule, n)
    elif len(rel_log_p) != n + 1:
        raise DomainError("rel_log_p grid does not match n")
    speeds = np.linalg.norm(vq, axis=-1)
    integrand = speeds * np.exp(-rel_log_p)
    return cumulative_trapezoid(integrand, 1.0 / n)


def absolute_geodesic_distance(rel_distance: float, log_p_a: float) -> float:
    """Absolute distance from the relative one: d(a, b) = d̃_a(b) / p(γ(0))."""
    return float(rel_distance) * float(np.exp(-log_p_a))


class WeightFunction:
    """Scalar path weight w(x) > 0: inverse density or a custom field."""

    def __init__(self, w_fn, grad_log_w_fn=None, name: str = "custom"):
        self._w_fn = w_fn
        self.grad_log_w_fn = grad_log_w_fn
        self.name = name

    @classmethod
    def inverse_density(cls, provider: ScoreProvider, schedule=None,
                        beta: float = 1.0) -> "WeightFunction":
        """w = p^{-beta}; grad log w = -beta * score."""
        if not provider.has_log_density:
            raise CapabilityError("inverse-density weight needs log-density")

        def w_fn(points, t):
            res = provider.score(points, cond=conditions_for(schedule, t))
            return np.exp(-beta * res.log_density)

        def grad_fn(points, t):
            res = provider.score(points, cond=conditions_for(schedule, t))
            return -beta * res.scores

        return cls(w_fn, grad_fn, name="inverse_density")

    @classmethod
    def constant(cls, value: float = 1.0) -> "WeightFunction":
        if value <= 0:
            raise DomainError("weight must be positive")

        def w_fn(points, t):
            return np.full(len(points), float(value))

        def grad_fn(points, t):
            return np.zeros_like(np.asarray(points, dtype=float))

        return cls(w_fn, grad_fn, name="constant")

    def __call__(self, points, t) -> np.ndarray:
        w = np.asarray(self._w_fn(points, t), dtype=float)
        if np.any(w <= 0.0):
            raise DomainError("weight function must stay positive along the path")
        return w


def path_length_weighted(path: DiscretePath, weight: WeightFunction,
                         n: int = 1024) -> float:
    """Quadrature of the weighted length integral of ||γ̇|| w(γ) over [0, 1].

    With w = 1 this is the arc length; with w = p^{-1} it equals the absolute
    geodesic distance route.
    """
    tq, xq, vq, _ = _spline_query(path, n)
    w = weight(xq, tq)
    f = np.linalg.norm(vq, axis=-1) * w
    return float(cumulative_trapezoid(f, 1.0 / n)[-1])


def reparameterize_constant_speed(path: DiscretePath, n: int | None = None,
                                  n_dense: int | None = None) -> DiscretePath:
    """Resample the path at uniform arc length; endpoints are preserved exactly.

    n is the output sample count (defaults to the input's). The arc-length
    table comes from a dense sampling of the spline; sphere paths are
    re-projected onto the sphere afterwards.
    """
    out_n = path.n_samples if n is None else int(n)
    if out_n < 2:
        raise DomainError("need at least 2 output samples")
    sp = fit_spline(path)
    dense = n_dense if n_dense is not None else max(4096, 16 * out_n)
    td = np.linspace(0.0, 1.0, dense + 1)
    xd = sp(td)
    seg = np.linalg.norm(np.diff(xd, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    if arc[-1] == 0.0:
        raise DomainError("cannot reparameterize a zero-length path")
    targets = np.linspace(0.0, arc[-1], out_n)
    t_new = np.interp(targets, arc, td)
    t_new[0], t_new[-1] = 0.0, 1.0
    pts = sp(t_new)
    pts[0] = path.points[0]
    pts[-1] = path.points[-1]
    if path.space.is_sphere:
        pts = path.space.project_point(pts)
        pts[0] = path.points[0]
        pts[-1] = path.points[-1]
    return DiscretePath(path.space, np.linspace(0.0, 1.0, out_n), pts)


@dataclass
class PathAnalytics:
    """Per-sample analytics along a path on the uniform grid t."""

    t: np.ndarray
    rel_log_p: np.ndarray
    rel_distance: np.ndarray
    grad_norm: np.ndarray
    abs_distance: float | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "t": self.t.tolist(),
            "rel_log_p": self.rel_log_p.tolist(),
            "rel_distance": self.rel_distance.tolist(),
            "grad_norm": self.grad_norm.tolist(),
            "abs_distance": self.abs_distance,
        }
        out.update(self.meta)
        return out


def compute_analytics(path: DiscretePath, provider: ScoreProvider, schedule=None,
                      n: int = 1024, rule: str = TRAPEZOID, mode: str = DIRECTION,
                      beta: float = 1.0, reparameterize: bool = True) -> PathAnalytics:
    """Relative log-probability, cumulative distance and derivative-norm profile.

    The derivative profile assumes constant speed, so the path is
    reparameterized first by default; the choice is recorded in the metadata.
    """
    eval_path = reparameterize_constant_speed(path) if reparameterize else path
    rel_log_p = relative_log_probability(eval_path, provider, schedule, n, rule)
    rel_dist = relative_geodesic_distance(eval_path, provider, schedule, n, rel_log_p)
    tq, xq, vq, aq = _spline_query(eval_path, n)
    res = provider.score(xq, cond=conditions_for(schedule, tq))
    log_density = res.log_density if provider.has_log_density else None
    if mode == EXACT and log_density is None:
        raise CapabilityError("exact-mode analytics need a log-density provider")
    deriv = functional_derivative(beta * res.scores, vq, aq,
                                  log_density=log_density, mode=mode)
    grad_norm = np.linalg.norm(deriv, axis=-1)
    abs_distance = None
    if provider.has_log_density:
        start = provider.score(path.points[0][None, :],
                               cond=conditions_for(schedule, np.zeros(1)))
        abs_distance = absolute_geodesic_distance(rel_dist[-1],
                                                  float(start.log_density[0]))
    return PathAnalytics(
        t=tq, rel_log_p=rel_log_p, rel_distance=rel_dist, grad_norm=grad_norm,
        abs_distance=abs_distance,
        meta={"constant_speed_reparameterized": bool(reparameterize),
              "rule": rule, "mode": mode, "n": n, "beta": beta})
