"""Ambient-space geometry: tangent projections, sphere retraction, geodesic interpolation.

Two ambient spaces are supported: flat Euclidean space and an origin-centered
sphere of fixed radius. Points are plain numpy arrays; operations are pure
functions and accept either single vectors (d,) or batches (..., d).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AntipodalError, DegenerateStepError, DomainError

EUCLIDEAN = "euclidean"
SPHERE = "sphere"

# angular tolerance below which great-circle endpoints count as antipodal
ANTIPODAL_TOL = 1e-6


@dataclass(frozen=True)
class AmbientSpace:
    """Flat Euclidean space or an origin-centered sphere of given radius."""

    kind: str
    dim: int
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in (EUCLIDEAN, SPHERE):
            raise DomainError(f"unknown space kind {self.kind!r}")
        if self.dim < 2:
            raise DomainError(f"dim must be >= 2, got {self.dim}")
        if self.kind == SPHERE:
            if self.radius is None or not self.radius > 0:
                raise DomainError(f"sphere radius must be positive, got {self.radius}")
        elif self.radius is not None:
            raise DomainError("radius is only meaningful for the sphere")

    @classmethod
    def euclidean(cls, dim: int) -> "AmbientSpace":
        return cls(EUCLIDEAN, dim)

    @classmethod
    def sphere(cls, dim: int, radius: float = 1.0) -> "AmbientSpace":
        return cls(SPHERE, dim, float(radius))

    @property
    def is_sphere(self) -> bool:
        return self.kind == SPHERE

    def contains(self, x: np.ndarray, rtol: float = 1e-9) -> bool:
        """Whether x satisfies the point invariant of this space."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            return False
        if not self.is_sphere:
            return True
        norms = np.linalg.norm(x, axis=-1)
        return bool(np.all(np.abs(norms - self.radius) <= rtol * self.radius))

    def project_point(self, x: np.ndarray) -> np.ndarray:
        """Map a point back onto the space (renormalize onto the sphere)."""
        x = np.asarray(x, dtype=float)
        if not self.is_sphere:
            return x
        norms = np.linalg.norm(x, axis=-1, keepdims=True)
        if np.any(norms == 0):
            raise DomainError("cannot project the origin onto the sphere")
        return self.radius * x / norms


def project_to_tangent(space: AmbientSpace, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Project ambient vector(s) v onto the tangent space at x.

    On the sphere this removes the radial component, v - (v.x̂)x̂; on flat
    space v is returned unchanged.
    """
    v = np.asarray(v, dtype=float)
    if not space.is_sphere:
        return v
    x = np.asarray(x, dtype=float)
    xn = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(xn == 0):
        raise DomainError("tangent projection needs a nonzero base point on the sphere")
    xhat = x / xn
    return v - np.sum(v * xhat, axis=-1, keepdims=True) * xhat


def retract(space: AmbientSpace, x: np.ndarray, step: np.ndarray) -> np.ndarray:
    """Apply the update x - step and map the result back onto the space.

    Sphere: x <- ||x|| (x - step) / ||x - step||, preserving the norm of the
    incoming point. Euclidean: plain subtraction.
    """
    x = np.asarray(x, dtype=float)
    step = np.asarray(step, dtype=float)
    moved = x - step
    if not space.is_sphere:
        return moved
    xn = np.linalg.norm(x, axis=-1, keepdims=True)
    mn = np.linalg.norm(moved, axis=-1, keepdims=True)
    if np.any(mn == 0):
        raise DegenerateStepError("retraction update passes through the origin")
    return xn * moved / mn


def geodesic_interpolate(space: AmbientSpace, a: np.ndarray, b: np.ndarray,
                         t: float | np.ndarray) -> np.ndarray:
    """Point(s) at parameter t on the geodesic from a (t=0) to b (t=1).

    Straight segment on Euclidean space; constant-angular-rate great-circle
    arc on the sphere. Raises AntipodalError when the arc is ambiguous.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = np.asarray(t, dtype=float)
    tt = t[..., None] if t.ndim else t
    if not space.is_sphere:
        return a + tt * (b - a)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise DomainError("sphere interpolation needs nonzero endpoints")
    cos_th = np.clip(np.dot(a / na, b / nb), -1.0, 1.0)
    theta = float(np.arccos(cos_th))
    if theta > np.pi - ANTIPODAL_TOL:
        raise AntipodalError(
            f"endpoints are antipodal within {ANTIPODAL_TOL} rad; great circle is ambiguous")
    if theta < 1e-14:
        return a + tt * (b - a)
    s = np.sin(theta)
    w_a = np.sin((1.0 - t) * theta) / s
    w_b = np.sin(t * theta) / s
    out = w_a[..., None] * a + w_b[..., None] * b if t.ndim else w_a * a + w_b * b
    # slerp of equal-norm endpoints stays on the sphere; renormalize to kill rounding
    return space.project_point(out) if abs(na - nb) < 1e-12 * max(na, nb) else out


def slerp_velocity(space: AmbientSpace, a: np.ndarray, b: np.ndarray,
                   t: float | np.ndarray) -> np.ndarray:
    """d/dt of geodesic_interpolate(space, a, b, t).

    Constant b - a on Euclidean space; the great-circle arc derivative on the
    sphere (norm is the constant arc speed).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = np.asarray(t, dtype=float)
    if not space.is_sphere:
        d = b - a
        return np.broadcast_to(d, t.shape + d.shape).copy() if t.ndim else d.copy()
    cos_th = np.clip(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)), -1.0, 1.0)
    theta = float(np.arccos(cos_th))
    if theta > np.pi - ANTIPODAL_TOL:
        raise AntipodalError("antipodal endpoints")
    if theta < 1e-14:
        d = b - a
        return np.broadcast_to(d, t.shape + d.shape).copy() if t.ndim else d.copy()
    s = np.sin(theta)
    w_a = -theta * np.cos((1.0 - t) * theta) / s
    w_b = theta * np.cos(t * theta) / s
    if t.ndim:
        return w_a[..., None] * a + w_b[..., None] * b
    return w_a * a + w_b * b


def sphere_radius_from_endpoints(a: np.ndarray, b: np.ndarray,
                                 rtol: float = 0.01) -> float:
    """Sphere radius implied by two endpoints: ||a||, validated against ||b||.

    The solver's sphere is defined by the input points; endpoint norms must
    agree within rtol (default 1%).
    """
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0 or nb == 0:
        raise DomainError("endpoints on a sphere must be nonzero")
    if abs(na - nb) > rtol * na:
        raise DomainError(
            f"endpoint norms {na:.6g} and {nb:.6g} disagree by more than {rtol:.0%}; "
            "no common sphere")
    return na
