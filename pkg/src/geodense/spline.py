"""Natural cubic spline through path samples, with first and second derivatives."""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError


class PathSpline:
    """Per-coordinate natural cubic spline over the sample knots.

    Two samples degrade to the linear segment (the natural conditions force
    zero curvature). Evaluation outside [t0, t_last] is extrapolated by scipy
    and should be avoided by callers.
    """

    def __init__(self, ts: np.ndarray, points: np.ndarray):
        ts = np.asarray(ts, dtype=float)
        points = np.asarray(points, dtype=float)
        if len(ts) < 2:
            raise DomainError("spline needs at least 2 samples")
        if np.any(np.diff(ts) <= 0):
            raise DomainError("spline knots must be strictly increasing")
        self.ts = ts
        self.points = points
        self._spline = CubicSpline(ts, points, axis=0, bc_type="natural")

    def __call__(self, t, nu: int = 0) -> np.ndarray:
        """Value (nu=0), velocity (nu=1) or acceleration (nu=2) at t."""
        return self._spline(t, nu)

    def position(self, t) -> np.ndarray:
        return self._spline(t)

    def velocity(self, t) -> np.ndarray:
        return self._spline(t, 1)

    def acceleration(self, t) -> np.ndarray:
        return self._spline(t, 2)

    def arc_length(self, n_dense: int = 4096) -> float:
        """Polyline arc length of a dense sampling of the spline."""
        td = np.linspace(self.ts[0], self.ts[-1], n_dense + 1)
        xd = self._spline(td)
        return float(np.linalg.norm(np.diff(xd, axis=0), axis=1).sum())
