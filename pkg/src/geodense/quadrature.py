"""Cumulative quadrature rules on uniform grids.

Both rules take n+1 samples f(t_i) at t_i = i/n on [0, 1] and return the
cumulative integral at every sample point, anchored to 0 at t_0.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

TRAPEZOID = "trapezoid"
SIMPSON = "simpson"


def cumulative_trapezoid(f: np.ndarray, h: float) -> np.ndarray:
    """Cumulative trapezoid: out[i] = h (f0/2 + f1 + ... + f_{i-1} + f_i/2)."""
    f = np.asarray(f, dtype=float)
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * h * (f[:-1] + f[1:]))
    return out


def cumulative_simpson(f: np.ndarray, h: float) -> np.ndarray:
    """Cumulative Simpson on a uniform grid with an even interval count.

    Each interval pair [t_{2k}, t_{2k+2}] carries one parabola; the value at
    the odd midpoint is the exact integral of that parabola over its first
    half, so samples at every grid point are filled in.
    """
    f = np.asarray(f, dtype=float)
    n = len(f) - 1
    if n < 2 or n % 2 != 0:
        raise DomainError(f"Simpson needs an even number of intervals >= 2, got {n}")
    out = np.zeros_like(f)
    f0, f1, f2 = f[0:-1:2], f[1::2], f[2::2]
    pair = (h / 3.0) * (f0 + 4.0 * f1 + f2)
    # integral of the pair's parabola over its first half-interval
    half = (h / 12.0) * (5.0 * f0 + 8.0 * f1 - f2)
    out[2::2] = np.cumsum(pair)
    out[1::2] = out[0:-1:2] + half
    return out


def cumulative_integral(f: np.ndarray, h: float, rule: str = TRAPEZOID) -> np.ndarray:
    if rule == TRAPEZOID:
        return cumulative_trapezoid(f, h)
    if rule == SIMPSON:
        return cumulative_simpson(f, h)
    raise DomainError(f"unknown quadrature rule {rule!r}")
