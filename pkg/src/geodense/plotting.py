"""Figure rendering: 2D density contours with path overlays, and scalar curves.

Figures are written as SVG next to the delimited outputs. Rendering is
deterministic: the SVG hash salt is pinned and no timestamps are embedded, so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "geodense"

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .density import ScoreProvider, conditions_for  # noqa: E402
from .errors import DomainError  # noqa: E402
from .pathcalc import DiscretePath  # noqa: E402

_SAVEFIG_KW = {"format": "svg", "metadata": {"Date": None}}


def _bounds_for(paths: list[DiscretePath], margin: float = 0.8):
    pts = np.vstack([p.points for p in paths])
    lo = pts.min(axis=0) - margin
    hi = pts.max(axis=0) + margin
    return lo, hi


def density_contour_figure(filename: str, provider: ScoreProvider,
                           paths: dict[str, DiscretePath], schedule=None,
                           grid_n: int = 120, bounds=None):
    """Log-density contours of a 2D provider with path overlays."""
    if provider.dim != 2:
        raise DomainError("contour plots need a 2-dimensional space")
    path_list = list(paths.values())
    if bounds is None:
        if not path_list:
            raise DomainError("contour figure needs at least one path or bounds")
        lo, hi = _bounds_for(path_list)
    else:
        lo, hi = np.asarray(bounds[0], float), np.asarray(bounds[1], float)
    xs = np.linspace(lo[0], hi[0], grid_n)
    ys = np.linspace(lo[1], hi[1], grid_n)
    XX, YY = np.meshgrid(xs, ys)
    query = np.column_stack([XX.ravel(), YY.ravel()])
    cond = conditions_for(schedule, np.full(len(query), 0.5))
    res = provider.score(query, cond=cond)
    if res.log_density is None:
        raise DomainError("contour plot needs a log-density provider")
    ZZ = res.log_density.reshape(XX.shape)
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    cs = ax.contourf(XX, YY, ZZ, levels=24, cmap="viridis")
    fig.colorbar(cs, ax=ax, label="log density")
    for label, path in paths.items():
        ax.plot(path.points[:, 0], path.points[:, 1], marker="o",
                markersize=2.5, linewidth=1.4, label=label)
        ax.plot(path.points[0, 0], path.points[0, 1], "k^", markersize=6)
        ax.plot(path.points[-1, 0], path.points[-1, 1], "kv", markersize=6)
    if paths:
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("x0")
    ax.set_ylabel("x1")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(filename, **_SAVEFIG_KW)
    plt.close(fig)


def curve_figure(filename: str, x: np.ndarray, curves: dict[str, np.ndarray],
                 xlabel: str, ylabel: str):
    """One or more scalar series over a shared abscissa."""
    if not curves:
        raise DomainError("curve figure needs at least one series")
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    for label, ys in curves.items():
        ax.plot(np.asarray(x), np.asarray(ys), linewidth=1.4, label=label)
    if len(curves) > 1:
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(filename, **_SAVEFIG_KW)
    plt.close(fig)


def profile_family_figure(filename: str, t: np.ndarray,
                          profiles: list[tuple[str, np.ndarray]],
                          ylabel: str):
    """A family of per-path profiles (e.g. rel_log_p per snapshot), darkening with index."""
    if not profiles:
        raise DomainError("profile figure needs at least one profile")
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    m = max(len(profiles) - 1, 1)
    for i, (label, ys) in enumerate(profiles):
        shade = 0.8 * (1.0 - i / m)
        ax.plot(t, ys, color=(shade, shade, shade), linewidth=1.3, label=label)
    ax.legend(loc="best", fontsize=7)
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(filename, **_SAVEFIG_KW)
    plt.close(fig)
