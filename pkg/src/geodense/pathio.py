"""File formats: path CSV, trace CSV, report JSON/CSV, mixture JSON, grid NPZ.

Floats are written with repr (shortest round-trip representation), so files
are byte-stable across runs with identical inputs.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .analysis import ComparisonReport
from .density import GaussianMixture, GridField
from .errors import DomainError
from .geometry import AmbientSpace
from .pathcalc import DiscretePath
from .solver_bvp import BvpTrace


def _fmt(x: float) -> str:
    return repr(float(x))


def write_path_csv(filename: str, path: DiscretePath):
    header = "t," + ",".join(f"x{j}" for j in range(path.dim))
    lines = [header]
    for t, pt in zip(path.ts, path.points):
        lines.append(",".join([_fmt(t)] + [_fmt(c) for c in pt]))
    with open(filename, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_path_csv(filename: str, space: AmbientSpace | None = None) -> DiscretePath:
    """Parse a `t,x0,...` CSV; the space defaults to Euclidean of the file's width."""
    with open(filename, encoding="utf-8") as fh:
        rows = [line.strip() for line in fh if line.strip()]
    if len(rows) < 2:
        raise DomainError(f"{filename}: a path file needs a header and data rows")
    header = rows[0].split(",")
    if header[0] != "t" or any(not c.startswith("x") for c in header[1:]):
        raise DomainError(f"{filename}: expected header t,x0,x1,...")
    dim = len(header) - 1
    data = np.array([[float(v) for v in row.split(",")] for row in rows[1:]])
    if data.shape[1] != dim + 1:
        raise DomainError(f"{filename}: row width does not match the header")
    if space is None:
        space = AmbientSpace.euclidean(dim)
    elif space.dim != dim:
        raise DomainError(
            f"{filename}: file dimension {dim} does not match space dim {space.dim}")
    return DiscretePath(space, data[:, 0], data[:, 1:])


def read_point_csv(filename: str) -> np.ndarray:
    """Single point from a one-row path CSV (the t column is ignored)."""
    with open(filename, encoding="utf-8") as fh:
        rows = [line.strip() for line in fh if line.strip()]
    if len(rows) != 2:
        raise DomainError(f"{filename}: expected a header plus exactly one row")
    return np.array([float(v) for v in rows[1].split(",")])[1:]


def write_point_csv(filename: str, point: np.ndarray, t: float = 0.0):
    point = np.asarray(point, dtype=float)
    header = "t," + ",".join(f"x{j}" for j in range(len(point)))
    with open(filename, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        fh.write(",".join([_fmt(t)] + [_fmt(c) for c in point]) + "\n")


def write_trace_csv(filename: str, trace: BvpTrace):
    lines = ["iter,lr,k,mean_grad_norm,rel_distance"]
    for it, lr, k, gn, rd in trace.rows():
        lines.append(f"{it},{_fmt(lr)},{k},{_fmt(gn)},{_fmt(rd)}")
    with open(filename, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace_csv(filename: str) -> dict[str, np.ndarray]:
    with open(filename, encoding="utf-8") as fh:
        rows = [line.strip() for line in fh if line.strip()]
    header = rows[0].split(",")
    if header != ["iter", "lr", "k", "mean_grad_norm", "rel_distance"]:
        raise DomainError(f"{filename}: not a trace CSV")
    data = np.array([[float(v) for v in row.split(",")] for row in rows[1:]])
    if data.size == 0:
        raise DomainError(f"{filename}: trace has no rows")
    return {name: data[:, i] for i, name in enumerate(header)}


def write_json(filename: str, payload: dict):
    with open(filename, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_report_csv(filename: str, report: ComparisonReport):
    lines = ["path,variant,mean_grad_norm"]
    for name, variant, value in report.rows():
        lines.append(f"{name},{variant},{'' if value is None else _fmt(value)}")
    with open(filename, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mixture_json(filename: str) -> GaussianMixture:
    """Mixture spec: {"weights": [...], "means": [[...]], "covariances": ... }.

    Covariances are either a list of full matrices or {"diag": [[...], ...]}.
    """
    with open(filename, encoding="utf-8") as fh:
        spec = json.load(fh)
    return mixture_from_dict(spec)


def mixture_from_dict(spec: dict) -> GaussianMixture:
    try:
        weights = spec["weights"]
        means = spec["means"]
        cov = spec["covariances"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"mixture spec needs weights/means/covariances: {exc}") from exc
    if isinstance(cov, dict) and "diag" in cov:
        return GaussianMixture(weights, means, diag=cov["diag"])
    return GaussianMixture(weights, means, covariances=cov)


def write_mixture_json(filename: str, weights, means, covariances=None, diag=None):
    if (covariances is None) == (diag is None):
        raise DomainError("provide exactly one of covariances or diag")
    cov = {"diag": np.asarray(diag).tolist()} if diag is not None \
        else np.asarray(covariances).tolist()
    spec = {
        "weights": np.asarray(weights).tolist(),
        "means": np.asarray(means).tolist(),
        "covariances": cov,
    }
    with open(filename, "w", encoding="utf-8") as fh:
        json.dump(spec, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_grid_npz(filename: str) -> GridField:
    """Grid field file: npz with origin, spacing and values arrays."""
    with np.load(filename) as data:
        try:
            return GridField(data["origin"], data["spacing"], data["values"])
        except KeyError as exc:
            raise DomainError(f"{filename}: grid npz needs origin/spacing/values") from exc


def write_grid_npz(filename: str, field: GridField):
    np.savez(filename, origin=field.origin, spacing=field.spacing, values=field.values)


def list_path_csvs(directory: str) -> list[str]:
    out = sorted(f for f in os.listdir(directory) if f.endswith(".csv"))
    return [os.path.join(directory, f) for f in out]
