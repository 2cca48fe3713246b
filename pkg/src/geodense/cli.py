"""Command-line interface: solve-bvp, solve-ivp, analyze, plot, density-info.

Configuration comes from a TOML file (--config, or the GEODENSE_CONFIG
environment variable), with individual values overridable on the command line
via repeated --set section.key=value flags. Precedence: flags > file >
defaults.

Exit codes: 0 success, 2 configuration/input error, 3 provider error,
4 numerical failure. Configuration is validated before any provider is
spawned. Outputs are staged in a temporary directory and moved into place on
success; partial results of a failed run land under <out>/failed/ and are
never mixed with successful outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import analysis, pathio, plotting
from .density import (ConditionalMixturePair, ConditioningSchedule,
                      GaussianMixture, UniformDensity)
from .errors import ConfigError, GeodenseError, ProviderError
from .geometry import AmbientSpace, sphere_radius_from_endpoints
from .pathcalc import compute_analytics
from .protocol import ExternalScoreProvider
from .solver_bvp import BvpConfig, solve_bvp
from .solver_ivp import IvpConfig, init_velocity, solve_ivp

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROVIDER = 3
EXIT_NUMERICAL = 4

CONFIG_ENV_VAR = "GEODENSE_CONFIG"


# ---------------------------------------------------------------- config ----

def _parse_set(expr: str):
    if "=" not in expr:
        raise ConfigError(f"--set expects section.key=value, got {expr!r}")
    key, raw = expr.split("=", 1)
    key = key.strip()
    if not key or "." not in key:
        raise ConfigError(f"--set key must be section.key, got {key!r}")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw  # bare string
    return key.split("."), value


def load_config(args) -> dict:
    path = args.config or os.environ.get(CONFIG_ENV_VAR)
    config: dict = {}
    if path:
        try:
            with open(path, "rb") as fh:
                config = tomllib.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from exc
    for expr in args.set or []:
        keys, value = _parse_set(expr)
        node = config
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set {expr!r} collides with a scalar value")
        node[keys[-1]] = value
    if args.out:
        config.setdefault("output", {})["directory"] = args.out
    return config


def build_space(config: dict, reference_point=None) -> AmbientSpace:
    spec = config.get("space", {})
    kind = spec.get("kind", "euclidean")
    dim = spec.get("dim")
    if dim is None:
        if reference_point is None:
            raise ConfigError("space.dim is required")
        dim = len(reference_point)
    if kind == "euclidean":
        return AmbientSpace.euclidean(int(dim))
    if kind == "sphere":
        radius = spec.get("radius", "auto")
        if radius == "auto":
            if reference_point is None:
                raise ConfigError("space.radius = 'auto' needs an input point")
            radius = float(np.linalg.norm(reference_point))
        return AmbientSpace.sphere(int(dim), float(radius))
    raise ConfigError(f"unknown space kind {kind!r}")


def build_provider(config: dict, expected_dim: int | None = None):
    spec = config.get("provider")
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("config needs a [provider] table with a kind")
    kind = spec["kind"]
    if kind == "uniform":
        dim = spec.get("dim") or expected_dim
        if dim is None:
            raise ConfigError("provider.dim is required for the uniform provider")
        provider = UniformDensity(int(dim))
    elif kind == "mixture":
        provider = _mixture_from_spec(spec)
    elif kind == "conditional":
        if "mixture_0" not in spec or "mixture_1" not in spec:
            raise ConfigError("conditional provider needs mixture_0 and mixture_1 tables")
        provider = ConditionalMixturePair(_mixture_from_spec(spec["mixture_0"]),
                                          _mixture_from_spec(spec["mixture_1"]))
    elif kind == "grid":
        if "file" not in spec:
            raise ConfigError("grid provider needs file = '<field.npz>'")
        provider = pathio.load_grid_npz(spec["file"])
    elif kind == "external":
        if "command" in spec:
            argv = spec["command"]
            if isinstance(argv, str):
                argv = argv.split()
            provider = ExternalScoreProvider.spawn(list(argv))
        elif "address" in spec:
            host, _, port = str(spec["address"]).rpartition(":")
            if not host or not port.isdigit():
                raise ConfigError("provider.address must be host:port")
            provider = ExternalScoreProvider.connect(host, int(port))
        else:
            raise ConfigError("external provider needs command or address")
    else:
        raise ConfigError(f"unknown provider kind {kind!r}")
    if expected_dim is not None and provider.dim != expected_dim:
        provider.close()
        raise ConfigError(
            f"provider dimension {provider.dim} does not match space dim {expected_dim}")
    return provider


def _mixture_from_spec(spec: dict) -> GaussianMixture:
    if "file" in spec:
        return pathio.load_mixture_json(spec["file"])
    body = {k: spec[k] for k in ("weights", "means", "covariances") if k in spec}
    if "diag" in spec:
        body["covariances"] = {"diag": spec["diag"]}
    return pathio.mixture_from_dict(body)


def build_schedule(config: dict, provider) -> ConditioningSchedule | None:
    spec = config.get("conditioning")
    if not spec:
        return None
    if "z0" not in spec or "z1" not in spec:
        raise ConfigError("conditioning needs z0 and z1 vectors")
    schedule = ConditioningSchedule(np.asarray(spec["z0"], dtype=float),
                                    np.asarray(spec["z1"], dtype=float))
    if provider.cond_dim is None:
        raise ConfigError("conditioning configured but the provider is unconditioned")
    if schedule.cond_dim != provider.cond_dim:
        raise ConfigError(
            f"conditioning dimension {schedule.cond_dim} does not match the "
            f"provider's {provider.cond_dim}")
    return schedule


def build_bvp_config(config: dict) -> BvpConfig:
    spec = dict(config.get("bvp", {}))
    kwargs = {}
    for key, name in [("steps", "steps"), ("lr0", "lr0"), ("lr_schedule", "lr_schedule"),
                      ("levels", "bisection_levels"), ("refine_every", "refine_every"),
                      ("beta", "beta"), ("derivative_mode", "derivative_mode"),
                      ("quad_n", "quad_n"), ("convergence_tol", "convergence_tol"),
                      ("snapshot_every", "snapshot_every")]:
        if key in spec:
            kwargs[name] = tuple(spec[key]) if key == "levels" else spec[key]
    return BvpConfig(**kwargs)


def build_ivp_config(config: dict) -> IvpConfig:
    spec = dict(config.get("ivp", {}))
    kwargs = {k: spec[k] for k in ("steps", "beta", "speed", "record_every")
              if k in spec}
    return IvpConfig(**kwargs)


def analytics_params(config: dict) -> dict:
    spec = config.get("analytics", {})
    return {"n": int(spec.get("n", 1024)), "rule": spec.get("rule", "trapezoid")}


# ---------------------------------------------------------------- output ----

class OutputStager:
    """Collects output files in a temporary directory, then moves them into place.

    On success everything lands in the target directory in one pass; when the
    run failed after producing partial results, files are placed under
    <target>/failed/ instead.
    """

    def __init__(self, target: str):
        self.target = target
        parent = os.path.dirname(os.path.abspath(target)) or "."
        os.makedirs(parent, exist_ok=True)
        self._staging = tempfile.mkdtemp(prefix=".staging-", dir=parent)

    def path(self, *parts: str) -> str:
        full = os.path.join(self._staging, *parts)
        os.makedirs(os.path.dirname(full), exist_ok=True)
        return full

    def commit(self, failed: bool = False):
        dest = os.path.join(self.target, "failed") if failed else self.target
        if not os.path.exists(dest) and not failed:
            os.replace(self._staging, dest)
            return
        os.makedirs(dest, exist_ok=True)
        for name in sorted(os.listdir(self._staging)):
            target = os.path.join(dest, name)
            if os.path.isdir(target):
                shutil.rmtree(target)
            os.replace(os.path.join(self._staging, name), target)
        shutil.rmtree(self._staging, ignore_errors=True)

    def discard(self):
        shutil.rmtree(self._staging, ignore_errors=True)


def _fail(code: int, message: str) -> int:
    print(f"geodense: error: {message}", file=sys.stderr)
    return code


# ------------------------------------------------------------ subcommands ----

def cmd_solve_bvp(args) -> int:
    try:
        config = load_config(args)
        a = pathio.read_point_csv(args.start)
        b = pathio.read_point_csv(args.end)
        if a.shape != b.shape:
            raise ConfigError(
                f"endpoint dimensions differ: {a.shape[0]} vs {b.shape[0]}")
        space = build_space(config, reference_point=a)
        if space.dim != len(a):
            raise ConfigError(
                f"endpoint dimension {len(a)} does not match space.dim {space.dim}")
        if space.is_sphere:
            sphere_radius_from_endpoints(a, b)  # validates the 1% norm agreement
        bvp_config = build_bvp_config(config)
        ana = analytics_params(config)
        out_dir = config.get("output", {}).get("directory")
        if not out_dir:
            raise ConfigError("output.directory is required (or pass --out)")
    except (GeodenseError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    try:
        provider = build_provider(config, expected_dim=space.dim)
    except ProviderError as exc:
        return _fail(EXIT_PROVIDER, str(exc))
    except (GeodenseError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    stager = OutputStager(out_dir)
    try:
        schedule = build_schedule(config, provider)
    except GeodenseError as exc:
        stager.discard()
        provider.close()
        return _fail(EXIT_CONFIG, str(exc))
    try:
        path, trace = solve_bvp(space, a, b, provider, schedule, bvp_config)
        init = trace.snapshots[0][1]
        mode = bvp_config.derivative_mode
        analytics = {
            "initial": compute_analytics(init, provider, schedule, mode=mode,
                                         beta=bvp_config.beta, **ana).to_dict(),
            "final": compute_analytics(path, provider, schedule, mode=mode,
                                       beta=bvp_config.beta, **ana).to_dict(),
        }
        analytics["summary"] = {
            "rel_distance_initial": analytics["initial"]["rel_distance"][-1],
            "rel_distance_final": analytics["final"]["rel_distance"][-1],
        }
        pathio.write_path_csv(stager.path("path.csv"), path)
        pathio.write_path_csv(stager.path("init_path.csv"), init)
        pathio.write_trace_csv(stager.path("trace.csv"), trace)
        pathio.write_json(stager.path("analytics.json"), analytics)
        for it, snap in trace.snapshots:
            pathio.write_path_csv(stager.path("snapshots", f"iter_{it:06d}.csv"), snap)
        stager.commit()
        return EXIT_OK
    except ProviderError as exc:
        stager.commit(failed=True)
        return _fail(EXIT_PROVIDER, str(exc))
    except (GeodenseError, FloatingPointError) as exc:
        stager.commit(failed=True)
        return _fail(EXIT_NUMERICAL, str(exc))
    finally:
        provider.close()


def cmd_solve_ivp(args) -> int:
    try:
        config = load_config(args)
        x0 = pathio.read_point_csv(args.start)
        direction = pathio.read_point_csv(args.direction)
        if x0.shape != direction.shape:
            raise ConfigError(
                f"dimension mismatch: start {x0.shape[0]}, direction {direction.shape[0]}")
        if not np.any(direction):
            raise ConfigError("direction vector is zero")
        space = build_space(config, reference_point=x0)
        ivp_config = build_ivp_config(config)
        out_dir = config.get("output", {}).get("directory")
        if not out_dir:
            raise ConfigError("output.directory is required (or pass --out)")
    except (GeodenseError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    try:
        provider = build_provider(config, expected_dim=space.dim)
    except ProviderError as exc:
        return _fail(EXIT_PROVIDER, str(exc))
    except (GeodenseError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    stager = OutputStager(out_dir)
    try:
        schedule = build_schedule(config, provider)
        v0 = init_velocity(space, x0, direction, ivp_config.speed)
    except GeodenseError as exc:
        stager.discard()
        provider.close()
        return _fail(EXIT_CONFIG, str(exc))
    try:
        states, path, summary = solve_ivp(space, x0, v0, provider, schedule, ivp_config)
        pathio.write_path_csv(stager.path("trajectory.csv"), path)
        pathio.write_json(stager.path("summary.json"), summary.to_dict())
        stager.commit()
        return EXIT_OK
    except ProviderError as exc:
        partial = getattr(exc, "partial_states", None)
        if partial and len(partial) > 1:
            # raw dump with the true (truncated) parameter values
            lines = ["t," + ",".join(f"x{j}" for j in range(space.dim))]
            for s in partial:
                lines.append(",".join([repr(float(s.t))] + [repr(float(c)) for c in s.x]))
            with open(stager.path("trajectory_partial.csv"), "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        stager.commit(failed=True)
        return _fail(EXIT_PROVIDER, str(exc))
    except (GeodenseError, FloatingPointError) as exc:
        stager.commit(failed=True)
        return _fail(EXIT_NUMERICAL, str(exc))
    finally:
        provider.close()


def cmd_analyze(args) -> int:
    try:
        config = load_config(args)
        if not os.path.isdir(args.trajectories):
            raise ConfigError(f"not a directory: {args.trajectories}")
        files = pathio.list_path_csvs(args.trajectories)
        if not files:
            raise ConfigError(f"no path CSV files in {args.trajectories}")
        out_dir = config.get("output", {}).get("directory")
        if not out_dir:
            raise ConfigError("output.directory is required (or pass --out)")
        spec = config.get("analysis", {})
    except (GeodenseError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    provider = None
    stager = None
    try:
        first = pathio.read_path_csv(files[0])
        space = build_space(config, reference_point=first.points[0])
        paths = {}
        for f in files:
            name = os.path.splitext(os.path.basename(f))[0]
            paths[name] = pathio.read_path_csv(f, space=space)
        trajectories = analysis.TrajectorySet(paths)
    except (GeodenseError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    try:
        provider = build_provider(config, expected_dim=space.dim)
    except ProviderError as exc:
        return _fail(EXIT_PROVIDER, str(exc))
    except (GeodenseError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    stager = OutputStager(out_dir)
    try:
        schedule = build_schedule(config, provider)
        report = analysis.compare_trajectories(
            trajectories, provider, schedule,
            deltas=tuple(spec.get("deltas", (0.01, 0.05, 0.1))),
            bvp_config=build_bvp_config(config),
            smoothing=float(spec.get("smoothing", 0.9999)),
            n=int(spec.get("n", 256)),
            seed=int(config.get("seed", 0)),
            include_optimized=bool(spec.get("optimize", True)),
            include_smoothed=bool(spec.get("smooth", True)))
        pathio.write_json(stager.path("report.json"), report.to_dict())
        pathio.write_report_csv(stager.path("report.csv"), report)
        for name, path in trajectories.items():
            profile = analysis.gradient_norm_profile(
                path, provider, schedule, n=int(spec.get("n", 256)))
            tq = np.linspace(0.0, 1.0, len(profile))
            lines = ["t,grad_norm"] + [
                f"{repr(float(t))},{repr(float(g))}" for t, g in zip(tq, profile)]
            with open(stager.path("profiles", f"{name}.csv"), "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        stager.commit()
        return EXIT_OK
    except ProviderError as exc:
        stager.commit(failed=True)
        return _fail(EXIT_PROVIDER, str(exc))
    except (GeodenseError, FloatingPointError) as exc:
        stager.commit(failed=True)
        return _fail(EXIT_NUMERICAL, str(exc))
    finally:
        if provider is not None:
            provider.close()


def cmd_plot(args) -> int:
    try:
        config = load_config(args)
        out_dir = config.get("output", {}).get("directory")
        if not out_dir:
            raise ConfigError("output.directory is required (or pass --out)")
        if not (args.path or args.trace or args.analytics):
            raise ConfigError("nothing to plot: pass --path, --trace or --analytics")
        trace = pathio.read_trace_csv(args.trace) if args.trace else None
        analytics = None
        if args.analytics:
            with open(args.analytics, encoding="utf-8") as fh:
                analytics = json.load(fh)
    except (GeodenseError, OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    provider = None
    stager = OutputStager(out_dir)
    try:
        wrote = []
        if args.path:
            first = pathio.read_path_csv(args.path[0])
            space = build_space(config, reference_point=first.points[0])
            if space.dim != 2:
                raise ConfigError("contour plots need a 2-dimensional space")
            provider = build_provider(config, expected_dim=2)
            schedule = build_schedule(config, provider)
            paths = {}
            for f in args.path:
                name = os.path.splitext(os.path.basename(f))[0]
                paths[name] = pathio.read_path_csv(f, space=space)
            plotting.density_contour_figure(
                stager.path("contour.svg"), provider, paths, schedule)
            wrote.append("contour.svg")
        if trace is not None:
            plotting.curve_figure(
                stager.path("distance_curve.svg"), trace["iter"],
                {"rel_distance": trace["rel_distance"]},
                "iteration", "relative geodesic distance")
            plotting.curve_figure(
                stager.path("grad_norm_curve.svg"), trace["iter"],
                {"mean_grad_norm": trace["mean_grad_norm"]},
                "iteration", "mean derivative norm")
            wrote += ["distance_curve.svg", "grad_norm_curve.svg"]
        if analytics is not None:
            profiles = [(label, np.asarray(analytics[label]["rel_log_p"]))
                        for label in ("initial", "final") if label in analytics]
            if profiles:
                t = np.asarray(analytics[profiles[0][0]]["t"])
                plotting.profile_family_figure(
                    stager.path("rel_log_p.svg"), t, profiles, "relative log-probability")
                wrote.append("rel_log_p.svg")
        if not wrote:
            raise ConfigError("no figures produced from the given inputs")
        stager.commit()
        return EXIT_OK
    except ProviderError as exc:
        stager.discard()
        return _fail(EXIT_PROVIDER, str(exc))
    except (GeodenseError, OSError) as exc:
        stager.discard()
        return _fail(EXIT_CONFIG, str(exc))
    finally:
        if provider is not None:
            provider.close()


def cmd_density_info(args) -> int:
    try:
        config = load_config(args)
        dim = config.get("space", {}).get("dim")
        provider = build_provider(config, expected_dim=dim)
    except ProviderError as exc:
        return _fail(EXIT_PROVIDER, str(exc))
    except (GeodenseError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    try:
        info = {
            "kind": type(provider).__name__,
            "dim": provider.dim,
            "cond_dim": provider.cond_dim,
            "has_log_density": provider.has_log_density,
        }
        print(json.dumps(info, indent=2, sort_keys=True))
        return EXIT_OK
    finally:
        provider.close()


# ---------------------------------------------------------------- parser ----

def _add_common(p):
    p.add_argument("--config", help="TOML configuration file "
                   f"(default: ${CONFIG_ENV_VAR})")
    p.add_argument("--out", help="output directory (overrides output.directory)")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                   help="override a config value; repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geodense",
        description="Geodesics of inverse-density metrics: solvers and analytics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-bvp", help="geodesic between two fixed endpoints")
    p.add_argument("start", help="single-row path CSV with the start point")
    p.add_argument("end", help="single-row path CSV with the end point")
    _add_common(p)
    p.set_defaults(func=cmd_solve_bvp)

    p = sub.add_parser("solve-ivp", help="geodesic from a point and initial direction")
    p.add_argument("start", help="single-row path CSV with the start point")
    p.add_argument("direction", help="single-row path CSV with the initial direction")
    _add_common(p)
    p.set_defaults(func=cmd_solve_ivp)

    p = sub.add_parser("analyze", help="compare a directory of trajectories")
    p.add_argument("trajectories", help="directory of path CSV files")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plot", help="render figures from solver outputs")
    p.add_argument("--path", action="append", help="path CSV to overlay; repeatable")
    p.add_argument("--trace", help="trace CSV from solve-bvp")
    p.add_argument("--analytics", help="analytics JSON from solve-bvp")
    _add_common(p)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("density-info", help="print provider capabilities")
    _add_common(p)
    p.set_defaults(func=cmd_density_info)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
