"""Geodesics of inverse-density metrics.

A library and CLI for computing geodesics on spaces whose metric is the
identity scaled by the inverse probability density, given only score
(gradient-of-log-density) access: a boundary value solver, an initial value
solver, and path analytics (relative log-probability, geodesic distance,
derivative-norm profiles).
"""

from .analysis import (ComparisonReport, TrajectorySet, compare_trajectories,
                       gradient_norm_profile, perturb_path, smooth_path)
from .density import (ConditionalMixturePair, ConditioningSchedule, GaussianMixture,
                      GridField, ScoreProvider, ScoreResult, UniformDensity)
from .errors import (AntipodalError, CapabilityError, ConfigError, DegenerateStepError,
                     DimensionMismatchError, DomainError, GeodenseError,
                     MalformedResponseError, ProviderError, RemoteProviderError,
                     TransportError, ZeroVelocityError)
from .geometry import (AmbientSpace, geodesic_interpolate, project_to_tangent,
                       retract, sphere_radius_from_endpoints)
from .pathcalc import (DiscretePath, PathAnalytics, WeightFunction,
                       absolute_geodesic_distance, compute_analytics, el_residual,
                       fit_spline, functional_derivative, path_length_weighted,
                       relative_geodesic_distance, relative_log_probability,
                       reparameterize_constant_speed)
from .protocol import ExternalScoreProvider
from .solver_bvp import (BvpConfig, BvpTrace, bisect_path, bvp_step, init_path,
                         solve_bvp)
from .solver_ivp import IvpConfig, IvpState, init_velocity, ivp_rhs, solve_ivp

__version__ = "0.1.0"

__all__ = [
    "AmbientSpace", "AntipodalError", "BvpConfig", "BvpTrace", "CapabilityError",
    "ComparisonReport", "ConditionalMixturePair", "ConditioningSchedule",
    "ConfigError", "DegenerateStepError", "DimensionMismatchError", "DiscretePath",
    "DomainError", "ExternalScoreProvider", "GaussianMixture", "GeodenseError",
    "GridField", "IvpConfig", "IvpState", "MalformedResponseError", "PathAnalytics",
    "ProviderError", "RemoteProviderError", "ScoreProvider", "ScoreResult",
    "TrajectorySet", "TransportError", "UniformDensity", "WeightFunction",
    "ZeroVelocityError", "absolute_geodesic_distance", "bisect_path", "bvp_step",
    "compare_trajectories", "compute_analytics", "el_residual", "fit_spline",
    "functional_derivative", "geodesic_interpolate", "gradient_norm_profile",
    "init_path", "init_velocity", "ivp_rhs", "path_length_weighted", "perturb_path",
    "project_to_tangent", "relative_geodesic_distance", "relative_log_probability",
    "reparameterize_constant_speed", "retract", "smooth_path", "solve_bvp",
    "solve_ivp", "sphere_radius_from_endpoints",
]
