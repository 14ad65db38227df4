"""Fixed-point iteration laboratory: the K iteration, its competitors, and
numerical checks of their convergence, stability and data dependence."""

from .errors import ConfigError, DomainError, FixiterError, NumericError
from .mappings import Mapping, PropertyReport, builtin_cbrt_map, get_mapping
from .numerics import BoxDomain, ParamSchedule, Point, convex_combine, distance, schedule_at
from .schemes import SchemeId, StepTrace, StopRule, Trajectory, run, step

__version__ = "0.1.0"

__all__ = [
    "BoxDomain",
    "ConfigError",
    "DomainError",
    "FixiterError",
    "Mapping",
    "NumericError",
    "ParamSchedule",
    "Point",
    "PropertyReport",
    "SchemeId",
    "StepTrace",
    "StopRule",
    "Trajectory",
    "builtin_cbrt_map",
    "convex_combine",
    "distance",
    "get_mapping",
    "run",
    "schedule_at",
    "step",
]
