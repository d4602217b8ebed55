"""Problem definitions, presets and config loading"""

from app.problem.base import AnalyticDerivatives, ControlProblem
from app.problem.loader import (
    build_problem,
    load_problem,
    load_problem_config,
    parse_problem_config,
    serialize_problem_config,
)
from app.problem.presets import PRESETS, make_cliff_world, make_scalar_lq

__all__ = [
    "AnalyticDerivatives",
    "ControlProblem",
    "PRESETS",
    "build_problem",
    "load_problem",
    "load_problem_config",
    "make_cliff_world",
    "make_scalar_lq",
    "parse_problem_config",
    "serialize_problem_config",
]
