"""Pydantic schemas"""

from app.schemas.problem import ProblemConfig
from app.schemas.run import RunEntry, RunManifest, StatsReport
from app.schemas.solver import LineSearchMerit, SolverConfig

__all__ = [
    "LineSearchMerit",
    "ProblemConfig",
    "RunEntry",
    "RunManifest",
    "SolverConfig",
    "StatsReport",
]
