"""Local linear-quadratic approximation"""

from app.approx.local_model import (
    CostExpansion,
    build_local_model,
    linearize_dynamics,
    quadratize_cost,
)
from app.approx.trajectory import TimeVaryingLQ, Trajectory

__all__ = [
    "CostExpansion",
    "TimeVaryingLQ",
    "Trajectory",
    "build_local_model",
    "linearize_dynamics",
    "quadratize_cost",
]
