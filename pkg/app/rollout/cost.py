"""Performance index of a trajectory"""

import math

from app.approx.trajectory import Trajectory
from app.core.exceptions import NonFiniteError, ValidationError
from app.problem.base import ControlProblem
from app.schemas.solver import SolverConfig


def evaluate_cost(problem: ControlProblem, traj: Trajectory, cfg: SolverConfig) -> float:
    """Rectangle rule over the held controls plus the terminal cost (the exponent of the risk objective)"""
    if traj.grid_steps != cfg.grid_steps:
        raise ValidationError(
            f"trajectory has {traj.grid_steps} steps, solver grid has {cfg.grid_steps}", field="grid_steps"
        )
    dt = traj.dt
    total = 0.0
    for k in range(traj.grid_steps):
        stage = problem.running_cost(float(traj.times[k]), traj.states[k], traj.controls[k])
        if not math.isfinite(stage):
            raise NonFiniteError(f"non-finite running cost at knot {k}", stage="cost", knot=k)
        total += stage * dt
    terminal = float(problem.terminal_cost(traj.final_state))
    if not math.isfinite(terminal):
        raise NonFiniteError("non-finite terminal cost", stage="cost", knot=traj.grid_steps)
    return total + terminal
