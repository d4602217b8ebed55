"""Linearization and quadratization along a nominal trajectory"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Tuple, TypeVar

import numpy as np

from app.approx import finite_diff as fd
from app.approx.trajectory import TimeVaryingLQ, Trajectory
from app.core.exceptions import NonFiniteError, ValidationError
from app.core.logging import logger
from app.problem.base import ControlProblem
from app.schemas.solver import SolverConfig

T = TypeVar("T")


@dataclass(frozen=True, eq=False)
class CostExpansion:
    """Second-order Taylor coefficients of the running and terminal cost"""
    q0: np.ndarray
    qx: np.ndarray
    ru: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    R: np.ndarray
    terminal_q0: float
    terminal_qx: np.ndarray
    terminal_Q: np.ndarray


def ensure_finite(value: np.ndarray, stage: str, knot: int) -> np.ndarray:
    """Raise NonFiniteError naming the knot and the last-axis coordinate of the first bad entry"""
    value = np.asarray(value, dtype=float)
    if np.all(np.isfinite(value)):
        return value
    bad = np.argwhere(~np.isfinite(np.atleast_1d(value)))[0]
    coordinate = int(bad[-1])
    raise NonFiniteError(
        f"non-finite value in {stage} at knot {knot}, coordinate {coordinate}",
        stage=stage,
        knot=knot,
        coordinate=coordinate,
    )


def map_knots(fn: Callable[[int], T], count: int, max_workers: int = 1) -> List[T]:
    """Evaluate fn on every knot index, in knot order"""
    if max_workers <= 1 or count < 2:
        return [fn(k) for k in range(count)]
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(fn, range(count)))


def _check_nominal(problem: ControlProblem, nominal: Trajectory) -> None:
    if nominal.states.shape[1] != problem.state_dim:
        raise ValidationError(
            f"nominal states have dimension {nominal.states.shape[1]}, problem has {problem.state_dim}",
            field="nominal.states",
        )
    if nominal.controls.shape[1] != problem.control_dim:
        raise ValidationError(
            f"nominal controls have dimension {nominal.controls.shape[1]}, problem has {problem.control_dim}",
            field="nominal.controls",
        )


def linearize_dynamics(
    problem: ControlProblem, nominal: Trajectory, cfg: SolverConfig
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """A_k = d(f + G u_k)/dx, B_k = G, C_k = C at every knot of the nominal"""
    _check_nominal(problem, nominal)
    hook = problem.derivatives.dynamics_jacobian

    def expand(k: int):
        t, x, u = float(nominal.times[k]), nominal.states[k], nominal.controls[k]
        if hook is not None:
            A = hook(t, x, u)
        else:
            # contracts dG/dx against u_k: column j is sum_m dG[:, m]/dx_j u_m
            A = fd.jacobian(lambda z: problem.dynamics(t, z, u), x, cfg.fd_step)
        A = ensure_finite(A, "linearize_dynamics", k)
        B = ensure_finite(problem.control_matrix(t, x), "linearize_dynamics", k)
        C = ensure_finite(problem.noise_matrix(t, x), "linearize_dynamics", k)
        return A, B, C

    per_knot = map_knots(expand, nominal.grid_steps, cfg.max_workers)
    A = np.stack([item[0] for item in per_knot])
    B = np.stack([item[1] for item in per_knot])
    C = np.stack([item[2] for item in per_knot])
    return A, B, C


def quadratize_cost(problem: ControlProblem, nominal: Trajectory, cfg: SolverConfig) -> CostExpansion:
    """Per-unit-time Taylor coefficients of L = Phi + 1/2 u'Ru + u'r about each (x_k, u_k)"""
    _check_nominal(problem, nominal)
    hooks = problem.derivatives
    h = cfg.fd_step

    def expand(k: int):
        t, x, u = float(nominal.times[k]), nominal.states[k], nominal.controls[k]
        R = problem.checked_control_weight(t, x, knot=k)
        r = np.asarray(problem.control_linear(t, x), dtype=float)

        def control_terms(z: np.ndarray) -> float:
            return float(0.5 * u @ problem.control_weight(t, z) @ u + u @ problem.control_linear(t, z))

        q0 = problem.running_cost(t, x, u)
        if hooks.state_cost_gradient is not None:
            qx = hooks.state_cost_gradient(t, x) + fd.gradient(control_terms, x, h)
        else:
            qx = fd.gradient(lambda z: problem.running_cost(t, z, u), x, h)
        if hooks.state_cost_hessian is not None:
            Q = fd.symmetrize(np.asarray(hooks.state_cost_hessian(t, x), dtype=float))
        else:
            Q = fd.hessian(lambda z: float(problem.running_state_cost(t, z)), x, h)
        P = fd.jacobian(
            lambda z: problem.control_weight(t, z) @ u + problem.control_linear(t, z), x, h
        ).T
        ru = R @ u + r
        for value in (q0, qx, Q, P, ru):
            ensure_finite(value, "quadratize_cost", k)
        return q0, qx, ru, Q, P, R

    per_knot = map_knots(expand, nominal.grid_steps, cfg.max_workers)

    x_final = nominal.final_state
    N = nominal.grid_steps
    terminal_q0 = float(problem.terminal_cost(x_final))
    if hooks.terminal_gradient is not None:
        terminal_qx = np.asarray(hooks.terminal_gradient(x_final), dtype=float)
    else:
        terminal_qx = fd.gradient(problem.terminal_cost, x_final, h)
    if hooks.terminal_hessian is not None:
        terminal_Q = fd.symmetrize(np.asarray(hooks.terminal_hessian(x_final), dtype=float))
    else:
        terminal_Q = fd.hessian(problem.terminal_cost, x_final, h, f0=terminal_q0)
    for value in (terminal_q0, terminal_qx, terminal_Q):
        ensure_finite(value, "quadratize_cost", N)

    return CostExpansion(
        q0=np.array([item[0] for item in per_knot]),
        qx=np.stack([item[1] for item in per_knot]),
        ru=np.stack([item[2] for item in per_knot]),
        Q=np.stack([item[3] for item in per_knot]),
        P=np.stack([item[4] for item in per_knot]),
        R=np.stack([item[5] for item in per_knot]),
        terminal_q0=terminal_q0,
        terminal_qx=terminal_qx,
        terminal_Q=terminal_Q,
    )


def build_local_model(problem: ControlProblem, nominal: Trajectory, cfg: SolverConfig) -> TimeVaryingLQ:
    """Affine dynamics and quadratic cost about every knot of the nominal"""
    A, B, C = linearize_dynamics(problem, nominal, cfg)
    cost = quadratize_cost(problem, nominal, cfg)
    drift = np.stack(
        [
            problem.dynamics(float(nominal.times[k]), nominal.states[k], nominal.controls[k])
            for k in range(nominal.grid_steps)
        ]
    )
    logger.debug(
        "Built local model",
        extra={"grid_steps": nominal.grid_steps, "terminal_q0": cost.terminal_q0},
    )
    return TimeVaryingLQ(
        A=A,
        B=B,
        C=C,
        q0=cost.q0,
        qx=cost.qx,
        ru=cost.ru,
        Q=cost.Q,
        P=cost.P,
        R=cost.R,
        terminal_q0=cost.terminal_q0,
        terminal_qx=cost.terminal_qx,
        terminal_Q=cost.terminal_Q,
        dt=nominal.dt,
        sigma=problem.risk_param,
        Sigma=problem.noise_covariance,
        drift=drift,
        knot_states=nominal.states,
    )
