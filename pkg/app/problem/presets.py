"""Benchmark and validation problems"""

from typing import Callable, Dict, Optional, Sequence

import numpy as np

from app.core.exceptions import ValidationError
from app.problem.base import AnalyticDerivatives, ControlProblem

# Running-cost value returned at or below the cliff pole y = -10
CLIFF_COST_CAP = 1e9
CLIFF_POLE_MARGIN = 1e-6

CLIFF_HORIZON = 3.0
CLIFF_NOISE_SD = (0.1, 1.0)
CLIFF_INITIAL_STATE = (0.0, 0.0, 0.0, 0.0)
CLIFF_GOAL = (10.0, 0.0)
CLIFF_CONTROL_WEIGHT = np.diag([2.0, 0.02])

SCALAR_LQ_HORIZON = 1.0
SCALAR_LQ_INITIAL_STATE = 1.0


def _constant(matrix: np.ndarray) -> Callable[[float, np.ndarray], np.ndarray]:
    matrix = np.array(matrix, dtype=float)
    matrix.setflags(write=False)

    def value(t: float, x: np.ndarray) -> np.ndarray:
        return matrix

    return value


def cliff_penalty(y: float) -> float:
    """0.1 / (0.1 y + 1)^10, capped near the pole"""
    if y <= -10.0 + CLIFF_POLE_MARGIN:
        return CLIFF_COST_CAP
    return 0.1 / (0.1 * y + 1.0) ** 10


def cliff_world_derivatives(goal_state: Sequence[float] = CLIFF_GOAL) -> AnalyticDerivatives:
    """Closed-form derivatives of the cliff-world costs and dynamics"""
    gx, gy = (float(v) for v in goal_state)
    double_integrator = np.array(
        [[0.0, 0.0, 1.0, 0.0],
         [0.0, 0.0, 0.0, 1.0],
         [0.0, 0.0, 0.0, 0.0],
         [0.0, 0.0, 0.0, 0.0]]
    )

    def state_cost_gradient(t: float, x: np.ndarray) -> np.ndarray:
        grad = np.zeros(4)
        if x[1] > -10.0 + CLIFF_POLE_MARGIN:
            grad[1] = -0.1 * (0.1 * x[1] + 1.0) ** -11
        return grad

    def state_cost_hessian(t: float, x: np.ndarray) -> np.ndarray:
        hess = np.zeros((4, 4))
        if x[1] > -10.0 + CLIFF_POLE_MARGIN:
            hess[1, 1] = 0.11 * (0.1 * x[1] + 1.0) ** -12
        return hess

    def terminal_gradient(x: np.ndarray) -> np.ndarray:
        return np.array([200.0 * (x[0] - gx), 200.0 * (x[1] - gy), 20.0 * x[2], 20.0 * x[3]])

    def terminal_hessian(x: np.ndarray) -> np.ndarray:
        return np.diag([200.0, 200.0, 20.0, 20.0])

    return AnalyticDerivatives(
        dynamics_jacobian=lambda t, x, u: double_integrator,
        state_cost_gradient=state_cost_gradient,
        state_cost_hessian=state_cost_hessian,
        terminal_gradient=terminal_gradient,
        terminal_hessian=terminal_hessian,
    )


def make_cliff_world(
    sigma: float = 0.0,
    horizon: float = CLIFF_HORIZON,
    noise_sd: Sequence[float] = CLIFF_NOISE_SD,
    initial_state: Sequence[float] = CLIFF_INITIAL_STATE,
    goal_state: Sequence[float] = CLIFF_GOAL,
    analytic_derivatives: bool = False,
) -> ControlProblem:
    """Point mass that must reach the goal in the horizon without falling off the cliff at y = -10.

    State (x, y, vx, vy), control forces (ux, uy) on a unit mass, Brownian force noise on both
    channels. Running cost 0.1/(0.1y+1)^10 + ux^2 + 0.01 uy^2, terminal cost
    100(x-gx)^2 + 100(y-gy)^2 + 10(vx^2+vy^2).
    """
    if len(noise_sd) != 2:
        raise ValidationError(f"cliff_world takes 2 noise SDs, got {len(noise_sd)}", field="noise_sd")
    if len(goal_state) != 2:
        raise ValidationError(f"cliff_world goal_state has 2 entries, got {len(goal_state)}", field="goal_state")
    if len(initial_state) != 4:
        raise ValidationError(
            f"cliff_world initial_state has 4 entries, got {len(initial_state)}", field="initial_state"
        )
    gx, gy = (float(v) for v in goal_state)
    force_map = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    zero_linear = np.zeros(2)
    zero_linear.setflags(write=False)

    def drift(t: float, x: np.ndarray) -> np.ndarray:
        return np.array([x[2], x[3], 0.0, 0.0])

    def running_state_cost(t: float, x: np.ndarray) -> float:
        return cliff_penalty(x[1])

    def terminal_cost(x: np.ndarray) -> float:
        return float(100.0 * (x[0] - gx) ** 2 + 100.0 * (x[1] - gy) ** 2 + 10.0 * (x[2] ** 2 + x[3] ** 2))

    return ControlProblem(
        state_dim=4,
        control_dim=2,
        noise_dim=2,
        drift=drift,
        control_matrix=_constant(force_map),
        noise_matrix=_constant(force_map),
        noise_covariance=np.diag(np.square(np.asarray(noise_sd, dtype=float))),
        running_state_cost=running_state_cost,
        control_weight=_constant(CLIFF_CONTROL_WEIGHT),
        control_linear=lambda t, x: zero_linear,
        terminal_cost=terminal_cost,
        horizon=horizon,
        initial_state=initial_state,
        risk_param=sigma,
        name="cliff_world",
        state_labels=("x", "y", "vx", "vy"),
        control_labels=("ux", "uy"),
        derivatives=cliff_world_derivatives(goal_state) if analytic_derivatives else AnalyticDerivatives(),
    )


def make_scalar_lq(
    a: float,
    b: float,
    c: float,
    q: float,
    r_w: float,
    sigma: float,
    tf: float,
    initial_state: float = SCALAR_LQ_INITIAL_STATE,
    noise_covariance: float = 1.0,
    terminal_weight: float = 0.0,
    goal_state: float = 0.0,
) -> ControlProblem:
    """dx = (a x + b u) dt + c dw with cost 1/2 q (x-g)^2 + 1/2 r_w u^2 and terminal 1/2 q_f (x-g)^2"""
    if not r_w > 0:
        raise ValidationError(f"r_w must be > 0, got {r_w}", field="r_w")
    if q < 0:
        raise ValidationError(f"q must be >= 0, got {q}", field="q")
    if terminal_weight < 0:
        raise ValidationError(f"terminal_weight must be >= 0, got {terminal_weight}", field="terminal_weight")
    if not tf > 0:
        raise ValidationError(f"tf must be > 0, got {tf}", field="tf")
    goal = float(goal_state)
    zero_linear = np.zeros(1)
    zero_linear.setflags(write=False)

    return ControlProblem(
        state_dim=1,
        control_dim=1,
        noise_dim=1,
        drift=lambda t, x: a * x,
        control_matrix=_constant([[b]]),
        noise_matrix=_constant([[c]]),
        noise_covariance=[[noise_covariance]],
        running_state_cost=lambda t, x: 0.5 * q * float(x[0] - goal) ** 2,
        control_weight=_constant([[r_w]]),
        control_linear=lambda t, x: zero_linear,
        terminal_cost=lambda x: 0.5 * terminal_weight * float(x[0] - goal) ** 2,
        horizon=tf,
        initial_state=[initial_state],
        risk_param=sigma,
        name="scalar_lq",
        state_labels=("x",),
        control_labels=("u",),
    )


def _cliff_from_config(config) -> ControlProblem:
    return make_cliff_world(
        sigma=config.sigma,
        horizon=config.horizon if config.horizon is not None else CLIFF_HORIZON,
        noise_sd=config.noise_sd if config.noise_sd is not None else CLIFF_NOISE_SD,
        initial_state=config.initial_state if config.initial_state is not None else CLIFF_INITIAL_STATE,
        goal_state=config.goal_state if config.goal_state is not None else CLIFF_GOAL,
    )


def _single(values: Optional[Sequence[float]], default: float, field: str) -> float:
    if values is None:
        return default
    if len(values) != 1:
        raise ValidationError(f"scalar_lq {field} has 1 entry, got {len(values)}", field=field)
    return float(values[0])


def _scalar_lq_from_config(config) -> ControlProblem:
    # unit system A=0, B=C=Sigma=Q=R=1 with the flat-schema overrides
    noise_sd = _single(config.noise_sd, 1.0, "noise_sd")
    return make_scalar_lq(
        a=0.0,
        b=1.0,
        c=1.0,
        q=1.0,
        r_w=1.0,
        sigma=config.sigma,
        tf=config.horizon if config.horizon is not None else SCALAR_LQ_HORIZON,
        initial_state=_single(config.initial_state, SCALAR_LQ_INITIAL_STATE, "initial_state"),
        noise_covariance=noise_sd**2,
        goal_state=_single(config.goal_state, 0.0, "goal_state"),
    )


PRESETS: Dict[str, Callable] = {
    "cliff_world": _cliff_from_config,
    "scalar_lq": _scalar_lq_from_config,
}
