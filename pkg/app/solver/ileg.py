"""ILEG outer loop: rollout, local model, backward pass, policy update, line search"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from app.approx.local_model import build_local_model
from app.approx.trajectory import TimeVaryingLQ, Trajectory
from app.core.exceptions import ExistenceConditionError, IlegException, NonFiniteError
from app.core.logging import logger
from app.problem.base import ControlProblem
from app.riccati.backward import ValueQuadratic, backward_pass
from app.riccati.existence import admissible_sigma_bound, existence_spectrum
from app.riccati.policy import AffinePolicy, extract_policy, fixed_point_residual
from app.rollout.cost import evaluate_cost
from app.rollout.simulate import rollout_deterministic
from app.schemas.solver import LineSearchMerit, SolverConfig


class Termination(str, Enum):
    """Why the outer loop stopped"""
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    EXISTENCE_VIOLATION = "existence_violation"
    LINE_SEARCH_FAILED = "line_search_failed"
    NON_FINITE = "non_finite"
    ERROR = "error"


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    alpha: float
    cost: float
    merit: float
    relative_change: float
    min_existence_eigenvalue: float
    max_feedforward: float
    max_feedback: float


@dataclass(frozen=True)
class ExistenceFailure:
    knot: int
    min_eigenvalue: float
    message: str


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Final iterate of ileg_solve.

    policy is the update extracted at the final nominal (l, L of the last backward pass);
    for existence failures it is the policy that produced the nominal.
    """
    sigma: float
    policy: AffinePolicy
    nominal: Optional[Trajectory]
    value: Optional[ValueQuadratic]
    cost_history: Tuple[float, ...]
    merit_history: Tuple[float, ...]
    iterations: int
    termination: Termination
    diagnostics: Tuple[IterationRecord, ...]
    final_relative_change: float = math.inf
    admissible_sigma_bound: Optional[float] = None
    existence_failure: Optional[ExistenceFailure] = None
    error: Optional[str] = None

    @property
    def converged(self) -> bool:
        return self.termination is Termination.CONVERGED

    @property
    def final_cost(self) -> Optional[float]:
        return self.cost_history[-1] if self.cost_history else None


@dataclass(frozen=True, eq=False)
class _Iterate:
    """A rolled-out nominal with its local model and the update computed there"""
    nominal: Trajectory
    cost: float
    lq: TimeVaryingLQ
    value: ValueQuadratic
    update: AffinePolicy
    merit: float


def relative_change(previous: float, current: float) -> float:
    return abs(previous - current) / max(abs(previous), 1e-12)


def meets_tolerance(
    change: float, merit: float, cost: float, cfg: SolverConfig, merit_kind: LineSearchMerit
) -> bool:
    """Relative cost change within cost_tolerance and, under the residual merit, a fixed-point
    residual within residual_tolerance of max(|cost|, 1)"""
    if change > cfg.cost_tolerance:
        return False
    if merit_kind is LineSearchMerit.COST:
        return True
    return merit <= cfg.residual_tolerance * max(abs(cost), 1.0)


def _expand(
    problem: ControlProblem,
    nominal: Trajectory,
    cost: float,
    cfg: SolverConfig,
    merit_kind: LineSearchMerit,
) -> _Iterate:
    lq = build_local_model(problem, nominal, cfg)
    value = backward_pass(
        lq,
        psd_tolerance=cfg.psd_tolerance,
        stiffness_limit=cfg.stiffness_limit,
        max_substeps=cfg.max_substeps,
    )
    update = extract_policy(lq, value, nominal)
    merit = cost if merit_kind is LineSearchMerit.COST else fixed_point_residual(lq, update)
    return _Iterate(nominal=nominal, cost=cost, lq=lq, value=value, update=update, merit=merit)


def _alphas(cfg: SolverConfig):
    alpha = 1.0
    while alpha >= cfg.line_search_min_alpha:
        yield alpha
        alpha *= cfg.line_search_shrink


def _line_search(
    problem: ControlProblem,
    cfg: SolverConfig,
    point: _Iterate,
    merit_kind: LineSearchMerit,
) -> Tuple[Optional[_Iterate], float, Optional[float]]:
    """First alpha whose trial strictly lowers the merit; also returns the full step's cost"""
    full_step_cost: Optional[float] = None
    for alpha in _alphas(cfg):
        try:
            nominal = rollout_deterministic(problem, point.update.with_alpha(alpha), cfg)
            cost = evaluate_cost(problem, nominal, cfg)
        except NonFiniteError as exc:
            logger.debug(f"Rejected alpha={alpha:g}: {exc.message}")
            continue
        if alpha == 1.0:
            full_step_cost = cost
        if merit_kind is LineSearchMerit.COST:
            if cost < point.cost:
                return _Iterate(nominal, cost, point.lq, point.value, point.update, cost), alpha, full_step_cost
            continue
        try:
            trial = _expand(problem, nominal, cost, cfg, merit_kind)
        except (ExistenceConditionError, NonFiniteError) as exc:
            logger.debug(f"Rejected alpha={alpha:g}: {exc.message}")
            continue
        if trial.merit < point.merit:
            return trial, alpha, full_step_cost
    return None, 0.0, full_step_cost


def _record(iteration: int, alpha: float, point: _Iterate, change: float, cfg: SolverConfig) -> IterationRecord:
    min_eigenvalues, _ = existence_spectrum(point.lq, cfg.psd_tolerance)
    return IterationRecord(
        iteration=iteration,
        alpha=alpha,
        cost=point.cost,
        merit=point.merit,
        relative_change=change,
        min_existence_eigenvalue=float(min_eigenvalues.min()),
        max_feedforward=point.update.max_feedforward(),
        max_feedback=point.update.max_feedback_norm(),
    )


def ileg_solve(
    problem: ControlProblem,
    cfg: SolverConfig,
    initial_policy: Optional[AffinePolicy] = None,
) -> SolveResult:
    """Iterate local risk-sensitive LQ solutions until meets_tolerance holds"""
    sigma = problem.risk_param
    merit_kind = cfg.merit_for(sigma)
    policy = initial_policy or AffinePolicy.zero(
        problem.time_grid(cfg.grid_steps), problem.initial_state, problem.control_dim
    )
    nominal = rollout_deterministic(problem, policy, cfg)
    cost = evaluate_cost(problem, nominal, cfg)
    logger.info(
        f"ILEG start: sigma={sigma:g}, initial cost {cost:.6g}, merit {merit_kind.value}",
        extra={"sigma": sigma, "grid_steps": cfg.grid_steps, "merit": merit_kind.value},
    )

    try:
        point = _expand(problem, nominal, cost, cfg, merit_kind)
    except ExistenceConditionError as exc:
        logger.warning(f"ILEG stopped: {exc.message}", extra=exc.details)
        return SolveResult(
            sigma=sigma,
            policy=policy,
            nominal=nominal,
            value=None,
            cost_history=(cost,),
            merit_history=(),
            iterations=0,
            termination=Termination.EXISTENCE_VIOLATION,
            diagnostics=(),
            existence_failure=ExistenceFailure(exc.knot, exc.min_eigenvalue, exc.message),
        )
    bound = admissible_sigma_bound(point.lq)
    logger.info(f"Admissible sigma bound for this model: {bound:g}", extra={"sigma_bound": bound})

    cost_history: List[float] = [point.cost]
    merit_history: List[float] = [point.merit]
    diagnostics: List[IterationRecord] = []
    termination = Termination.MAX_ITERATIONS
    change = math.inf
    iteration = 0
    existence_failure: Optional[ExistenceFailure] = None

    for iteration in range(1, cfg.max_iterations + 1):
        trial, alpha, full_step_cost = _line_search(problem, cfg, point, merit_kind)
        if trial is None:
            full_change = math.inf if full_step_cost is None else relative_change(point.cost, full_step_cost)
            if meets_tolerance(full_change, point.merit, point.cost, cfg, merit_kind):
                change = full_change
                termination = Termination.CONVERGED
            else:
                termination = Termination.LINE_SEARCH_FAILED
            break

        change = relative_change(point.cost, trial.cost)
        if merit_kind is LineSearchMerit.COST:
            # the model at the accepted nominal feeds the next iteration and the returned policy
            try:
                trial = _expand(problem, trial.nominal, trial.cost, cfg, merit_kind)
            except ExistenceConditionError as exc:
                existence_failure = ExistenceFailure(exc.knot, exc.min_eigenvalue, exc.message)
                termination = Termination.EXISTENCE_VIOLATION
                break
        point = trial
        cost_history.append(point.cost)
        merit_history.append(point.merit)
        record = _record(iteration, alpha, point, change, cfg)
        diagnostics.append(record)
        logger.info(
            f"iteration {iteration}: cost {point.cost:.10g}, merit {point.merit:.6g}, "
            f"alpha {alpha:g}, relative change {change:.3g}",
            extra={"sigma": sigma, "iteration": iteration, "alpha": alpha, "cost": point.cost},
        )
        if meets_tolerance(change, point.merit, point.cost, cfg, merit_kind):
            termination = Termination.CONVERGED
            break

    logger.info(
        f"ILEG finished: sigma={sigma:g}, {termination.value} after {iteration} iterations, "
        f"cost {point.cost:.10g}",
        extra={"sigma": sigma, "termination": termination.value, "iterations": iteration},
    )
    return SolveResult(
        sigma=sigma,
        policy=point.update,
        nominal=point.nominal,
        value=point.value,
        cost_history=tuple(cost_history),
        merit_history=tuple(merit_history),
        iterations=iteration,
        termination=termination,
        diagnostics=tuple(diagnostics),
        final_relative_change=change,
        admissible_sigma_bound=bound,
        existence_failure=existence_failure,
    )


def failed_result(problem: ControlProblem, cfg: SolverConfig, exc: IlegException) -> SolveResult:
    """Placeholder result for a solve that raised before producing any iterate"""
    policy = AffinePolicy.zero(problem.time_grid(cfg.grid_steps), problem.initial_state, problem.control_dim)
    return SolveResult(
        sigma=problem.risk_param,
        policy=policy,
        nominal=None,
        value=None,
        cost_history=(),
        merit_history=(),
        iterations=0,
        termination=Termination.NON_FINITE if isinstance(exc, NonFiniteError) else Termination.ERROR,
        diagnostics=(),
        error=exc.message,
    )


def gain_magnitudes(
    result: SolveResult, row: int, column: int, knots: Optional[np.ndarray] = None
) -> np.ndarray:
    """|L_k[row, column]| over the given knots (all knots by default)"""
    fb = result.policy.fb
    selected = fb if knots is None else fb[knots]
    return np.abs(selected[:, row, column])
