"""Independent solves over a list of risk parameters"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence

from app.core.exceptions import IlegException, ValidationError
from app.core.logging import logger
from app.problem.base import ControlProblem
from app.schemas.solver import SolverConfig
from app.solver.ileg import SolveResult, failed_result, ileg_solve


def _solve_one(problem: ControlProblem, cfg: SolverConfig, sigma: float) -> SolveResult:
    entry_problem = problem.with_risk_param(sigma)
    try:
        return ileg_solve(entry_problem, cfg)
    except IlegException as exc:
        logger.error(
            f"Solve failed for sigma={sigma:g}: {exc.message}",
            extra={"sigma": sigma, "error_code": exc.error_code},
        )
        return failed_result(entry_problem, cfg, exc)


def sigma_sweep(problem: ControlProblem, cfg: SolverConfig, sigmas: Sequence[float]) -> List[SolveResult]:
    """One ileg_solve per sigma, returned in input order; failures stay in their slot"""
    values = [float(sigma) for sigma in sigmas]
    if any(not math.isfinite(sigma) for sigma in values):
        raise ValidationError("sigmas must be finite", field="sigma")
    if not values:
        return []

    logger.info(f"Sigma sweep over {values}", extra={"sigmas": values, "max_workers": cfg.max_workers})
    if cfg.max_workers > 1 and len(values) > 1:
        # inner per-knot work stays sequential when entries already run in parallel
        inner = cfg.model_copy(update={"max_workers": 1})
        with ThreadPoolExecutor(max_workers=cfg.max_workers) as executor:
            return list(executor.map(lambda sigma: _solve_one(problem, inner, sigma), values))
    return [_solve_one(problem, cfg, sigma) for sigma in values]
