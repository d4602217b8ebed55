"""Monte-Carlo policy evaluation and risk-objective statistics"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from app.core.exceptions import RiskObjectiveOverflowError, ValidationError
from app.core.logging import logger
from app.problem.base import ControlProblem
from app.riccati.policy import AffinePolicy
from app.rollout.simulate import rollout_stochastic
from app.schemas.solver import SolverConfig

# Width of the narrow path band as a fraction of the per-knot SD
NARROW_BAND_FRACTION = 0.15


def estimate_risk_objective(samples: Sequence[float], sigma: float) -> float:
    """(1/sigma) log mean exp(sigma J), evaluated as a shifted log-sum-exp; the sample mean at sigma = 0"""
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        raise ValidationError("risk objective needs at least one sample", field="samples")
    if sigma == 0.0:
        return float(values.mean())
    sample_range = float(values.max() - values.min()) if np.all(np.isfinite(values)) else math.inf
    log_mean = special.logsumexp(sigma * values) - math.log(values.size)
    estimate = float(log_mean / sigma)
    if not math.isfinite(estimate):
        raise RiskObjectiveOverflowError(sigma, sample_range)
    return estimate


@dataclass(frozen=True, eq=False)
class RolloutStats:
    """Sample statistics of realized performance indices"""
    samples: np.ndarray
    mean: float
    variance: float
    skewness: float
    risk_objective: float
    sigma: float
    seed: int
    n_samples: int

    @classmethod
    def from_samples(cls, samples: Sequence[float], sigma: float, seed: int) -> "RolloutStats":
        values = np.array(samples, dtype=float)
        if values.size == 0:
            raise ValidationError("statistics need at least one sample", field="samples")
        values.setflags(write=False)
        return cls(
            samples=values,
            mean=float(values.mean()),
            variance=float(values.var()),
            # third central moment, not the standardized skewness
            skewness=float(stats.moment(values, 3)),
            risk_objective=estimate_risk_objective(values, sigma),
            sigma=float(sigma),
            seed=int(seed),
            n_samples=int(values.size),
        )


@dataclass(frozen=True)
class CumulantReport:
    """Truncations of mean + sigma/2 var + sigma^2/6 mu3 + ... next to the exact estimate"""
    sigma: float
    mean: float
    first_order: float
    second_order: float
    third_order: float
    risk_objective: float


def cumulant_report(rollout_stats: RolloutStats) -> CumulantReport:
    sigma = rollout_stats.sigma
    second = rollout_stats.mean + 0.5 * sigma * rollout_stats.variance
    third = second + sigma**2 / 6.0 * rollout_stats.skewness
    return CumulantReport(
        sigma=sigma,
        mean=rollout_stats.mean,
        first_order=rollout_stats.mean,
        second_order=second,
        third_order=third,
        risk_objective=rollout_stats.risk_objective,
    )


@dataclass(frozen=True, eq=False)
class StateBands:
    """Per-knot mean and SD of every state coordinate across samples"""
    times: np.ndarray
    mean: np.ndarray
    sd: np.ndarray

    @property
    def narrow(self) -> np.ndarray:
        return NARROW_BAND_FRACTION * self.sd

    def mean_sd(self) -> np.ndarray:
        """SD averaged over knots, one value per state coordinate"""
        return self.sd.mean(axis=0)


@dataclass(frozen=True, eq=False)
class PolicyEvaluation:
    stats: RolloutStats
    bands: StateBands


def evaluate_policy(
    problem: ControlProblem,
    policy: AffinePolicy,
    cfg: SolverConfig,
    n_samples: Optional[int] = None,
) -> PolicyEvaluation:
    """Run n_samples stochastic rollouts (cfg.mc_samples by default) and reduce them in sample order"""
    count = cfg.mc_samples if n_samples is None else n_samples
    if count < 1:
        raise ValidationError(f"sample count must be >= 1, got {count}", field="samples")

    def run(index: int):
        return rollout_stochastic(problem, policy, cfg, index)

    if cfg.max_workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.max_workers) as executor:
            outcomes = list(executor.map(run, range(count)))
    else:
        outcomes = [run(index) for index in range(count)]

    paths = np.stack([traj.states for traj, _ in outcomes])
    costs = [cost for _, cost in outcomes]
    rollout_stats = RolloutStats.from_samples(costs, problem.risk_param, cfg.rng_seed)
    bands = StateBands(
        times=outcomes[0][0].times,
        mean=paths.mean(axis=0),
        sd=paths.std(axis=0),
    )
    logger.info(
        f"Evaluated policy with {count} samples: mean {rollout_stats.mean:.6g}, "
        f"variance {rollout_stats.variance:.6g}, risk objective {rollout_stats.risk_objective:.6g}",
        extra={"sigma": problem.risk_param, "seed": cfg.rng_seed, "n_samples": count},
    )
    return PolicyEvaluation(stats=rollout_stats, bands=bands)
