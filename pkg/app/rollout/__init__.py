"""Forward simulation, cost evaluation and Monte-Carlo statistics"""

from app.rollout.cost import evaluate_cost
from app.rollout.simulate import rollout_deterministic, rollout_stochastic
from app.rollout.stats import (
    CumulantReport,
    PolicyEvaluation,
    RolloutStats,
    StateBands,
    cumulant_report,
    estimate_risk_objective,
    evaluate_policy,
)

__all__ = [
    "CumulantReport",
    "PolicyEvaluation",
    "RolloutStats",
    "StateBands",
    "cumulant_report",
    "estimate_risk_objective",
    "evaluate_cost",
    "evaluate_policy",
    "rollout_deterministic",
    "rollout_stochastic",
]
