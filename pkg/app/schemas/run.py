"""Run manifest and evaluation report schemas"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.problem import ProblemConfig
from app.schemas.solver import SolverConfig


class RunEntry(BaseModel):
    """Outcome of one sigma in a solve run"""
    sigma: float
    label: str
    termination: str
    iterations: int = Field(ge=0)
    final_cost: Optional[float] = None
    admissible_sigma_bound: Optional[float] = None
    error: Optional[str] = None
    trajectory_file: Optional[str] = None
    gains_file: Optional[str] = None
    costs_file: Optional[str] = None
    stats_file: Optional[str] = None


class RunManifest(BaseModel):
    """Index of everything a solve run wrote"""

    model_config = ConfigDict(extra="forbid")

    tool: str
    tool_version: str
    problem: ProblemConfig
    solver: SolverConfig
    results: List[RunEntry] = Field(default_factory=list)

    def entry_for(self, sigma: float) -> Optional[RunEntry]:
        for entry in self.results:
            if entry.sigma == sigma:
                return entry
        return None


class StatsReport(BaseModel):
    """Monte-Carlo statistics written to stats_sigma<label>.json"""
    sigma: float
    seed: int
    n_samples: int
    noise_scale: float = 1.0
    mean: float
    variance: float
    skewness: float
    risk_objective: float
    first_order: float
    second_order: float
    third_order: float
    mean_state_sd: List[float]
