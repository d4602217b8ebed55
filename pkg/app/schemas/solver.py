"""Solver configuration schema"""

from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from app.core.config import Settings, settings


class LineSearchMerit(str, Enum):
    """Quantity the line search must strictly decrease"""
    AUTO = "auto"
    COST = "cost"
    RESIDUAL = "residual"


class SolverConfig(BaseModel):
    """Discretization, termination and sampling parameters"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    grid_steps: int = Field(300, ge=2)
    max_iterations: int = Field(100, ge=1)
    cost_tolerance: float = Field(1e-6, gt=0)
    residual_tolerance: float = Field(1e-6, gt=0)
    fd_step: float = Field(1e-4, gt=0)
    line_search_shrink: float = Field(0.5, gt=0, lt=1)
    line_search_min_alpha: float = Field(1.0 / 64.0, gt=0, lt=1)
    line_search_merit: LineSearchMerit = LineSearchMerit.AUTO
    rng_seed: int = Field(0, ge=0)
    mc_samples: int = Field(1000, ge=1)
    psd_tolerance: float = Field(1e-9, ge=0)
    stiffness_limit: float = Field(1.0, gt=0)
    max_substeps: int = Field(10000, ge=1)
    max_workers: int = Field(1, ge=1)

    @classmethod
    def from_settings(cls, source: Settings = settings, **overrides: Any) -> "SolverConfig":
        """Build from the process settings, with explicit overrides winning"""
        values = {
            name: getattr(source, name)
            for name in cls.model_fields
            if hasattr(source, name)
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def dt(self, horizon: float) -> float:
        """Uniform step for a given horizon"""
        return horizon / self.grid_steps

    def merit_for(self, sigma: float) -> LineSearchMerit:
        """Resolve AUTO: plain cost when risk-neutral, fixed-point residual otherwise"""
        if self.line_search_merit is not LineSearchMerit.AUTO:
            return self.line_search_merit
        return LineSearchMerit.COST if sigma == 0.0 else LineSearchMerit.RESIDUAL
