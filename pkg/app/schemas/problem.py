"""Problem-config file schema"""

import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class ProblemConfig(BaseModel):
    """Flat JSON problem configuration: a preset name plus optional overrides"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    preset: str = Field(..., description="Preset name, see app.problem.presets.PRESETS")
    sigma: float = Field(0.0, description="Risk parameter")
    horizon: Optional[float] = Field(None, gt=0, description="Horizon in seconds")
    noise_sd: Optional[List[float]] = Field(None, description="Per-channel noise SD")
    initial_state: Optional[List[float]] = None
    goal_state: Optional[List[float]] = None

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, value: str) -> str:
        # local import: presets depend on this schema
        from app.problem.presets import PRESETS

        if value not in PRESETS:
            known = ", ".join(sorted(PRESETS))
            raise ValueError(f"unknown preset '{value}' (expected one of: {known})")
        return value

    @field_validator("sigma", "horizon")
    @classmethod
    def _finite(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @field_validator("noise_sd")
    @classmethod
    def _non_negative(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and any(not math.isfinite(v) or v < 0 for v in value):
            raise ValueError("noise standard deviations must be finite and >= 0")
        return value

    @field_validator("initial_state", "goal_state")
    @classmethod
    def _finite_vector(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and any(not math.isfinite(v) for v in value):
            raise ValueError("entries must be finite")
        return value
