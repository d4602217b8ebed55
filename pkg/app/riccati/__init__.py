"""Risk-sensitive Riccati backward pass and policy extraction"""

from app.riccati.backward import ValueQuadratic, backward_pass
from app.riccati.existence import (
    ExistenceReport,
    admissible_sigma_bound,
    check_existence,
    check_existence_all,
    existence_spectrum,
    first_violation,
)
from app.riccati.policy import AffinePolicy, extract_policy, fixed_point_residual

__all__ = [
    "AffinePolicy",
    "ExistenceReport",
    "ValueQuadratic",
    "admissible_sigma_bound",
    "backward_pass",
    "check_existence",
    "check_existence_all",
    "existence_spectrum",
    "extract_policy",
    "first_violation",
    "fixed_point_residual",
]
