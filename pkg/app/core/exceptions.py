"""Custom exceptions"""

from typing import Optional, Dict, Any


class IlegException(Exception):
    """Base exception for the solver"""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)


class ValidationError(IlegException):
    """Validation error"""

    def __init__(self, message: str, field: Optional[str] = None):
        details = {"field": field} if field else {}
        super().__init__(message, error_code="VALIDATION_ERROR", details=details)


class NotFoundError(IlegException):
    """Resource not found"""

    def __init__(self, resource: str):
        super().__init__(f"{resource} not found", error_code="NOT_FOUND")


class NonFiniteError(IlegException):
    """NaN or inf produced while integrating, differencing or costing"""

    def __init__(
        self,
        message: str,
        stage: Optional[str] = None,
        knot: Optional[int] = None,
        coordinate: Optional[int] = None,
    ):
        details: Dict[str, Any] = {}
        if stage is not None:
            details["stage"] = stage
        if knot is not None:
            details["knot"] = knot
        if coordinate is not None:
            details["coordinate"] = coordinate
        super().__init__(message, error_code="NON_FINITE", details=details)

    @property
    def knot(self) -> Optional[int]:
        return self.details.get("knot")


class ExistenceConditionError(IlegException):
    """B R^-1 B^T - sigma C Sigma C^T is not positive semidefinite"""

    def __init__(self, knot: int, min_eigenvalue: float, sigma: float):
        message = (
            f"existence condition violated at knot {knot}: "
            f"min eigenvalue of B R^-1 B^T - sigma C Sigma C^T is {min_eigenvalue:.6g} "
            f"(sigma={sigma:g})"
        )
        super().__init__(
            message,
            error_code="EXISTENCE_VIOLATION",
            details={"knot": knot, "min_eigenvalue": min_eigenvalue, "sigma": sigma},
        )

    @property
    def knot(self) -> int:
        return self.details["knot"]

    @property
    def min_eigenvalue(self) -> float:
        return self.details["min_eigenvalue"]


class ControlWeightError(IlegException):
    """Control weight is not symmetric positive definite"""

    def __init__(self, message: str, knot: Optional[int] = None):
        details = {"knot": knot} if knot is not None else {}
        super().__init__(message, error_code="CONTROL_WEIGHT_ERROR", details=details)


class RiskObjectiveOverflowError(IlegException):
    """exp(sigma * cost) overflows even after shifting"""

    def __init__(self, sigma: float, sample_range: float):
        super().__init__(
            f"risk objective overflow: sigma * range of samples = {sigma * sample_range:.6g}",
            error_code="OVERFLOW",
            details={"sigma": sigma, "sample_range": sample_range},
        )
