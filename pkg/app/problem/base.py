"""Optimal-control problem data model"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg

from app.core.exceptions import ControlWeightError, ValidationError

VectorFn = Callable[[float, np.ndarray], np.ndarray]
MatrixFn = Callable[[float, np.ndarray], np.ndarray]
ScalarFn = Callable[[float, np.ndarray], float]


@dataclass(frozen=True)
class AnalyticDerivatives:
    """Optional user-supplied derivatives; any hook left as None is finite-differenced.

    dynamics_jacobian(t, x, u) returns d(f + G u)/dx, state_cost_gradient(t, x) and
    state_cost_hessian(t, x) differentiate the running state cost, terminal_gradient(x)
    and terminal_hessian(x) the terminal cost.
    """
    dynamics_jacobian: Optional[Callable[[float, np.ndarray, np.ndarray], np.ndarray]] = None
    state_cost_gradient: Optional[VectorFn] = None
    state_cost_hessian: Optional[MatrixFn] = None
    terminal_gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    terminal_hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None


def _frozen_array(values, name: str, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=float, ndmin=ndim)
    if array.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {array.shape}", field=name)
    if not np.all(np.isfinite(array)):
        raise ValidationError(f"{name} must be finite", field=name)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ControlProblem:
    """Controlled SDE dx = (f + G u) dt + C dw with cost Phi + 1/2 u'Ru + u'r and terminal Phi_f"""

    state_dim: int
    control_dim: int
    noise_dim: int
    drift: VectorFn
    control_matrix: MatrixFn
    noise_matrix: MatrixFn
    noise_covariance: np.ndarray
    running_state_cost: ScalarFn
    control_weight: MatrixFn
    control_linear: VectorFn
    terminal_cost: Callable[[np.ndarray], float]
    horizon: float
    initial_state: np.ndarray
    risk_param: float = 0.0
    name: str = "custom"
    state_labels: Tuple[str, ...] = ()
    control_labels: Tuple[str, ...] = ()
    derivatives: AnalyticDerivatives = field(default_factory=AnalyticDerivatives)

    def __post_init__(self):
        for dim_name in ("state_dim", "control_dim", "noise_dim"):
            if int(getattr(self, dim_name)) < 1:
                raise ValidationError(f"{dim_name} must be a positive integer", field=dim_name)
        if not np.isfinite(self.horizon) or self.horizon <= 0:
            raise ValidationError(f"horizon must be > 0, got {self.horizon}", field="horizon")
        if not np.isfinite(self.risk_param):
            raise ValidationError("risk_param must be finite", field="risk_param")

        x0 = _frozen_array(self.initial_state, "initial_state", 1)
        if x0.shape != (self.state_dim,):
            raise ValidationError(
                f"initial_state has {x0.shape[0]} entries, expected {self.state_dim}",
                field="initial_state",
            )
        object.__setattr__(self, "initial_state", x0)

        sigma_w = _frozen_array(self.noise_covariance, "noise_covariance", 2)
        if sigma_w.shape != (self.noise_dim, self.noise_dim):
            raise ValidationError(
                f"noise_covariance has shape {sigma_w.shape}, expected {(self.noise_dim, self.noise_dim)}",
                field="noise_covariance",
            )
        if not np.allclose(sigma_w, sigma_w.T, rtol=0.0, atol=1e-12 * (1.0 + np.abs(sigma_w).max())):
            raise ValidationError("noise_covariance must be symmetric", field="noise_covariance")
        if linalg.eigvalsh(sigma_w)[0] < -1e-12 * (1.0 + np.abs(sigma_w).max()):
            raise ValidationError("noise_covariance must be positive semidefinite", field="noise_covariance")
        object.__setattr__(self, "noise_covariance", sigma_w)

        if not self.state_labels:
            object.__setattr__(self, "state_labels", tuple(f"x{i}" for i in range(self.state_dim)))
        if not self.control_labels:
            object.__setattr__(self, "control_labels", tuple(f"u{i}" for i in range(self.control_dim)))
        if len(self.state_labels) != self.state_dim or len(self.control_labels) != self.control_dim:
            raise ValidationError("label counts must match dimensions", field="state_labels")

        self.validate_at(0.0, x0)

    def validate_at(self, t: float, x: np.ndarray) -> None:
        """Check that every member function returns the declared shapes at (t, x)"""
        n, m, p = self.state_dim, self.control_dim, self.noise_dim
        expected = {
            "drift": (self.drift(t, x), (n,)),
            "control_matrix": (self.control_matrix(t, x), (n, m)),
            "noise_matrix": (self.noise_matrix(t, x), (n, p)),
            "control_weight": (self.control_weight(t, x), (m, m)),
            "control_linear": (self.control_linear(t, x), (m,)),
        }
        for name, (value, shape) in expected.items():
            if np.shape(value) != shape:
                raise ValidationError(
                    f"{name} returned shape {np.shape(value)}, expected {shape}", field=name
                )
        self.checked_control_weight(t, x)

    def checked_control_weight(self, t: float, x: np.ndarray, knot: Optional[int] = None) -> np.ndarray:
        """Symmetrized control weight, verified positive definite by Cholesky"""
        weight = np.asarray(self.control_weight(t, x), dtype=float)
        weight = 0.5 * (weight + weight.T)
        try:
            linalg.cholesky(weight, lower=True)
        except linalg.LinAlgError as e:
            where = f" at knot {knot}" if knot is not None else ""
            raise ControlWeightError(f"control weight is not positive definite{where}", knot=knot) from e
        return weight

    def dynamics(self, t: float, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Deterministic part of the SDE, f + G u"""
        return self.drift(t, x) + self.control_matrix(t, x) @ u

    def running_cost(self, t: float, x: np.ndarray, u: np.ndarray) -> float:
        """L(t, x, u) = Phi(t, x) + 1/2 u'R u + u'r"""
        weight = self.control_weight(t, x)
        return float(self.running_state_cost(t, x) + 0.5 * u @ weight @ u + u @ self.control_linear(t, x))

    def with_risk_param(self, sigma: float) -> "ControlProblem":
        return replace(self, risk_param=float(sigma))

    def with_noise_scale(self, scale: float) -> "ControlProblem":
        """Copy with every noise SD multiplied by scale"""
        if scale < 0 or not np.isfinite(scale):
            raise ValidationError(f"noise scale must be finite and >= 0, got {scale}", field="noise_scale")
        return replace(self, noise_covariance=self.noise_covariance * scale**2)

    def time_grid(self, grid_steps: int) -> np.ndarray:
        return np.linspace(0.0, self.horizon, grid_steps + 1)
