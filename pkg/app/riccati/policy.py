"""Affine feedback policy and its extraction from the value expansion"""

from dataclasses import dataclass, replace

import numpy as np

from app.approx.trajectory import TimeVaryingLQ, Trajectory
from app.core.exceptions import ValidationError
from app.riccati.backward import ValueQuadratic
from app.riccati.existence import inverse_control_weights


@dataclass(frozen=True, eq=False)
class AffinePolicy:
    """u(t_k, x) = u_nom_k + alpha * ff_k + fb_k (x - x_nom_k)"""

    nominal: Trajectory
    ff: np.ndarray
    fb: np.ndarray
    alpha: float = 1.0

    def __post_init__(self):
        ff = np.array(self.ff, dtype=float)
        fb = np.array(self.fb, dtype=float)
        N, m = self.nominal.controls.shape
        n = self.nominal.states.shape[1]
        if ff.shape != (N, m):
            raise ValidationError(f"ff has shape {ff.shape}, expected {(N, m)}", field="ff")
        if fb.shape != (N, m, n):
            raise ValidationError(f"fb has shape {fb.shape}, expected {(N, m, n)}", field="fb")
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError(f"alpha must be in (0, 1], got {self.alpha}", field="alpha")
        ff.setflags(write=False)
        fb.setflags(write=False)
        object.__setattr__(self, "ff", ff)
        object.__setattr__(self, "fb", fb)
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def zero(cls, times: np.ndarray, initial_state: np.ndarray, control_dim: int) -> "AffinePolicy":
        """u = 0 everywhere, no feedback"""
        nominal = Trajectory.constant(times, initial_state, control_dim)
        N, n = len(times) - 1, len(initial_state)
        return cls(nominal=nominal, ff=np.zeros((N, control_dim)), fb=np.zeros((N, control_dim, n)))

    @property
    def grid_steps(self) -> int:
        return self.nominal.grid_steps

    def control(self, k: int, x: np.ndarray) -> np.ndarray:
        return self.nominal.controls[k] + self.alpha * self.ff[k] + self.fb[k] @ (x - self.nominal.states[k])

    def with_alpha(self, alpha: float) -> "AffinePolicy":
        return replace(self, alpha=alpha)

    def max_feedforward(self) -> float:
        return float(np.abs(self.ff).max()) if self.ff.size else 0.0

    def max_feedback_norm(self) -> float:
        if not self.fb.size:
            return 0.0
        return float(np.linalg.norm(self.fb, ord=2, axis=(1, 2)).max())


def extract_policy(lq: TimeVaryingLQ, value: ValueQuadratic, nominal: Trajectory) -> AffinePolicy:
    """l_k = -R^-1 (r_k + B^T s_k), L_k = -R^-1 (P^T + B^T S_k), alpha = 1"""
    if value.grid_steps != lq.grid_steps or nominal.grid_steps != lq.grid_steps:
        raise ValidationError("value, model and nominal must share one grid", field="grid_steps")
    Rinv = inverse_control_weights(lq)
    Bt = np.swapaxes(lq.B, 1, 2)
    S = value.S[:-1]
    s_vec = value.s_vec[:-1]
    ff = -np.einsum("kij,kj->ki", Rinv, lq.ru + np.einsum("kij,kj->ki", Bt, s_vec))
    fb = -Rinv @ (np.swapaxes(lq.P, 1, 2) + Bt @ S)
    return AffinePolicy(nominal=nominal, ff=ff, fb=fb, alpha=1.0)


def fixed_point_residual(lq: TimeVaryingLQ, policy: AffinePolicy) -> float:
    """sum_k l_k' R_k l_k dt, zero exactly when the update leaves the nominal unchanged"""
    weighted = np.einsum("ki,kij,kj->k", policy.ff, lq.R, policy.ff)
    return float(weighted.sum() * lq.dt)
