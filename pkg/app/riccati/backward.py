"""Backward integration of the risk-sensitive Riccati equations"""

import math
from dataclasses import dataclass

import numpy as np

from app.approx.finite_diff import symmetrize
from app.approx.trajectory import TimeVaryingLQ
from app.core.exceptions import ExistenceConditionError, NonFiniteError
from app.core.logging import logger
from app.riccati.existence import DEFAULT_PSD_TOLERANCE, first_violation, inverse_control_weights


@dataclass(frozen=True, eq=False)
class ValueQuadratic:
    """Psi_k(dx) = s0_k + s_vec_k' dx + 1/2 dx' S_k dx, dx measured from knot k's expansion point"""
    S: np.ndarray
    s_vec: np.ndarray
    s0: np.ndarray
    times: np.ndarray
    substeps: np.ndarray

    @property
    def grid_steps(self) -> int:
        return self.S.shape[0] - 1

    def evaluate(self, k: int, dx: np.ndarray) -> float:
        dx = np.asarray(dx, dtype=float)
        return float(self.s0[k] + self.s_vec[k] @ dx + 0.5 * dx @ self.S[k] @ dx)


class _FrozenInterval:
    """Zero-order-held coefficients of one interval, with the R^-1 products folded in"""

    def __init__(self, lq: TimeVaryingLQ, k: int, Rinv: np.ndarray):
        B, P = lq.B[k], lq.P[k]
        self.sigma = lq.sigma
        self.A = lq.A[k]
        self.B = B
        self.P = P
        self.Rinv = Rinv
        self.A_tilde = lq.A[k] - B @ Rinv @ P.T
        self.Q_tilde = lq.Q[k] - P @ Rinv @ P.T
        self.W = lq.noise_intensity(k)
        self.M = B @ Rinv @ B.T - lq.sigma * self.W
        self.q0 = lq.q0[k]
        self.qx = lq.qx[k]
        self.ru = lq.ru[k]
        self.c = lq.drift[k]

    def rates(self, S: np.ndarray, s: np.ndarray, s0: float):
        """-dS/dt, -ds/dt, -ds0/dt"""
        g = self.ru + self.B.T @ s
        Rinv_g = self.Rinv @ g
        SW = S @ self.W
        dS = self.Q_tilde + self.A_tilde.T @ S + S @ self.A_tilde - S @ self.M @ S
        ds = self.qx + self.A.T @ s - (self.P + S @ self.B) @ Rinv_g + self.sigma * (SW @ s) + S @ self.c
        ds0 = (
            self.q0
            - 0.5 * g @ Rinv_g
            + 0.5 * np.trace(SW)
            + 0.5 * self.sigma * (s @ self.W @ s)
            + s @ self.c
        )
        return dS, ds, ds0

    def substeps(self, S: np.ndarray, dt: float, stiffness_limit: float, max_substeps: int) -> int:
        """RK4 steps needed so that dt/m times the closed-loop rate stays below stiffness_limit"""
        rate = 2.0 * float(np.linalg.norm(self.A_tilde - self.M @ S, 2))
        if not math.isfinite(rate):
            return max_substeps
        return int(min(max_substeps, max(1, math.ceil(dt * rate / stiffness_limit))))

    def rk4(self, S: np.ndarray, s: np.ndarray, s0: float, h: float):
        k1 = self.rates(S, s, s0)
        k2 = self.rates(S + 0.5 * h * k1[0], s + 0.5 * h * k1[1], s0 + 0.5 * h * k1[2])
        k3 = self.rates(S + 0.5 * h * k2[0], s + 0.5 * h * k2[1], s0 + 0.5 * h * k2[2])
        k4 = self.rates(S + h * k3[0], s + h * k3[1], s0 + h * k3[2])
        S = S + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        s = s + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        s0 = s0 + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        return symmetrize(S), s, s0


def backward_pass(
    lq: TimeVaryingLQ,
    psd_tolerance: float = DEFAULT_PSD_TOLERANCE,
    stiffness_limit: float = 1.0,
    max_substeps: int = 10000,
) -> ValueQuadratic:
    """Integrate S, s_vec, s0 from their final values back to t = 0 with RK4 on each held interval"""
    violation = first_violation(lq, psd_tolerance)
    if violation is not None:
        raise ExistenceConditionError(violation.knot, violation.min_eigenvalue, lq.sigma)

    N, n = lq.grid_steps, lq.state_dim
    Rinv = inverse_control_weights(lq)
    S = np.empty((N + 1, n, n))
    s_vec = np.empty((N + 1, n))
    s0 = np.empty(N + 1)
    substeps = np.empty(N, dtype=int)
    S[N] = symmetrize(lq.terminal_Q)
    s_vec[N] = lq.terminal_qx
    s0[N] = lq.terminal_q0

    for k in range(N - 1, -1, -1):
        S_k, s_k, s0_k = S[k + 1], s_vec[k + 1], float(s0[k + 1])
        if lq.knot_states is not None:
            # move the expansion point from knot k+1 to knot k
            d = lq.knot_states[k] - lq.knot_states[k + 1]
            s0_k = s0_k + s_k @ d + 0.5 * d @ S_k @ d
            s_k = s_k + S_k @ d
        interval = _FrozenInterval(lq, k, Rinv[k])
        m = interval.substeps(S_k, lq.dt, stiffness_limit, max_substeps)
        h = lq.dt / m
        for _ in range(m):
            S_k, s_k, s0_k = interval.rk4(S_k, s_k, s0_k, h)
        if not (np.all(np.isfinite(S_k)) and np.all(np.isfinite(s_k)) and math.isfinite(s0_k)):
            raise NonFiniteError(
                f"backward pass diverged at knot {k} (sigma={lq.sigma:g})", stage="backward_pass", knot=k
            )
        S[k], s_vec[k], s0[k] = S_k, s_k, s0_k
        substeps[k] = m

    logger.debug(
        "Backward pass complete",
        extra={"grid_steps": N, "total_substeps": int(substeps.sum()), "sigma": lq.sigma},
    )
    for array in (S, s_vec, s0, substeps):
        array.setflags(write=False)
    return ValueQuadratic(S=S, s_vec=s_vec, s0=s0, times=lq.times, substeps=substeps)
