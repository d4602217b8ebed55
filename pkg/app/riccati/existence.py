"""Existence condition of the risk-sensitive Riccati solution"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from app.approx.trajectory import TimeVaryingLQ
from app.core.exceptions import ControlWeightError

DEFAULT_PSD_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ExistenceReport:
    """Minimum eigenvalue of B R^-1 B^T - sigma C Sigma C^T at one knot"""
    knot: int
    min_eigenvalue: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.min_eigenvalue >= -self.tolerance


def control_authority(lq: TimeVaryingLQ, k: int) -> np.ndarray:
    """B R^-1 B^T at knot k"""
    try:
        factor = linalg.cho_factor(lq.R[k])
    except linalg.LinAlgError as e:
        raise ControlWeightError(f"control weight is not positive definite at knot {k}", knot=k) from e
    return lq.B[k] @ linalg.cho_solve(factor, lq.B[k].T)


def existence_matrix(lq: TimeVaryingLQ, k: int) -> np.ndarray:
    M = control_authority(lq, k) - lq.sigma * lq.noise_intensity(k)
    return 0.5 * (M + M.T)


def check_existence(
    lq: TimeVaryingLQ, k: int, psd_tolerance: float = DEFAULT_PSD_TOLERANCE
) -> ExistenceReport:
    """PSD test of M_k with tolerance psd_tolerance * (1 + ||M_k||)"""
    if not 0 <= k < lq.grid_steps:
        raise IndexError(f"knot {k} out of range [0, {lq.grid_steps})")
    M = existence_matrix(lq, k)
    min_eigenvalue = float(linalg.eigvalsh(M)[0])
    tolerance = psd_tolerance * (1.0 + float(np.linalg.norm(M, 2)))
    return ExistenceReport(knot=k, min_eigenvalue=min_eigenvalue, tolerance=tolerance)


def check_existence_all(
    lq: TimeVaryingLQ, psd_tolerance: float = DEFAULT_PSD_TOLERANCE
) -> List[ExistenceReport]:
    return [check_existence(lq, k, psd_tolerance) for k in range(lq.grid_steps)]


def inverse_control_weights(lq: TimeVaryingLQ) -> np.ndarray:
    """R_k^-1 for every knot, after a Cholesky check of the whole stack"""
    try:
        np.linalg.cholesky(lq.R)
    except np.linalg.LinAlgError:
        for k in range(lq.grid_steps):
            control_authority(lq, k)
        raise
    Rinv = np.linalg.inv(lq.R)
    return 0.5 * (Rinv + np.swapaxes(Rinv, 1, 2))


def existence_spectrum(
    lq: TimeVaryingLQ, psd_tolerance: float = DEFAULT_PSD_TOLERANCE
) -> Tuple[np.ndarray, np.ndarray]:
    """Minimum eigenvalue of M_k and its PSD tolerance at every knot"""
    Rinv = inverse_control_weights(lq)
    Bt = np.swapaxes(lq.B, 1, 2)
    W = lq.C @ lq.Sigma @ np.swapaxes(lq.C, 1, 2)
    M = lq.B @ Rinv @ Bt - lq.sigma * W
    M = 0.5 * (M + np.swapaxes(M, 1, 2))
    min_eigenvalues = np.linalg.eigvalsh(M)[:, 0]
    tolerances = psd_tolerance * (1.0 + np.linalg.norm(M, ord=2, axis=(1, 2)))
    return min_eigenvalues, tolerances


def first_violation(
    lq: TimeVaryingLQ, psd_tolerance: float = DEFAULT_PSD_TOLERANCE
) -> Optional[ExistenceReport]:
    """Report for the earliest knot failing the existence condition, or None"""
    min_eigenvalues, tolerances = existence_spectrum(lq, psd_tolerance)
    failing = np.flatnonzero(min_eigenvalues < -tolerances)
    if failing.size == 0:
        return None
    k = int(failing[0])
    return ExistenceReport(knot=k, min_eigenvalue=float(min_eigenvalues[k]), tolerance=float(tolerances[k]))


def admissible_sigma_bound(lq: TimeVaryingLQ, rank_tolerance: float = 1e-12) -> float:
    """Largest sigma for which the existence condition holds at every knot (inf if unbounded).

    With K = B R^-1 B^T and W = C Sigma C^T, K - sigma W is PSD for sigma > 0 iff range(W)
    lies in range(K) and sigma <= 1 / lambda_max(K^-1/2 W K^-1/2) on that range.
    """
    bound = np.inf
    for k in range(lq.grid_steps):
        K = control_authority(lq, k)
        W = lq.noise_intensity(k)
        eigvals, eigvecs = linalg.eigh(0.5 * (K + K.T))
        scale = rank_tolerance * (1.0 + max(float(np.abs(eigvals).max()), float(np.abs(W).max())))
        kept = eigvals > scale
        basis = eigvecs[:, kept]
        projector = basis @ basis.T
        if np.abs(W - projector @ W @ projector).max() > scale:
            return 0.0
        if not np.any(kept):
            continue
        whiten = basis / np.sqrt(eigvals[kept])
        top = float(linalg.eigvalsh(whiten.T @ W @ whiten)[-1])
        if top > scale:
            bound = min(bound, 1.0 / top)
    return bound
