"""Central finite differences on scaled coordinates"""

from typing import Callable, Optional

import numpy as np


def coordinate_steps(x: np.ndarray, fd_step: float) -> np.ndarray:
    """h_i = fd_step * max(1, |x_i|)"""
    return fd_step * np.maximum(1.0, np.abs(x))


def jacobian(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray, fd_step: float) -> np.ndarray:
    """d func / dx by central differences; column j is the derivative along x_j"""
    x = np.asarray(x, dtype=float)
    steps = coordinate_steps(x, fd_step)
    columns = []
    for j, h in enumerate(steps):
        e = np.zeros_like(x)
        e[j] = h
        columns.append((np.asarray(func(x + e), dtype=float) - np.asarray(func(x - e), dtype=float)) / (2.0 * h))
    return np.stack(columns, axis=-1)


def gradient(func: Callable[[np.ndarray], float], x: np.ndarray, fd_step: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    steps = coordinate_steps(x, fd_step)
    grad = np.empty_like(x)
    for j, h in enumerate(steps):
        e = np.zeros_like(x)
        e[j] = h
        grad[j] = (func(x + e) - func(x - e)) / (2.0 * h)
    return grad


def hessian(
    func: Callable[[np.ndarray], float],
    x: np.ndarray,
    fd_step: float,
    f0: Optional[float] = None,
) -> np.ndarray:
    """3-point diagonal, 4-point off-diagonal, returned symmetric"""
    x = np.asarray(x, dtype=float)
    dim = x.shape[0]
    steps = coordinate_steps(x, fd_step)
    f0 = func(x) if f0 is None else f0
    E = np.diag(steps)
    hess = np.zeros((dim, dim))
    for i in range(dim):
        hess[i, i] = (func(x + E[i]) - 2.0 * f0 + func(x - E[i])) / (steps[i] * steps[i])
        for j in range(i + 1, dim):
            pij = func(x + E[i] + E[j])
            pij -= func(x + E[i] - E[j])
            pij -= func(x - E[i] + E[j])
            pij += func(x - E[i] - E[j])
            hess[i, j] = hess[j, i] = pij / (4.0 * steps[i] * steps[j])
    return symmetrize(hess)


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + np.swapaxes(matrix, -1, -2))
