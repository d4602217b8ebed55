"""Deterministic and stochastic forward simulation under an affine policy"""

from typing import Tuple

import numpy as np
from scipy import linalg

from app.approx.trajectory import Trajectory
from app.core.exceptions import NonFiniteError, ValidationError
from app.problem.base import ControlProblem
from app.riccati.policy import AffinePolicy
from app.rollout.cost import evaluate_cost
from app.schemas.solver import SolverConfig


def _check_grid(problem: ControlProblem, policy: AffinePolicy, cfg: SolverConfig) -> np.ndarray:
    if policy.grid_steps != cfg.grid_steps:
        raise ValidationError(
            f"policy has {policy.grid_steps} steps, solver grid has {cfg.grid_steps}", field="grid_steps"
        )
    if policy.nominal.states.shape[1] != problem.state_dim:
        raise ValidationError("policy state dimension does not match the problem", field="policy")
    return problem.time_grid(cfg.grid_steps)


def _check_state(x: np.ndarray, knot: int, stage: str) -> None:
    if not np.all(np.isfinite(x)):
        coordinate = int(np.flatnonzero(~np.isfinite(x))[0])
        raise NonFiniteError(
            f"{stage} diverged at knot {knot}, coordinate {coordinate}",
            stage=stage,
            knot=knot,
            coordinate=coordinate,
        )


def rollout_deterministic(problem: ControlProblem, policy: AffinePolicy, cfg: SolverConfig) -> Trajectory:
    """Noise-free RK4 integration with the control held from each interval's left knot"""
    times = _check_grid(problem, policy, cfg)
    N = cfg.grid_steps
    dt = problem.horizon / N
    states = np.empty((N + 1, problem.state_dim))
    controls = np.empty((N, problem.control_dim))
    x = problem.initial_state.copy()
    states[0] = x
    for k in range(N):
        t = float(times[k])
        u = policy.control(k, x)
        k1 = problem.dynamics(t, x, u)
        k2 = problem.dynamics(t + 0.5 * dt, x + 0.5 * dt * k1, u)
        k3 = problem.dynamics(t + 0.5 * dt, x + 0.5 * dt * k2, u)
        k4 = problem.dynamics(t + dt, x + dt * k3, u)
        x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_state(x, k + 1, "rollout")
        controls[k] = u
        states[k + 1] = x
    return Trajectory(times=times, states=states, controls=controls)


def noise_factor(covariance: np.ndarray) -> np.ndarray:
    """Symmetric square root of a PSD covariance"""
    eigvals, eigvecs = linalg.eigh(covariance)
    return (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.T


def sample_rng(seed: int, sample_index: int) -> np.random.Generator:
    """Independent stream per (seed, sample index)"""
    return np.random.default_rng(np.random.SeedSequence([seed, sample_index]))


def rollout_stochastic(
    problem: ControlProblem,
    policy: AffinePolicy,
    cfg: SolverConfig,
    sample_index: int,
) -> Tuple[Trajectory, float]:
    """Euler-Maruyama closed-loop sample; returns the path and its realized performance index"""
    times = _check_grid(problem, policy, cfg)
    N = cfg.grid_steps
    dt = problem.horizon / N
    rng = sample_rng(cfg.rng_seed, sample_index)
    increments = rng.standard_normal(size=(N, problem.noise_dim)) @ noise_factor(problem.noise_covariance).T
    increments *= np.sqrt(dt)

    states = np.empty((N + 1, problem.state_dim))
    controls = np.empty((N, problem.control_dim))
    x = problem.initial_state.copy()
    states[0] = x
    for k in range(N):
        t = float(times[k])
        u = policy.control(k, x)
        x = x + problem.dynamics(t, x, u) * dt + problem.noise_matrix(t, x) @ increments[k]
        _check_state(x, k + 1, "stochastic rollout")
        controls[k] = u
        states[k + 1] = x
    traj = Trajectory(times=times, states=states, controls=controls)
    return traj, evaluate_cost(problem, traj, cfg)
