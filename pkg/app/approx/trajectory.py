"""Nominal trajectories and the time-varying LQ model built around them"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.core.exceptions import ValidationError


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States on N+1 uniform knots and piecewise-constant controls on N intervals"""

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray

    def __post_init__(self):
        times = _readonly(self.times)
        states = _readonly(self.states)
        controls = _readonly(self.controls)
        if times.ndim != 1 or times.shape[0] < 2:
            raise ValidationError("times must hold at least two knots", field="times")
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise ValidationError("times must be strictly increasing", field="times")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValidationError("times must be uniformly spaced", field="times")
        n_knots = times.shape[0]
        if states.ndim != 2 or states.shape[0] != n_knots:
            raise ValidationError(
                f"states must have shape ({n_knots}, n), got {states.shape}", field="states"
            )
        if controls.ndim != 2 or controls.shape[0] != n_knots - 1:
            raise ValidationError(
                f"controls must have shape ({n_knots - 1}, m), got {controls.shape}", field="controls"
            )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "controls", controls)

    @classmethod
    def constant(cls, times: np.ndarray, state: np.ndarray, control_dim: int) -> "Trajectory":
        """State held at `state`, zero controls"""
        n_knots = len(times)
        return cls(
            times=times,
            states=np.tile(np.asarray(state, dtype=float), (n_knots, 1)),
            controls=np.zeros((n_knots - 1, control_dim)),
        )

    @property
    def grid_steps(self) -> int:
        return self.times.shape[0] - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True, eq=False)
class TimeVaryingLQ:
    """Local linear dynamics and quadratic cost coefficients, per unit time, on N intervals.

    drift holds f + G u at each knot; knot_states holds the expansion points. Leaving
    drift at zero and knot_states unset gives a plain time-varying LQ problem about
    the origin.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    q0: np.ndarray
    qx: np.ndarray
    ru: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    R: np.ndarray
    terminal_q0: float
    terminal_qx: np.ndarray
    terminal_Q: np.ndarray
    dt: float
    sigma: float
    Sigma: np.ndarray
    drift: Optional[np.ndarray] = None
    knot_states: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("A", "B", "C", "q0", "qx", "ru", "Q", "P", "R", "terminal_qx", "terminal_Q", "Sigma"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        N = self.A.shape[0]
        n, m, p = self.A.shape[1], self.B.shape[2], self.C.shape[2]
        expected = {
            "A": (N, n, n), "B": (N, n, m), "C": (N, n, p), "q0": (N,), "qx": (N, n),
            "ru": (N, m), "Q": (N, n, n), "P": (N, n, m), "R": (N, m, m),
            "terminal_qx": (n,), "terminal_Q": (n, n), "Sigma": (p, p),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValidationError(
                    f"{name} has shape {getattr(self, name).shape}, expected {shape}", field=name
                )
        drift = np.zeros((N, n)) if self.drift is None else self.drift
        object.__setattr__(self, "drift", _readonly(drift))
        if self.drift.shape != (N, n):
            raise ValidationError(f"drift has shape {self.drift.shape}, expected {(N, n)}", field="drift")
        if self.knot_states is not None:
            object.__setattr__(self, "knot_states", _readonly(self.knot_states))
            if self.knot_states.shape != (N + 1, n):
                raise ValidationError(
                    f"knot_states has shape {self.knot_states.shape}, expected {(N + 1, n)}",
                    field="knot_states",
                )
        object.__setattr__(self, "terminal_q0", float(self.terminal_q0))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "dt", float(self.dt))
        if not self.dt > 0:
            raise ValidationError("dt must be > 0", field="dt")

    @property
    def grid_steps(self) -> int:
        return self.A.shape[0]

    @property
    def state_dim(self) -> int:
        return self.A.shape[1]

    @property
    def control_dim(self) -> int:
        return self.B.shape[2]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.grid_steps + 1)

    def noise_intensity(self, k: int) -> np.ndarray:
        """C Sigma C^T at knot k"""
        return self.C[k] @ self.Sigma @ self.C[k].T
