"""ILEG solver and sigma sweeps"""

from app.solver.ileg import (
    ExistenceFailure,
    IterationRecord,
    SolveResult,
    Termination,
    gain_magnitudes,
    ileg_solve,
)
from app.solver.sweep import sigma_sweep

__all__ = [
    "ExistenceFailure",
    "IterationRecord",
    "SolveResult",
    "Termination",
    "gain_magnitudes",
    "ileg_solve",
    "sigma_sweep",
]
