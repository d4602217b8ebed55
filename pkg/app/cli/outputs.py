"""CSV and JSON writers/readers for run directories"""

import csv
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from app.approx.trajectory import Trajectory
from app.core.exceptions import ValidationError
from app.riccati.policy import AffinePolicy
from app.rollout.stats import PolicyEvaluation
from app.solver.ileg import SolveResult

MANIFEST_NAME = "manifest.json"


def sigma_label(sigma: float) -> str:
    """Stable file-name fragment for a sigma value: 45, -100, 0.5, 1e+06"""
    label = f"{sigma:g}"
    return "0" if label == "-0" else label


def output_name(kind: str, sigma: float, suffix: str) -> str:
    return f"{kind}_sigma{sigma_label(sigma)}.{suffix}"


def fmt(value: Optional[float]) -> str:
    """17 significant digits: exact float round trip"""
    if value is None:
        return ""
    return format(float(value), ".17g")


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read_rows(path: Path) -> Tuple[List[str], List[List[str]]]:
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        return header, [row for row in reader]


def write_json(path: Path, model: BaseModel) -> None:
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")


def finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def write_trajectory_csv(
    path: Path, traj: Trajectory, state_labels: Sequence[str], control_labels: Sequence[str]
) -> None:
    """Columns t, states..., controls...; the last knot has no control"""
    rows = []
    for k, t in enumerate(traj.times):
        controls = traj.controls[k] if k < traj.grid_steps else [None] * len(control_labels)
        rows.append([fmt(t), *(fmt(v) for v in traj.states[k]), *(fmt(v) for v in controls)])
    _write_rows(path, ["t", *state_labels, *control_labels], rows)


def read_trajectory_csv(path: Path, state_dim: int, control_dim: int) -> Trajectory:
    header, rows = _read_rows(path)
    if len(header) != 1 + state_dim + control_dim:
        raise ValidationError(f"{path.name}: expected {1 + state_dim + control_dim} columns", field=path.name)
    times = np.array([float(row[0]) for row in rows])
    states = np.array([[float(v) for v in row[1:1 + state_dim]] for row in rows])
    controls = np.array([[float(v) for v in row[1 + state_dim:]] for row in rows[:-1]])
    return Trajectory(times=times, states=states, controls=controls.reshape(len(rows) - 1, control_dim))


def gains_header(state_labels: Sequence[str], control_labels: Sequence[str]) -> List[str]:
    header = ["t", *(f"l_{u}" for u in control_labels)]
    header += [f"L_{u}_{x}" for u in control_labels for x in state_labels]
    return header


def write_gains_csv(
    path: Path, policy: AffinePolicy, state_labels: Sequence[str], control_labels: Sequence[str]
) -> None:
    """Columns t, l entries, then L entries row-major, one row per interval"""
    rows = []
    for k in range(policy.grid_steps):
        rows.append(
            [
                fmt(policy.nominal.times[k]),
                *(fmt(v) for v in policy.alpha * policy.ff[k]),
                *(fmt(v) for v in policy.fb[k].ravel()),
            ]
        )
    _write_rows(path, gains_header(state_labels, control_labels), rows)


def read_gains_csv(path: Path, state_dim: int, control_dim: int) -> Tuple[np.ndarray, np.ndarray]:
    header, rows = _read_rows(path)
    if len(header) != 1 + control_dim + control_dim * state_dim:
        raise ValidationError(f"{path.name}: unexpected gain columns", field=path.name)
    ff = np.array([[float(v) for v in row[1:1 + control_dim]] for row in rows])
    fb = np.array([[float(v) for v in row[1 + control_dim:]] for row in rows])
    return ff.reshape(len(rows), control_dim), fb.reshape(len(rows), control_dim, state_dim)


def load_policy(trajectory_path: Path, gains_path: Path, state_dim: int, control_dim: int) -> AffinePolicy:
    """Rebuild the stored policy: nominal from the trajectory file, l and L from the gains file"""
    nominal = read_trajectory_csv(trajectory_path, state_dim, control_dim)
    ff, fb = read_gains_csv(gains_path, state_dim, control_dim)
    return AffinePolicy(nominal=nominal, ff=ff, fb=fb, alpha=1.0)


COST_COLUMNS = [
    "iteration",
    "cost",
    "merit",
    "alpha",
    "relative_change",
    "min_existence_eigenvalue",
    "max_feedforward",
    "max_feedback",
]


def write_costs_csv(path: Path, result: SolveResult) -> None:
    rows = []
    if result.cost_history:
        initial_merit = result.merit_history[0] if result.merit_history else None
        rows.append(["0", fmt(result.cost_history[0]), fmt(initial_merit), "", "", "", "", ""])
    for record in result.diagnostics:
        rows.append(
            [
                str(record.iteration),
                fmt(record.cost),
                fmt(record.merit),
                fmt(record.alpha),
                fmt(record.relative_change),
                fmt(record.min_existence_eigenvalue),
                fmt(record.max_feedforward),
                fmt(record.max_feedback),
            ]
        )
    _write_rows(path, COST_COLUMNS, rows)


def write_samples_csv(path: Path, evaluation: PolicyEvaluation) -> None:
    rows = [[str(i), fmt(cost)] for i, cost in enumerate(evaluation.stats.samples)]
    _write_rows(path, ["sample_index", "cost"], rows)


def write_bands_csv(path: Path, evaluation: PolicyEvaluation, state_labels: Sequence[str]) -> None:
    """Per knot and state: mean, 1-SD half width, 0.15-SD half width"""
    bands = evaluation.bands
    header = ["t"]
    for label in state_labels:
        header += [f"{label}_mean", f"{label}_sd", f"{label}_sd015"]
    rows = []
    for k, t in enumerate(bands.times):
        row = [fmt(t)]
        for i in range(len(state_labels)):
            row += [fmt(bands.mean[k, i]), fmt(bands.sd[k, i]), fmt(bands.narrow[k, i])]
        rows.append(row)
    _write_rows(path, header, rows)
