"""solve and evaluate commands"""

import argparse
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from app.cli.outputs import (
    MANIFEST_NAME,
    finite_or_none,
    load_policy,
    output_name,
    sigma_label,
    write_bands_csv,
    write_costs_csv,
    write_gains_csv,
    write_json,
    write_samples_csv,
    write_trajectory_csv,
)
from app.core.config import settings
from app.core.error_handlers import (
    EXIT_EXISTENCE,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    handle_errors,
)
from app.core.exceptions import NotFoundError, ValidationError
from app.core.logging import logger
from app.problem.base import ControlProblem
from app.problem.loader import build_problem, load_problem_config
from app.rollout.stats import PolicyEvaluation, cumulant_report, evaluate_policy
from app.schemas.run import RunEntry, RunManifest, StatsReport
from app.schemas.solver import SolverConfig
from app.solver.ileg import SolveResult, Termination
from app.solver.sweep import sigma_sweep


def parse_sigmas(raw: Optional[str]) -> Optional[List[float]]:
    """Comma-separated sigma list; None when the flag was not given"""
    if raw is None:
        return None
    values = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            value = float(part)
        except ValueError:
            raise ValidationError(f"invalid sigma value '{part}'", field="sigma")
        if not math.isfinite(value):
            raise ValidationError(f"sigma must be finite, got '{part}'", field="sigma")
        values.append(value)
    if not values:
        raise ValidationError("--sigma needs at least one value", field="sigma")
    return values


def _ensure_directory(path: Path) -> Path:
    if path.exists() and not path.is_dir():
        raise ValidationError(f"{path} exists and is not a directory", field="out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def stats_report(evaluation: PolicyEvaluation, noise_scale: float) -> StatsReport:
    rollout_stats = evaluation.stats
    cumulants = cumulant_report(rollout_stats)
    return StatsReport(
        sigma=rollout_stats.sigma,
        seed=rollout_stats.seed,
        n_samples=rollout_stats.n_samples,
        noise_scale=noise_scale,
        mean=rollout_stats.mean,
        variance=rollout_stats.variance,
        skewness=rollout_stats.skewness,
        risk_objective=rollout_stats.risk_objective,
        first_order=cumulants.first_order,
        second_order=cumulants.second_order,
        third_order=cumulants.third_order,
        mean_state_sd=[float(v) for v in evaluation.bands.mean_sd()],
    )


def write_evaluation(
    out: Path, problem: ControlProblem, evaluation: PolicyEvaluation, noise_scale: float
) -> str:
    """Samples, stats and bands for one sigma; returns the stats file name"""
    sigma = problem.risk_param
    stats_file = output_name("stats", sigma, "json")
    write_samples_csv(out / output_name("samples", sigma, "csv"), evaluation)
    write_bands_csv(out / output_name("bands", sigma, "csv"), evaluation, problem.state_labels)
    write_json(out / stats_file, stats_report(evaluation, noise_scale))
    return stats_file


def _write_result(out: Path, problem: ControlProblem, result: SolveResult) -> RunEntry:
    sigma = result.sigma
    entry = RunEntry(
        sigma=sigma,
        label=sigma_label(sigma),
        termination=result.termination.value,
        iterations=result.iterations,
        final_cost=finite_or_none(result.final_cost),
        admissible_sigma_bound=finite_or_none(result.admissible_sigma_bound),
        error=result.error or (result.existence_failure.message if result.existence_failure else None),
    )
    if result.nominal is not None:
        entry.trajectory_file = output_name("trajectory", sigma, "csv")
        write_trajectory_csv(
            out / entry.trajectory_file, result.nominal, problem.state_labels, problem.control_labels
        )
    # gains only exist once a backward pass has run
    if result.value is not None:
        entry.gains_file = output_name("gains", sigma, "csv")
        write_gains_csv(out / entry.gains_file, result.policy, problem.state_labels, problem.control_labels)
    entry.costs_file = output_name("costs", sigma, "csv")
    write_costs_csv(out / entry.costs_file, result)
    return entry


def _exit_code(results: Sequence[SolveResult]) -> int:
    if any(result.termination is Termination.EXISTENCE_VIOLATION for result in results):
        return EXIT_EXISTENCE
    if not all(result.converged for result in results):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _report_failures(results: Sequence[SolveResult]) -> None:
    for result in results:
        if result.converged:
            continue
        reason = result.error or (result.existence_failure.message if result.existence_failure else "")
        detail = f": {reason}" if reason else ""
        print(
            f"error: sigma={sigma_label(result.sigma)}: {result.termination.value.replace('_', ' ')}{detail}",
            file=sys.stderr,
        )


@handle_errors({OSError: ValidationError})
def cmd_solve(args: argparse.Namespace) -> int:
    """Solve one or more sigmas and write a run directory"""
    config = load_problem_config(args.config)
    problem = build_problem(config)
    cfg = SolverConfig.from_settings(
        grid_steps=args.steps,
        cost_tolerance=args.tol,
        max_iterations=args.max_iters,
        mc_samples=args.samples,
        rng_seed=args.seed,
        max_workers=args.workers,
    )
    sigmas = parse_sigmas(args.sigma) or [config.sigma]
    out = _ensure_directory(Path(args.out))
    logger.info(
        f"Solving '{problem.name}' for sigma {sigmas} into {out}",
        extra={"preset": config.preset, "grid_steps": cfg.grid_steps},
    )

    results = sigma_sweep(problem, cfg, sigmas)
    entries = []
    for result in results:
        entry_problem = problem.with_risk_param(result.sigma)
        entry = _write_result(out, entry_problem, result)
        if args.samples is not None and result.value is not None:
            evaluation = evaluate_policy(entry_problem, result.policy, cfg)
            entry.stats_file = write_evaluation(out, entry_problem, evaluation, noise_scale=1.0)
        entries.append(entry)

    manifest = RunManifest(
        tool=settings.app_name,
        tool_version=settings.app_version,
        problem=config,
        solver=cfg,
        results=entries,
    )
    write_json(out / MANIFEST_NAME, manifest)
    _report_failures(results)
    return _exit_code(results)


def load_manifest(run: Path) -> RunManifest:
    path = run / MANIFEST_NAME
    if not path.is_file():
        raise NotFoundError(f"run manifest {path}")
    return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))


@handle_errors({OSError: ValidationError})
def cmd_evaluate(args: argparse.Namespace) -> int:
    """Monte-Carlo evaluation of the policies stored in a run directory"""
    run = Path(args.run)
    manifest = load_manifest(run)
    out = _ensure_directory(Path(args.out)) if args.out else run

    overrides = {"mc_samples": args.samples, "rng_seed": args.seed, "max_workers": args.workers}
    cfg = SolverConfig.model_validate(
        {**manifest.solver.model_dump(), **{k: v for k, v in overrides.items() if v is not None}}
    )
    base = build_problem(manifest.problem)

    sigmas = parse_sigmas(args.sigma) or [entry.sigma for entry in manifest.results]
    for sigma in sigmas:
        entry = manifest.entry_for(sigma)
        if entry is None:
            raise NotFoundError(f"sigma={sigma_label(sigma)} in {run / MANIFEST_NAME}")
        if entry.trajectory_file is None or entry.gains_file is None:
            logger.warning(
                f"Skipping sigma={entry.label}: no policy stored ({entry.termination})",
                extra={"sigma": sigma, "termination": entry.termination},
            )
            continue
        problem = base.with_risk_param(sigma).with_noise_scale(args.noise_scale)
        policy = load_policy(
            run / entry.trajectory_file, run / entry.gains_file, problem.state_dim, problem.control_dim
        )
        evaluation = evaluate_policy(problem, policy, cfg)
        write_evaluation(out, problem, evaluation, args.noise_scale)
    return EXIT_OK
