"""Problem-config file loading"""

import json
import re
from pathlib import Path
from typing import Optional, Union

from pydantic import ValidationError as PydanticValidationError

from app.core.error_handlers import handle_errors
from app.core.exceptions import NotFoundError, ValidationError
from app.core.logging import logger
from app.problem.base import ControlProblem
from app.problem.presets import PRESETS
from app.schemas.problem import ProblemConfig


def _line_of_key(text: str, key: str) -> Optional[int]:
    match = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    if match is None:
        return None
    return text.count("\n", 0, match.start()) + 1


def parse_problem_config(text: str) -> ProblemConfig:
    """Parse and validate a problem-config document, citing the offending line where possible"""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(
            f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}", field=f"line {e.lineno}"
        ) from e
    if not isinstance(raw, dict):
        raise ValidationError("problem config must be a JSON object", field="line 1")

    try:
        return ProblemConfig.model_validate(raw)
    except PydanticValidationError as e:
        error = e.errors()[0]
        loc = error.get("loc", ())
        key = str(loc[0]) if loc else "unknown"
        field = ".".join(str(part) for part in loc) or key
        line = _line_of_key(text, key)
        where = f" (line {line})" if line is not None else ""
        if error.get("type") == "extra_forbidden":
            message = f"unknown key '{key}'{where}"
        else:
            message = f"{field}{where}: {error.get('msg', 'invalid value')}"
        raise ValidationError(message, field=field) from e


def build_problem(config: ProblemConfig) -> ControlProblem:
    """Instantiate the preset named by a config with its overrides applied"""
    return PRESETS[config.preset](config)


@handle_errors({FileNotFoundError: NotFoundError, IsADirectoryError: NotFoundError})
def load_problem_config(path: Union[str, Path]) -> ProblemConfig:
    path = Path(path)
    if not path.is_file():
        raise NotFoundError(f"problem config {path}")
    return parse_problem_config(path.read_text(encoding="utf-8"))


def load_problem(path: Union[str, Path]) -> ControlProblem:
    """Read a problem-config file and build the problem it describes"""
    config = load_problem_config(path)
    problem = build_problem(config)
    logger.info(
        f"Loaded problem '{problem.name}' from {path}",
        extra={"preset": config.preset, "sigma": problem.risk_param, "horizon": problem.horizon},
    )
    return problem


def serialize_problem_config(config: ProblemConfig) -> str:
    """Canonical JSON for a config; parse_problem_config inverts it exactly"""
    return config.model_dump_json(indent=2, exclude_none=True) + "\n"
