"""Error handling utilities and decorators"""

import json
import traceback
from functools import wraps
from typing import Callable, Dict, Optional, Type

from pydantic import ValidationError as PydanticValidationError

from app.core.exceptions import (
    IlegException,
    ValidationError,
    NotFoundError,
)
from app.core.logging import logger


# CLI exit codes for exception types
EXIT_CODE_MAP = {
    "VALIDATION_ERROR": 1,
    "NOT_FOUND": 1,
    "CONTROL_WEIGHT_ERROR": 1,
    "EXISTENCE_VIOLATION": 2,
    "NON_FINITE": 3,
    "OVERFLOW": 3,
}

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EXISTENCE = 2
EXIT_NOT_CONVERGED = 3


def exit_code_for(exc: IlegException) -> int:
    """Exit code for an exception raised out of a command"""
    return EXIT_CODE_MAP.get(exc.error_code, EXIT_USAGE)


def format_diagnostic(exc: IlegException) -> str:
    """One-line diagnostic for stderr"""
    code = (exc.error_code or "ERROR").lower().replace("_", " ")
    return f"error: {code}: {exc.message}"


def _from_pydantic(e: PydanticValidationError) -> ValidationError:
    errors = e.errors()
    if errors:
        loc = errors[0].get("loc", ["unknown"])
        field = ".".join(str(part) for part in loc) or "unknown"
        message = errors[0].get("msg", "Validation error")
        return ValidationError(message=f"{field}: {message}", field=field)
    return ValidationError(message="Validation error")


def handle_errors(
    error_mappings: Optional[Dict[Type[Exception], Type[IlegException]]] = None
):
    """
    Decorator for standardized error handling

    Args:
        error_mappings: Optional mapping of exceptions to IlegException types

    Example:
        @handle_errors({
            FileNotFoundError: NotFoundError,
            ValueError: ValidationError
        })
        def load_something(path):
            ...
    """
    if error_mappings is None:
        error_mappings = {}

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except IlegException:
                raise
            except PydanticValidationError as e:
                raise _from_pydantic(e) from e
            except json.JSONDecodeError as e:
                raise ValidationError(
                    message=f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}",
                    field=f"line {e.lineno}",
                ) from e
            except Exception as e:
                for exc_type, ileg_exc_type in error_mappings.items():
                    if isinstance(e, exc_type):
                        if ileg_exc_type is NotFoundError:
                            raise ileg_exc_type(resource=str(e)) from e
                        raise ileg_exc_type(message=str(e)) from e

                logger.error(
                    f"Unexpected error in {func.__name__}",
                    exc_info=True,
                    extra={
                        "error_type": type(e).__name__,
                        "error_message": str(e),
                        "traceback": traceback.format_exc(),
                    },
                )
                raise IlegException(
                    message=f"internal error: {type(e).__name__}: {e}",
                    error_code="INTERNAL_ERROR",
                    details={"original_error": type(e).__name__},
                ) from e

        return wrapper
    return decorator


__all__ = [
    "EXIT_CODE_MAP",
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_EXISTENCE",
    "EXIT_NOT_CONVERGED",
    "exit_code_for",
    "format_diagnostic",
    "handle_errors",
]
