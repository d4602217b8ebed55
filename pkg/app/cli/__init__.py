"""Command-line front end"""

from app.cli.commands import cmd_evaluate, cmd_solve, parse_sigmas

__all__ = ["cmd_evaluate", "cmd_solve", "parse_sigmas"]
