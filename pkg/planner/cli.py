"""Programmatic entry point for the `planner` management command."""
from planner.management.commands.planner import Command


def run(argv, stdout=None, stderr=None) -> int:
    """
    Run `manage.py planner <argv...>` in-process and return its exit code:
    0 solved, 2 infeasible, 1 usage, parse or input error.
    """
    command = Command(stdout=stdout, stderr=stderr)
    try:
        command.run_from_argv(['manage.py', 'planner', *argv])
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    return 0
