"""Errors raised by the planner. Infeasible queries are results, not errors."""


class PlannerError(Exception):
    """Base class; `tag` is the machine-greppable label the CLI prints."""
    tag = 'planner'


class InputError(PlannerError, ValueError):
    """Unknown vertex, out-of-range parameter or incomplete assignment."""
    tag = 'input'


class ParseError(InputError):
    """Malformed instance text, located by 1-based line and column."""
    tag = 'parse'

    def __init__(self, message: str, line: int, column: int = 1, source: str = '<text>'):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f'{source}:{line}:{column}: {message}')


class OracleLimitError(PlannerError):
    """Brute-force enumeration would exceed PLANNER_ENUMERATION_CAP."""
    tag = 'oracle_cap'

    def __init__(self, groups: int, cap: int):
        self.groups = groups
        self.cap = cap
        super().__init__(
            f'instance too large for oracle: {groups} candidate groups exceed cap {cap}'
        )
