"""
Integer programming model of the group queries.

Variables: delta_<u> (distance from q, continuous >= 0), phi_<u> (u attends),
pi_<u>_<i>_<j> (arc i->j lies on the path from q to u), tau_<t> (activity
starts at slot t). Constraint families are numbered 1..10; the SGQ model has
no tau variables and no families 9 and 10.

The model is emitted as CPLEX-LP text; solving it is left to external tools.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real

from django.conf import settings

from .exceptions import InputError
from .graph_core import FeasibleGraph, SocialGraph, reconstruct_path
from .schedule_core import AvailabilityTable
from .sgq_solver import SgqQuery, Solution
from .stgq_solver import StgqQuery

logger = logging.getLogger(__name__)

Term = tuple[Real, str]


@dataclass(frozen=True)
class Constraint:
    family: int
    index: int
    terms: tuple[Term, ...]
    sense: str
    rhs: Real

    @property
    def tag(self) -> str:
        return f'c{self.family}_{self.index}'


@dataclass(frozen=True)
class IpModel:
    variant: str
    q: str
    vertices: tuple[str, ...]
    continuous: tuple[str, ...]
    binaries: tuple[str, ...]
    objective: tuple[Term, ...]
    constraints: tuple[Constraint, ...]
    integral_weights: bool = True

    @property
    def variables(self) -> tuple[str, ...]:
        return self.continuous + self.binaries

    def family(self, number: int) -> tuple[Constraint, ...]:
        return tuple(c for c in self.constraints if c.family == number)


@dataclass
class Assignment:
    values: dict[str, Real] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Real:
        return self.values[name]


@dataclass(frozen=True)
class CheckReport:
    feasible: bool
    violated: tuple[str, ...]
    objective: Real

    @property
    def violated_families(self) -> frozenset[int]:
        return frozenset(
            int(tag[1:].split('_', 1)[0]) for tag in self.violated if tag.startswith('c')
        )


# -- names -----------------------------------------------------------------

def phi(v: str) -> str:
    return f'phi_{v}'


def delta(v: str) -> str:
    return f'delta_{v}'


def pi(u: str, i: str, j: str) -> str:
    return f'pi_{u}_{i}_{j}'


def tau(t: int) -> str:
    return f'tau_{t}'


# -- building --------------------------------------------------------------

class _Builder:
    def __init__(self):
        self.constraints: list[Constraint] = []
        self._counts: dict[int, int] = {}

    def add(self, family: int, terms, sense: str, rhs) -> None:
        index = self._counts.get(family, 0)
        self._counts[family] = index + 1
        self.constraints.append(Constraint(family, index, tuple(terms), sense, rhs))


def _vertex_order(graph: SocialGraph, q: str) -> tuple[str, ...]:
    if q not in graph:
        raise InputError(f'unknown initiator {q!r}')
    return (q, *(v for v in graph.vertices if v != q))


def _arcs(graph: SocialGraph) -> list[tuple[str, str, float]]:
    arcs = []
    for u, v, w in graph.edges():
        arcs.append((u, v, w))
        arcs.append((v, u, w))
    return arcs


def build_sgq_model(graph: SocialGraph, query: SgqQuery) -> IpModel:
    return _build(graph, query, table=None, m=None)


def build_stgq_model(graph: SocialGraph, table: AvailabilityTable, query: StgqQuery) -> IpModel:
    if table.horizon < query.m:
        raise InputError(f'horizon T={table.horizon} is shorter than m={query.m}')
    return _build(graph, query, table=table, m=query.m)


def _build(graph: SocialGraph, query: SgqQuery, table: AvailabilityTable | None, m: int | None) -> IpModel:
    q, p, s, k = query.q, query.p, query.s, query.k
    order = _vertex_order(graph, q)
    others = order[1:]
    arcs = _arcs(graph)
    b = _Builder()

    # (1) exactly p attendees, (2) q attends
    b.add(1, [(1, phi(u)) for u in order], '=', p)
    b.add(2, [(1, phi(q))], '=', 1)

    # (3) sum_{v in N_u} phi_v >= (p - 1) phi_u - k
    for u in order:
        terms = [(1, phi(v)) for v in sorted(graph.neighbors(u))]
        terms.append((-(p - 1), phi(u)))
        b.add(3, terms, '>=', -k)

    # (4) path leaves q, (5) path enters u
    for u in others:
        terms = [(1, pi(u, q, i)) for i in sorted(graph.neighbors(q))]
        b.add(4, [*terms, (-1, phi(u))], '=', 0)
    for u in others:
        terms = [(1, pi(u, i, u)) for i in sorted(graph.neighbors(u))]
        b.add(5, [*terms, (-1, phi(u))], '=', 0)

    # (6) flow conservation at every other vertex j
    for u in others:
        for j in others:
            if j == u:
                continue
            nbrs = sorted(graph.neighbors(j))
            terms = [(1, pi(u, i, j)) for i in nbrs] + [(-1, pi(u, j, i)) for i in nbrs]
            b.add(6, terms, '=', 0)

    # (7) delta_u is the weight of u's path, (8) at most s arcs
    for u in others:
        terms = [(w, pi(u, i, j)) for i, j, w in arcs]
        b.add(7, [*terms, (-1, delta(u))], '=', 0)
    for u in others:
        b.add(8, [(1, pi(u, i, j)) for i, j, _ in arcs], '<=', s)

    starts: list[int] = []
    if table is not None:
        starts = list(range(1, table.horizon - m + 2))
        # (9) one start slot
        b.add(9, [(1, tau(t)) for t in starts], '=', 1)
        # (10) phi_u <= 1 - tau_t + a_{u,t'}, written phi_u + tau_t <= 1 + a
        for u in order:
            for t in starts:
                for t_hat in range(t, t + m):
                    a = 1 if table.is_available(u, t_hat) else 0
                    b.add(10, [(1, phi(u)), (1, tau(t))], '<=', 1 + a)

    binaries = [phi(u) for u in order]
    binaries += [pi(u, i, j) for u in order for i, j, _ in arcs]
    binaries += [tau(t) for t in starts]

    model = IpModel(
        variant='stgq' if table is not None else 'sgq',
        q=q,
        vertices=order,
        continuous=tuple(delta(u) for u in order),
        binaries=tuple(binaries),
        objective=tuple((1, delta(u)) for u in order),
        constraints=tuple(b.constraints),
        integral_weights=all(float(w).is_integer() for _, _, w in arcs),
    )
    logger.info(
        "[IP] %s model q=%s: %s variables, %s constraints",
        model.variant, q, len(model.variables), len(model.constraints),
    )
    return model


# -- emitting --------------------------------------------------------------

def _number(x: Real) -> str:
    if isinstance(x, Fraction):
        x = float(x) if x.denominator != 1 else int(x)
    if isinstance(x, float) and x.is_integer():
        x = int(x)
    return repr(x) if isinstance(x, float) else str(x)


def _expression(terms: tuple[Term, ...], placeholder: str) -> str:
    if not terms:
        # LP rows need at least one variable
        return f'0 {placeholder}'
    out = []
    for n, (coef, var) in enumerate(terms):
        sign = '-' if coef < 0 else '+'
        magnitude = -coef if coef < 0 else coef
        body = var if magnitude == 1 else f'{_number(magnitude)} {var}'
        if n == 0:
            out.append(body if sign == '+' else f'-{body}')
        else:
            out.append(f'{sign} {body}')
    return ' '.join(out)


def emit_lp_text(model: IpModel) -> str:
    placeholder = phi(model.q)
    lines = [
        f'\\ {model.variant} model, initiator {model.q}',
        'Minimize',
        f'obj: {_expression(model.objective, placeholder)}',
        'Subject To',
    ]
    for c in model.constraints:
        lines.append(f'{c.tag}: {_expression(c.terms, placeholder)} {c.sense} {_number(c.rhs)}')
    lines.append('Bounds')
    lines.extend(f'{var} >= 0' for var in model.continuous)
    lines.append('Binary')
    lines.extend(model.binaries)
    lines.append('End')
    return '\n'.join(lines) + '\n'


def emit_assignment_text(model: IpModel, asg: Assignment) -> str:
    """One `name value` line per variable, in model order."""
    return ''.join(f'{var} {_number(asg.values[var])}\n' for var in model.variables)


# -- checking --------------------------------------------------------------

def check_assignment(model: IpModel, asg: Assignment) -> CheckReport:
    """
    Evaluate every constraint. Integral-weight models are checked exactly;
    otherwise equalities and inequalities allow PLANNER_FLOAT_TOLERANCE.
    """
    missing = [var for var in model.variables if var not in asg.values]
    if missing:
        raise InputError(f'assignment is missing {len(missing)} variables, first {missing[0]!r}')

    values = {var: Fraction(asg.values[var]) for var in model.variables}
    tolerance = Fraction(0) if model.integral_weights else Fraction(
        getattr(settings, 'PLANNER_FLOAT_TOLERANCE', 1e-9)
    )

    violated = []
    for var in model.continuous:
        if values[var] < -tolerance:
            violated.append(f'bounds:{var}')
    for var in model.binaries:
        if values[var] not in (0, 1):
            violated.append(f'binary:{var}')

    for c in model.constraints:
        lhs = sum((Fraction(coef) * values[var] for coef, var in c.terms), Fraction(0))
        gap = lhs - Fraction(c.rhs)
        ok = {
            '=': abs(gap) <= tolerance,
            '>=': gap >= -tolerance,
            '<=': gap <= tolerance,
        }[c.sense]
        if not ok:
            violated.append(c.tag)

    objective = sum((Fraction(coef) * values[var] for coef, var in model.objective), Fraction(0))
    if not model.integral_weights:
        objective = float(objective)
    report = CheckReport(feasible=not violated, violated=tuple(violated), objective=objective)
    logger.debug("[IP] check: feasible=%s violated=%s", report.feasible, report.violated[:10])
    return report


def solution_to_assignment(solution: Solution, fg: FeasibleGraph, model: IpModel) -> Assignment:
    """Assignment encoding `solution`, with path arcs from the witness paths."""
    values: dict[str, Real] = {var: 0 for var in model.variables}
    for u in solution.members:
        values[phi(u)] = 1
        values[delta(u)] = fg.dist[u]
        path = reconstruct_path(fg, u)
        for i, j in zip(path, path[1:]):
            values[pi(u, i, j)] = 1
    if model.variant == 'stgq':
        if solution.period is None:
            raise InputError('an STGQ assignment needs a solution with a period')
        values[tau(solution.period.start)] = 1
    return Assignment(values)

