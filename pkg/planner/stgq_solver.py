"""
STGSelect: SGSelect run once per pivot slot, with temporal extensibility
ordering and availability pruning on top of the social checks.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

from .exceptions import InputError
from .graph_core import FeasibleGraph, SocialGraph, extract_feasible_graph
from .schedule_core import (
    AvailabilityTable,
    PivotWindow,
    SlotRange,
    available_at_pivot,
    has_feasible_run,
    pivot_slots,
    run_around,
    tbar,
)
from .sgq_solver import (
    DEFER,
    INCLUDE,
    REMOVE,
    SGSelect,
    Incumbent,
    SearchStats,
    SgqQuery,
    SgqSearchState,
    Solution,
)

logger = logging.getLogger(__name__)

CANDIDATE_FILTERS = {
    'window': has_feasible_run,
    'pivot': available_at_pivot,
}

# An STGQ answer is a Solution whose period is set.
StgqSolution = Solution


@dataclass(frozen=True, kw_only=True)
class StgqQuery(SgqQuery):
    m: int
    phi0: int | None = None
    phi_max: int | None = None
    candidate_filter: str = 'window'
    use_availability_prune: bool = True

    def __post_init__(self):
        super().__post_init__()
        if not isinstance(self.m, int) or isinstance(self.m, bool) or self.m < 1:
            raise InputError(f'm must be an integer >= 1, got {self.m!r}')
        if self.candidate_filter not in CANDIDATE_FILTERS:
            raise InputError(
                f'candidate_filter must be one of {sorted(CANDIDATE_FILTERS)}, got {self.candidate_filter!r}'
            )

        from_settings = self.phi0 is None and self.phi_max is None
        if self.phi0 is None:
            object.__setattr__(self, 'phi0', int(getattr(settings, 'PLANNER_PHI0', 2)))
        if self.phi_max is None:
            object.__setattr__(self, 'phi_max', int(getattr(settings, 'PLANNER_PHI_MAX', 10)))
        if self.phi0 < 1 or self.phi_max <= self.phi0:
            message = f'need 1 <= phi0 < phi_max, got phi0={self.phi0}, phi_max={self.phi_max}'
            if from_settings:
                raise ImproperlyConfigured(f'PLANNER_PHI0/PLANNER_PHI_MAX: {message}')
            raise InputError(message)

    def social(self) -> SgqQuery:
        """The same query with the temporal part dropped."""
        return SgqQuery(
            q=self.q, p=self.p, s=self.s, k=self.k, theta0=self.theta0,
            tight_acquaintance_bound=self.tight_acquaintance_bound,
            use_distance_prune=self.use_distance_prune,
            use_acquaintance_prune=self.use_acquaintance_prune,
            use_exterior_condition=self.use_exterior_condition,
        )


@dataclass
class StgqSearchState(SgqSearchState):
    pw: PivotWindow | None = None
    mask: int = 0
    T_S: SlotRange = SlotRange(1, 0)
    phi: int = 1


def temporal_extensibility(T_S: SlotRange, m: int) -> int:
    return len(T_S) - m


def temporal_rhs(size: int, p: int, m: int, phi: int, phi_max: int) -> Fraction:
    """(m - 1) * ((p - size) / p) ** phi, forced to 0 once phi reaches phi_max."""
    if phi >= phi_max:
        return Fraction(0)
    return (m - 1) * Fraction(p - size, p) ** phi


def temporal_condition(
    V_S: Iterable[str],
    u: str,
    phi: int,
    query: StgqQuery,
    table: AvailabilityTable,
    pw: PivotWindow,
) -> bool:
    group = (*V_S, u)
    run = run_around(table.common_mask(group), pw)
    X = temporal_extensibility(run, query.m)
    return X >= temporal_rhs(len(group), query.p, query.m, phi, query.phi_max)


def availability_prune(state: StgqSearchState, query: StgqQuery, table: AvailabilityTable) -> bool:
    """
    With n = |V_A| - (p - |V_S|) + 1, any pick of the remaining attendees
    includes someone blocked at each slot where n candidates are blocked, so
    the common run is squeezed strictly between t̄⁻(n) and t̄⁺(n).
    """
    n = len(state.V_A) - (query.p - len(state.V_S)) + 1
    if n <= 0:
        return False
    below, above = tbar(table, state.V_A, state.pw, n)
    return above - below <= query.m


class STGSelect(SGSelect):
    """Search for one pivot window; pass a shared Incumbent to chain pivots."""
    log_tag = '[STGSELECT]'

    def __init__(
        self,
        fg: FeasibleGraph,
        table: AvailabilityTable,
        query: StgqQuery,
        pw: PivotWindow,
        incumbent: Incumbent | None = None,
    ):
        super().__init__(fg, query, incumbent)
        self.table = table
        self.pw = pw

    def root(self, candidates: Iterable[str]) -> StgqSearchState:
        mask = self.table.mask(self.fg.origin)
        return StgqSearchState(
            V_S=(self.fg.origin,),
            V_A=set(candidates),
            TD=0.0,
            theta=self.query.theta0,
            pw=self.pw,
            mask=mask,
            T_S=run_around(mask, self.pw),
            phi=self.query.phi0,
        )

    def relax(self, state: StgqSearchState) -> bool:
        if super().relax(state):
            return True
        if state.phi < self.query.phi_max:
            state.phi += 1
            state.visited.clear()
            logger.debug("%s phi -> %s at V_S=%s", self.log_tag, state.phi, state.V_S)
            return True
        return False

    def admit(self, state: StgqSearchState, u: str) -> str:
        verdict = super().admit(state, u)
        if verdict != INCLUDE:
            return verdict
        run = run_around(state.mask & self.table.mask(u), self.pw)
        X = temporal_extensibility(run, self.query.m)
        if X < 0:
            self.stats.prunes['temporal'] += 1
            return REMOVE
        rhs = temporal_rhs(len(state.V_S) + 1, self.query.p, self.query.m, state.phi, self.query.phi_max)
        if X < rhs:
            self.stats.prunes['temporal'] += 1
            return DEFER
        return INCLUDE

    def include(self, state: StgqSearchState, u: str) -> StgqSearchState:
        child = super().include(state, u)
        mask = state.mask & self.table.mask(u)
        return replace(child, mask=mask, T_S=run_around(mask, self.pw))

    def prune(self, state: StgqSearchState) -> bool:
        if super().prune(state):
            return True
        if self.query.use_availability_prune and availability_prune(state, self.query, self.table):
            self.stats.prunes['availability'] += 1
            return True
        return False

    def record(self, state: StgqSearchState) -> None:
        period = state.T_S.earliest(self.query.m)
        if self.incumbent.offer(state.TD, state.V_S, period):
            logger.debug(
                "%s incumbent %s total=%s period=%s", self.log_tag, self.incumbent.F, state.TD, period,
            )


def solve_stgq(
    graph: SocialGraph,
    table: AvailabilityTable,
    query: StgqQuery,
) -> tuple[Solution | None, SearchStats]:
    """
    Minimum-total-distance (group, period) over every pivot slot, or None.

    The incumbent is shared by all pivots and only replaced on a strictly
    smaller total, so ties keep the earliest pivot.
    """
    started = time.perf_counter()
    fg = extract_feasible_graph(graph, query.q, query.s)
    stats = SearchStats()
    incumbent = Incumbent()
    keep = CANDIDATE_FILTERS[query.candidate_filter]

    pivots = pivot_slots(table.horizon, query.m) if query.m <= table.horizon else []
    for pivot in pivots:
        pw = PivotWindow.for_pivot(pivot, query.m, table.horizon)
        if not has_feasible_run(table, query.q, pw, query.m):
            logger.debug("[STGSELECT] pivot %s skipped: %s has no %s-slot run", pivot, query.q, query.m)
            continue
        pool = [v for v in fg.candidates if keep(table, v, pw, query.m)]
        if 1 + len(pool) < query.p:
            continue
        search = STGSelect(fg, table, query, pw, incumbent)
        search.run(pool)
        stats.merge(search.stats)

    stats.elapsed = time.perf_counter() - started
    solution = incumbent.solution()
    logger.info(
        "[STGSELECT] q=%s p=%s s=%s k=%s m=%s T=%s pivots=%s -> %s (nodes=%s, %.1f ms)",
        query.q, query.p, query.s, query.k, query.m, table.horizon, len(pivots),
        f'total={solution.total:g} period={solution.period}' if solution else 'failure',
        stats.nodes_expanded, stats.elapsed * 1000,
    )
    return solution, stats
