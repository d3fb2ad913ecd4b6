"""
SGSelect: exact branch-and-bound for the social group query.

A frame owns (V_S, V_A, TD, visited, theta). Candidates are taken by
increasing distance to the initiator; access ordering defers or drops them,
and distance / acquaintance pruning cut frames that cannot beat the incumbent.
"""
from __future__ import annotations

import logging
import threading
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable

from django.conf import settings

from .exceptions import InputError
from .graph_core import INF, FeasibleGraph, SocialGraph, extract_feasible_graph
from .schedule_core import SlotRange

logger = logging.getLogger(__name__)

INCLUDE = 'include'
DEFER = 'defer'
REMOVE = 'remove'

PRUNE_KINDS = ('distance', 'acquaintance', 'availability', 'exterior', 'interior', 'temporal')


@dataclass(frozen=True)
class SgqQuery:
    q: str
    p: int
    s: int
    k: int
    theta0: int | None = None
    tight_acquaintance_bound: bool = False
    use_distance_prune: bool = True
    use_acquaintance_prune: bool = True
    use_exterior_condition: bool = True

    def __post_init__(self):
        if self.theta0 is None:
            object.__setattr__(self, 'theta0', int(getattr(settings, 'PLANNER_THETA0', 2)))
        for name, low in (('p', 1), ('s', 1), ('k', 0), ('theta0', 0)):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < low:
                raise InputError(f'{name} must be an integer >= {low}, got {value!r}')

    @property
    def acquaintance_vacuous(self) -> bool:
        return self.k >= self.p - 1


@dataclass(frozen=True)
class Solution:
    """Attendees (sorted ids, initiator included), total distance and, for STGQ, the period."""
    members: tuple[str, ...]
    total: float
    period: SlotRange | None = None


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    prunes: Counter = field(default_factory=Counter)
    elapsed: float = 0.0

    def merge(self, other: 'SearchStats') -> None:
        self.nodes_expanded += other.nodes_expanded
        self.prunes.update(other.prunes)
        self.elapsed += other.elapsed

    def prune_counts(self) -> dict[str, int]:
        return {kind: int(self.prunes.get(kind, 0)) for kind in PRUNE_KINDS}


class Incumbent:
    """
    Best feasible group so far. Writes are compare-and-set under a lock;
    readers of `D` may see a stale value, which is still a valid upper bound.
    """

    def __init__(self):
        self.D = INF
        self.F: tuple[str, ...] = ()
        self.period: SlotRange | None = None
        self._lock = threading.Lock()

    def offer(self, total: float, group: Iterable[str], period: SlotRange | None = None) -> bool:
        with self._lock:
            if total < self.D:
                self.D = total
                self.F = tuple(sorted(group))
                self.period = period
                return True
        return False

    def solution(self) -> Solution | None:
        if not self.F:
            return None
        return Solution(self.F, self.D, self.period)


@dataclass
class SgqSearchState:
    V_S: tuple[str, ...]
    V_A: set[str]
    TD: float
    theta: int
    visited: set[str] = field(default_factory=set)


# -- access ordering -------------------------------------------------------

def interior_unfamiliarity(V_S: Iterable[str], fg: FeasibleGraph) -> int:
    group = tuple(V_S)
    return max((fg.non_neighbors_within(v, group) for v in group), default=0)


def exterior_expansibility(V_S: Iterable[str], V_A: Iterable[str], k: int, fg: FeasibleGraph) -> int:
    group = tuple(V_S)
    pool = frozenset(V_A)
    return min(
        len(pool & fg.neighbors[v]) + (k - fg.non_neighbors_within(v, group))
        for v in group
    )


def interior_rhs(size: int, p: int, k: int, theta: int) -> Fraction:
    """k * (size / p) ** theta"""
    return k * Fraction(size, p) ** theta


def interior_condition(V_S: Iterable[str], v: str, theta: int, query: SgqQuery, fg: FeasibleGraph) -> bool:
    group = (*V_S, v)
    return interior_unfamiliarity(group, fg) <= interior_rhs(len(group), query.p, query.k, theta)


def exterior_condition(V_S: Iterable[str], v: str, V_A: Iterable[str], query: SgqQuery, fg: FeasibleGraph) -> bool:
    group = (*V_S, v)
    pool = set(V_A)
    pool.discard(v)
    return exterior_expansibility(group, pool, query.k, fg) >= query.p - len(group)


# -- pruning ---------------------------------------------------------------

def distance_prune(incumbent: Incumbent, state: SgqSearchState, query: SgqQuery, fg: FeasibleGraph) -> bool:
    if incumbent.D == INF:
        return False
    need = query.p - len(state.V_S)
    slack = incumbent.D - state.TD
    if need <= 0:
        return slack < 0
    if not state.V_A:
        return True
    return slack < need * min(fg.dist[v] for v in state.V_A)


def inner_degrees(V_A: Iterable[str], fg: FeasibleGraph) -> list[int]:
    pool = frozenset(V_A)
    return [len(pool & fg.neighbors[v]) for v in pool]


def acquaintance_prune(state: SgqSearchState, query: SgqQuery, fg: FeasibleGraph) -> bool:
    """
    Every vertex picked from V_A needs at least need-1-k neighbours among the
    other picks, so the inner degrees of the picks sum to need*(need-1-k) or
    more. The sum of the `need` largest inner degrees is bounded above by
    sum - (|V_A| - need) * min.
    """
    need = query.p - len(state.V_S)
    if need <= 0:
        return False
    if len(state.V_A) < need:
        # no completion left
        return True
    degrees = inner_degrees(state.V_A, fg)
    if query.tight_acquaintance_bound:
        lhs = sum(sorted(degrees, reverse=True)[:need])
    else:
        lhs = sum(degrees) - (len(degrees) - need) * min(degrees)
    return lhs < need * (need - 1 - query.k)


# -- search ----------------------------------------------------------------

class SGSelect:
    """One search over a feasible graph; reusable incumbent across runs."""
    log_tag = '[SGSELECT]'

    def __init__(self, fg: FeasibleGraph, query: SgqQuery, incumbent: Incumbent | None = None):
        self.fg = fg
        self.query = query
        self.incumbent = incumbent if incumbent is not None else Incumbent()
        self.stats = SearchStats()
        self._order = {v: i for i, v in enumerate(fg.candidates)}

    def root(self, candidates: Iterable[str]) -> SgqSearchState:
        return SgqSearchState(
            V_S=(self.fg.origin,),
            V_A=set(candidates),
            TD=0.0,
            theta=self.query.theta0,
        )

    def run(self, candidates: Iterable[str]) -> None:
        state = self.root(candidates)
        if len(state.V_S) == self.query.p:
            self.stats.nodes_expanded += 1
            self.record(state)
            return
        self.expand(state)

    def expand(self, state: SgqSearchState) -> None:
        self.stats.nodes_expanded += 1
        p = self.query.p
        while len(state.V_S) + len(state.V_A) >= p:
            u = self.next_candidate(state)
            if u is None:
                if self.relax(state):
                    continue
                return
            verdict = self.admit(state, u)
            if verdict == DEFER:
                state.visited.add(u)
                continue
            if verdict == REMOVE:
                state.V_A.discard(u)
                logger.debug("%s remove %s at V_S=%s", self.log_tag, u, state.V_S)
                if self.prune(state):
                    return
                continue

            child = self.include(state, u)
            logger.debug("%s include %s -> V_S=%s TD=%s", self.log_tag, u, child.V_S, child.TD)
            if len(child.V_S) == p:
                self.record(child)
            elif not self.prune(child):
                self.expand(child)
            state.V_A.discard(u)
            if self.prune(state):
                return

    def next_candidate(self, state: SgqSearchState) -> str | None:
        best = None
        for v in state.V_A:
            if v in state.visited:
                continue
            if best is None or self._order[v] < self._order[best]:
                best = v
        return best

    def relax(self, state: SgqSearchState) -> bool:
        if state.theta > 0:
            state.theta -= 1
            state.visited.clear()
            logger.debug("%s theta -> %s at V_S=%s", self.log_tag, state.theta, state.V_S)
            return True
        return False

    def admit(self, state: SgqSearchState, u: str) -> str:
        if self.query.use_exterior_condition and not exterior_condition(
            state.V_S, u, state.V_A, self.query, self.fg,
        ):
            self.stats.prunes['exterior'] += 1
            return REMOVE
        if not interior_condition(state.V_S, u, state.theta, self.query, self.fg):
            self.stats.prunes['interior'] += 1
            return DEFER if state.theta > 0 else REMOVE
        return INCLUDE

    def include(self, state: SgqSearchState, u: str) -> SgqSearchState:
        return replace(
            state,
            V_S=state.V_S + (u,),
            V_A=state.V_A - {u},
            TD=state.TD + self.fg.dist[u],
            visited=set(),
        )

    def prune(self, state: SgqSearchState) -> bool:
        if self.query.use_distance_prune and distance_prune(self.incumbent, state, self.query, self.fg):
            self.stats.prunes['distance'] += 1
            return True
        if self.query.use_acquaintance_prune and acquaintance_prune(state, self.query, self.fg):
            self.stats.prunes['acquaintance'] += 1
            return True
        return False

    def record(self, state: SgqSearchState) -> None:
        if self.incumbent.offer(state.TD, state.V_S):
            logger.debug("%s incumbent %s total=%s", self.log_tag, self.incumbent.F, state.TD)


def solve_sgq(
    graph: SocialGraph,
    query: SgqQuery,
    *,
    candidates: Iterable[str] | None = None,
    fg: FeasibleGraph | None = None,
) -> tuple[Solution | None, SearchStats]:
    """
    Minimum-total-distance group of size p around query.q, or None ("Failure").

    `candidates` restricts who may join besides q (distances still come from
    the whole graph); `fg` reuses an already extracted feasible graph.
    """
    started = time.perf_counter()
    if fg is None:
        fg = extract_feasible_graph(graph, query.q, query.s)
    pool = list(fg.candidates)
    if candidates is not None:
        allowed = set(candidates)
        pool = [v for v in pool if v in allowed]

    search = SGSelect(fg, query)
    if 1 + len(pool) >= query.p:
        if query.acquaintance_vacuous:
            # con k >= p-1 cualquier grupo sirve: tomar los p-1 más cercanos
            group = (fg.origin, *pool[:query.p - 1])
            search.stats.nodes_expanded += 1
            search.record(SgqSearchState(
                V_S=group, V_A=set(), TD=sum((fg.dist[v] for v in group), 0.0), theta=query.theta0,
            ))
        else:
            search.run(pool)
    stats = search.stats
    stats.elapsed = time.perf_counter() - started
    solution = search.incumbent.solution()
    logger.info(
        "[SGSELECT] q=%s p=%s s=%s k=%s |V_F|=%s -> %s (nodes=%s, %.1f ms)",
        query.q, query.p, query.s, query.k, len(fg.members),
        f'total={solution.total:g}' if solution else 'failure',
        stats.nodes_expanded, stats.elapsed * 1000,
    )
    return solution, stats
