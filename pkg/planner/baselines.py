"""
Reference oracles and comparison heuristics.

brute_force_sgq and per_slot_stgq are exact and slow; pc_arrange imitates an
initiator phoning close friends first; stg_arrange finds the smallest k for
which STGSelect does at least as well as pc_arrange.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Iterable

from django.conf import settings

from .exceptions import OracleLimitError, PlannerError
from .graph_core import FeasibleGraph, SocialGraph, extract_feasible_graph
from .schedule_core import AvailabilityTable, SlotRange, earliest_common_window
from .sgq_solver import SearchStats, SgqQuery, Solution, solve_sgq
from .stgq_solver import StgqQuery, solve_stgq

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PcArrangeResult:
    members: tuple[str, ...]
    total: float
    period: SlotRange
    k_h: int


def enumeration_size(fg: FeasibleGraph, p: int, pool_size: int | None = None) -> int:
    """Number of candidate groups brute force visits: C(f-1, p-1)."""
    f = len(fg.candidates) if pool_size is None else pool_size
    return math.comb(f, p - 1)


def brute_force_sgq(
    graph: SocialGraph,
    query: SgqQuery,
    *,
    candidates: Iterable[str] | None = None,
    fg: FeasibleGraph | None = None,
    cap: int | None = None,
) -> tuple[Solution | None, SearchStats]:
    """
    Enumerate every (p-1)-subset of V_F - {q}; keep the cheapest acquainted one.

    stats.nodes_expanded counts the groups enumerated.
    """
    started = time.perf_counter()
    if fg is None:
        fg = extract_feasible_graph(graph, query.q, query.s)
    if cap is None:
        cap = int(getattr(settings, 'PLANNER_ENUMERATION_CAP', 10_000_000))

    pool = list(fg.candidates)
    if candidates is not None:
        allowed = set(candidates)
        pool = [v for v in pool if v in allowed]
    groups = enumeration_size(fg, query.p, len(pool))
    if groups > cap:
        raise OracleLimitError(groups, cap)

    stats = SearchStats()
    best: Solution | None = None
    for rest in combinations(pool, query.p - 1):
        stats.nodes_expanded += 1
        group = (fg.origin, *rest)
        if not fg.is_acquainted(group, query.k):
            continue
        total = sum(fg.dist[v] for v in group)
        if best is None or total < best.total:
            best = Solution(tuple(sorted(group)), total)

    stats.elapsed = time.perf_counter() - started
    logger.info(
        "[BASELINE] brute q=%s p=%s k=%s groups=%s -> %s",
        query.q, query.p, query.k, stats.nodes_expanded,
        f'total={best.total:g}' if best else 'failure',
    )
    return best, stats


def per_slot_stgq(
    graph: SocialGraph,
    table: AvailabilityTable,
    query: StgqQuery,
    *,
    brute: bool = False,
) -> tuple[Solution | None, SearchStats]:
    """
    Solve one SGQ per start slot t over the vertices free on [t, t+m-1].

    Ties keep the earliest period.
    """
    started = time.perf_counter()
    fg = extract_feasible_graph(graph, query.q, query.s)
    social = query.social()
    stats = SearchStats()
    best: Solution | None = None

    for t in range(1, table.horizon - query.m + 2):
        period = SlotRange(t, t + query.m - 1)
        if not table.available_throughout(query.q, period):
            continue
        free = [v for v in fg.candidates if table.available_throughout(v, period)]
        if brute:
            solution, slot_stats = brute_force_sgq(graph, social, candidates=free, fg=fg)
        else:
            solution, slot_stats = solve_sgq(graph, social, candidates=free, fg=fg)
        stats.merge(slot_stats)
        if solution is not None and (best is None or solution.total < best.total):
            best = replace(solution, period=period)

    stats.elapsed = time.perf_counter() - started
    logger.info(
        "[BASELINE] per-slot q=%s p=%s k=%s m=%s -> %s",
        query.q, query.p, query.k, query.m,
        f'total={best.total:g} period={best.period}' if best else 'failure',
    )
    return best, stats


def pc_arrange(graph: SocialGraph, table: AvailabilityTable, query: StgqQuery) -> PcArrangeResult | None:
    """
    Invite candidates by increasing distance and keep each one only if the
    invited set still shares an m-slot window somewhere in [1, T]. Skipped
    candidates are never asked again. query.k is ignored.
    """
    fg = extract_feasible_graph(graph, query.q, query.s)
    invited = [query.q]
    if earliest_common_window(table, invited, query.m) is None:
        logger.info("[BASELINE] pc-arrange: %s has no %s-slot window", query.q, query.m)
        return None
    for v in fg.candidates:
        if len(invited) == query.p:
            break
        if earliest_common_window(table, [*invited, v], query.m) is not None:
            invited.append(v)
        else:
            logger.debug("[BASELINE] pc-arrange skips %s", v)
    if len(invited) < query.p:
        logger.info("[BASELINE] pc-arrange kept %s of %s attendees", len(invited), query.p)
        return None

    result = PcArrangeResult(
        members=tuple(sorted(invited)),
        total=sum(fg.dist[v] for v in invited),
        period=earliest_common_window(table, invited, query.m),
        k_h=max(fg.non_neighbors_within(v, invited) for v in invited),
    )
    logger.info("[BASELINE] pc-arrange -> total=%g k_h=%s period=%s", result.total, result.k_h, result.period)
    return result


def stg_arrange(
    graph: SocialGraph,
    table: AvailabilityTable,
    query: StgqQuery,
    *,
    reference: PcArrangeResult | None = None,
) -> tuple[int, Solution] | None:
    """Smallest k whose STGSelect total is no worse than pc_arrange's, with that solution."""
    if reference is None:
        reference = pc_arrange(graph, table, query)
    if reference is None:
        return None
    tolerance = float(getattr(settings, 'PLANNER_FLOAT_TOLERANCE', 1e-9))
    # con k = k_h siempre hay respuesta: el grupo de pc_arrange ya es factible
    for k in range(reference.k_h + 1):
        solution, _ = solve_stgq(graph, table, replace(query, k=k))
        if solution is not None and solution.total <= reference.total + tolerance:
            logger.info("[BASELINE] stg-arrange k*=%s total=%g (pc-arrange %g)", k, solution.total, reference.total)
            return k, solution
    raise PlannerError(f'no k <= {reference.k_h} matches the pc-arrange total {reference.total:g}')
