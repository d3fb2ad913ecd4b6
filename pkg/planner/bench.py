"""
Benchmark grid: every (algorithm, seed, parameter point) cell on generated
instances, one CSV row per cell.

Grids are written as space-separated `axis=values`, where values are a single
number, an inclusive range `a..b`, or a comma list:

    p=4..8 s=1 k=2 n=100 seeds=1..5 algorithms=sgselect,brute
"""
from __future__ import annotations

import csv
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, TextIO

import django
from django.conf import settings

from .baselines import brute_force_sgq, per_slot_stgq
from .exceptions import InputError, OracleLimitError
from .instance_io import GenConfig, format_number, generate
from .sgq_solver import SgqQuery, solve_sgq
from .stgq_solver import StgqQuery, solve_stgq

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    'algorithm', 'seed', 'n', 'p', 's', 'k', 'm', 'total', 'nodes',
    'prune_distance', 'prune_acquaintance', 'prune_availability', 'runtime_ms', 'status',
]

SGQ_ALGORITHMS = ('sgselect', 'brute')
STGQ_ALGORITHMS = ('stgselect', 'per-slot')

INT_AXES = ('p', 's', 'k', 'n', 'm', 'T', 'seeds')
DEFAULTS = {
    'p': [4], 's': [1], 'k': [2], 'n': [100], 'm': [3], 'T': [24], 'seeds': [1],
    'algorithms': ['sgselect', 'brute'], 'avail': [0.7], 'model': ['attachment'],
}


@dataclass(frozen=True)
class BenchCell:
    algorithm: str
    seed: int
    n: int
    p: int
    s: int
    k: int
    m: int
    T: int
    avail: float
    model: str

    @property
    def temporal(self) -> bool:
        return self.algorithm in STGQ_ALGORITHMS

    def gen_config(self) -> GenConfig:
        return GenConfig(n=self.n, model=self.model, T=self.T, avail_prob=self.avail, seed=self.seed)


def _values(axis: str, raw: str) -> list:
    if axis in INT_AXES:
        try:
            if '..' in raw:
                low, high = (int(x) for x in raw.split('..', 1))
                return list(range(low, high + 1))
            return [int(x) for x in raw.split(',')]
        except ValueError:
            raise InputError(f'grid axis {axis!r}: cannot read {raw!r}') from None
    if axis == 'avail':
        try:
            return [float(x) for x in raw.split(',')]
        except ValueError:
            raise InputError(f'grid axis avail: cannot read {raw!r}') from None
    return raw.split(',')


def parse_grid(text: str) -> dict[str, list]:
    grid = {axis: list(values) for axis, values in DEFAULTS.items()}
    for token in text.split():
        axis, sep, raw = token.partition('=')
        if not sep or axis not in DEFAULTS:
            raise InputError(f'unknown grid axis in {token!r}; known: {", ".join(DEFAULTS)}')
        grid[axis] = _values(axis, raw)
        if not grid[axis]:
            raise InputError(f'grid axis {axis!r} is empty')
    unknown = set(grid['algorithms']) - set(SGQ_ALGORITHMS) - set(STGQ_ALGORITHMS)
    if unknown:
        raise InputError(f'unknown algorithm {sorted(unknown)[0]!r}')
    return grid


def grid_cells(grid: dict[str, list]) -> list[BenchCell]:
    """Cells ordered by parameter point, then seed, then algorithm."""
    cells = []
    for n, p, s, k, seed, algorithm in itertools.product(
        grid['n'], grid['p'], grid['s'], grid['k'], grid['seeds'], grid['algorithms'],
    ):
        temporal = algorithm in STGQ_ALGORITHMS
        for m, T, avail in itertools.product(
            grid['m'] if temporal else [grid['m'][0]],
            grid['T'] if temporal else [grid['T'][0]],
            grid['avail'] if temporal else [grid['avail'][0]],
        ):
            cells.append(BenchCell(algorithm, seed, n, p, s, k, m, T, avail, grid['model'][0]))
    return cells


@lru_cache(maxsize=32)
def _instance(config: GenConfig):
    return generate(config)


def run_cell(cell: BenchCell) -> dict:
    config = cell.gen_config()
    graph, table = _instance(config)
    row = {
        'algorithm': cell.algorithm, 'seed': cell.seed, 'n': cell.n, 'p': cell.p,
        's': cell.s, 'k': cell.k, 'm': cell.m if cell.temporal else '',
    }
    try:
        if cell.temporal:
            query = StgqQuery(q=config.initiator, p=cell.p, s=cell.s, k=cell.k, m=cell.m)
            solver = solve_stgq if cell.algorithm == 'stgselect' else per_slot_stgq
            solution, stats = solver(graph, table, query)
        else:
            query = SgqQuery(q=config.initiator, p=cell.p, s=cell.s, k=cell.k)
            solver = solve_sgq if cell.algorithm == 'sgselect' else brute_force_sgq
            solution, stats = solver(graph, query)
    except OracleLimitError as exc:
        logger.warning("[BENCH] %s skipped: %s", cell, exc)
        return {**row, 'total': '', 'nodes': '', 'prune_distance': '', 'prune_acquaintance': '',
                'prune_availability': '', 'runtime_ms': '', 'status': 'skipped'}

    prunes = stats.prune_counts()
    return {
        **row,
        'total': format_number(solution.total) if solution else '',
        'nodes': stats.nodes_expanded,
        'prune_distance': prunes['distance'],
        'prune_acquaintance': prunes['acquaintance'],
        'prune_availability': prunes['availability'],
        'runtime_ms': f'{stats.elapsed * 1000:.3f}',
        'status': 'success' if solution else 'failure',
    }


def bench_grid(grid: dict[str, list] | str, workers: int | None = None) -> list[dict]:
    if isinstance(grid, str):
        grid = parse_grid(grid)
    if workers is None:
        workers = int(getattr(settings, 'PLANNER_BENCH_WORKERS', 1))
    cells = grid_cells(grid)
    logger.info("[BENCH] %s cells on %s worker(s)", len(cells), workers)
    if workers <= 1:
        return [run_cell(cell) for cell in cells]
    # children of a spawn-based pool start without app registry
    with ProcessPoolExecutor(max_workers=workers, initializer=django.setup) as pool:
        return list(pool.map(run_cell, cells))


def write_csv(rows: Iterable[dict], out: TextIO) -> None:
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator='\n')
    writer.writeheader()
    writer.writerows(rows)
