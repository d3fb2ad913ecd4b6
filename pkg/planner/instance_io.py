"""
Instance text formats, the solution document and the synthetic generator.

Graph file:     `u v w` per edge (`v` alone declares an isolated vertex).
Schedule file:  `slots T`, then `u B` with B a 0/1 string of length T.
Both formats ignore blank lines and lines starting with `#`.
"""
from __future__ import annotations

import io
import logging
import math
import re
from dataclasses import dataclass
from typing import Iterator

from django.conf import settings
from rest_framework import exceptions as drf_exceptions
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from .exceptions import InputError, ParseError
from .graph_core import SocialGraph
from .schedule_core import AvailabilityTable
from .serializers import SolutionDocumentSerializer
from .sgq_solver import SearchStats, SgqQuery, Solution
from .stgq_solver import StgqQuery

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r'\S+')


def _tokens(text: str) -> Iterator[tuple[int, list[tuple[int, str]]]]:
    """(line number, [(column, token), ...]) for every meaningful line."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        yield lineno, [(m.start() + 1, m.group()) for m in _TOKEN.finditer(line)]


def format_number(x: float) -> str:
    """Integral values without a decimal point, others as shortest repr."""
    return str(int(x)) if float(x).is_integer() else repr(float(x))


# -- graphs ----------------------------------------------------------------

def parse_graph(text: str, source: str = '<graph>') -> SocialGraph:
    vertices: list[str] = []
    edges: list[tuple[str, str, float]] = []
    seen: set[frozenset] = set()
    for lineno, tokens in _tokens(text):
        if len(tokens) == 1:
            vertices.append(tokens[0][1])
            continue
        if len(tokens) != 3:
            raise ParseError(f'expected `u v w`, got {len(tokens)} fields', lineno, tokens[0][0], source)
        (_, u), (_, v), (col, raw) = tokens
        if u == v:
            raise ParseError(f'self-loop on {u!r}', lineno, tokens[1][0], source)
        try:
            w = float(raw)
        except ValueError:
            raise ParseError(f'weight {raw!r} is not a number', lineno, col, source) from None
        if not (w > 0 and math.isfinite(w)):
            raise ParseError(f'weight {raw!r} must be positive and finite', lineno, col, source)
        pair = frozenset((u, v))
        if pair in seen:
            raise ParseError(f'duplicate edge {u!r}-{v!r}', lineno, tokens[0][0], source)
        seen.add(pair)
        edges.append((u, v, w))
    graph = SocialGraph.from_edges(edges, vertices)
    logger.debug("[IO] parsed %s: %s vertices, %s edges", source, len(graph), graph.number_of_edges())
    return graph


def serialize_graph(graph: SocialGraph) -> str:
    lines = [f'{u} {v} {format_number(w)}' for u, v, w in graph.edges()]
    lines += [v for v in graph.vertices if not graph.neighbors(v)]
    return ''.join(f'{line}\n' for line in lines)


# -- schedules -------------------------------------------------------------

def parse_schedule(text: str, source: str = '<schedule>') -> AvailabilityTable:
    horizon = None
    rows: dict[str, list[bool]] = {}
    for lineno, tokens in _tokens(text):
        if horizon is None:
            if tokens[0][1] != 'slots':
                raise ParseError(f'expected header `slots T`, got {tokens[0][1]!r}', lineno, tokens[0][0], source)
            if len(tokens) != 2 or not (tokens[1][1].isascii() and tokens[1][1].isdigit()) or int(tokens[1][1]) < 1:
                col = tokens[1][0] if len(tokens) > 1 else tokens[0][0]
                raise ParseError('`slots` needs one positive integer', lineno, col, source)
            horizon = int(tokens[1][1])
            continue
        if len(tokens) != 2:
            raise ParseError(f'expected `u B`, got {len(tokens)} fields', lineno, tokens[0][0], source)
        (_, v), (col, bits) = tokens
        if v in rows:
            raise ParseError(f'second row for {v!r}', lineno, tokens[0][0], source)
        bad = next((i for i, ch in enumerate(bits) if ch not in '01'), None)
        if bad is not None:
            raise ParseError(f'availability must be 0/1, got {bits[bad]!r}', lineno, col + bad, source)
        if len(bits) != horizon:
            raise ParseError(f'row has {len(bits)} slots, expected {horizon}', lineno, col, source)
        rows[v] = [ch == '1' for ch in bits]
    if horizon is None:
        raise ParseError('missing `slots T` header', 1, 1, source)
    logger.debug("[IO] parsed %s: T=%s, %s rows", source, horizon, len(rows))
    return AvailabilityTable(horizon, rows)


def serialize_schedule(table: AvailabilityTable) -> str:
    lines = [f'slots {table.horizon}']
    for v in table.vertices:
        lines.append(f"{v} {''.join('1' if a else '0' for a in table.row(v))}")
    return ''.join(f'{line}\n' for line in lines)


# -- generator -------------------------------------------------------------

class SplitMix64:
    """64-bit SplitMix generator; integer-only so seeds reproduce everywhere."""
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n < 1:
            raise ValueError('n must be positive')
        limit = (1 << 64) - (1 << 64) % n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, a: int, b: int) -> int:
        return a + self.below(b - a + 1)

    def chance(self, threshold: int) -> bool:
        """True with probability threshold / 2**53 (see `probability_threshold`)."""
        return (self.next_u64() >> 11) < threshold


def probability_threshold(prob: float) -> int:
    return round(prob * (1 << 53))


GRAPH_MODELS = ('attachment', 'uniform')


@dataclass(frozen=True)
class GenConfig:
    n: int = 100
    model: str = 'attachment'
    edges_per_vertex: int = 3
    weight_range: tuple[int, int] = (1, 100)
    T: int = 24
    avail_prob: float = 0.7
    run_bias: float = 0.6
    seed: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise InputError(f'n must be >= 2, got {self.n}')
        if self.model not in GRAPH_MODELS:
            raise InputError(f'model must be one of {GRAPH_MODELS}, got {self.model!r}')
        if self.edges_per_vertex < 1:
            raise InputError('edges_per_vertex must be >= 1')
        low, high = self.weight_range
        if not 1 <= low <= high:
            raise InputError(f'weight_range must satisfy 1 <= low <= high, got {self.weight_range}')
        if self.T < 1:
            raise InputError('T must be >= 1')
        for name in ('avail_prob', 'run_bias'):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InputError(f'{name} must lie in [0, 1]')

    @property
    def vertex_ids(self) -> tuple[str, ...]:
        width = len(str(self.n - 1))
        return tuple(f'v{i:0{width}d}' for i in range(self.n))

    @property
    def initiator(self) -> str:
        return self.vertex_ids[0]


def _attachment_edges(rng: SplitMix64, n: int, e: int) -> set[tuple[int, int]]:
    # degree-proportional choice through the endpoint list
    edges: set[tuple[int, int]] = set()
    endpoints: list[int] = [0]
    for i in range(1, n):
        targets: set[int] = set()
        wanted = min(e, i)
        while len(targets) < wanted:
            targets.add(endpoints[rng.below(len(endpoints))])
        for j in sorted(targets):
            edges.add((j, i))
            endpoints += [i, j]
    return edges


def _uniform_edges(rng: SplitMix64, n: int, e: int) -> set[tuple[int, int]]:
    # primero un árbol aleatorio, así todos quedan conectados con el vértice 0
    edges = {(rng.below(i), i) for i in range(1, n)}
    target = min(n * e // 2 + n - 1, n * (n - 1) // 2)
    while len(edges) < target:
        a, b = rng.below(n), rng.below(n)
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return edges


def generate(config: GenConfig) -> tuple[SocialGraph, AvailabilityTable]:
    rng = SplitMix64(config.seed)
    ids = config.vertex_ids
    if config.model == 'attachment':
        pairs = _attachment_edges(rng, config.n, config.edges_per_vertex)
    else:
        pairs = _uniform_edges(rng, config.n, config.edges_per_vertex)
    low, high = config.weight_range
    edges = [(ids[a], ids[b], rng.randint(low, high)) for a, b in sorted(pairs)]
    graph = SocialGraph.from_edges(edges, ids)

    available = probability_threshold(config.avail_prob)
    repeat = probability_threshold(config.run_bias)
    masks = {}
    for v in ids:
        mask = 0
        state = rng.chance(available)
        for t in range(config.T):
            if t and not rng.chance(repeat):
                state = rng.chance(available)
            if state:
                mask |= 1 << t
        masks[v] = mask
    table = AvailabilityTable.from_masks(config.T, masks)
    logger.info(
        "[IO] generated %s graph n=%s edges=%s T=%s seed=%s",
        config.model, config.n, graph.number_of_edges(), config.T, config.seed,
    )
    return graph, table


# -- solution document -----------------------------------------------------

def solution_document(
    solution: Solution | None,
    stats: SearchStats,
    query: SgqQuery,
    algorithm: str,
) -> dict:
    temporal = isinstance(query, StgqQuery)
    period = solution.period if solution is not None else None
    return {
        'schema': getattr(settings, 'PLANNER_SOLUTION_SCHEMA', 'planner.solution/1'),
        'problem': 'stgq' if temporal else 'sgq',
        'algorithm': algorithm,
        'status': 'success' if solution is not None else 'failure',
        'query': {
            'q': query.q, 'p': query.p, 's': query.s, 'k': query.k,
            'm': query.m if temporal else None,
        },
        'members': list(solution.members) if solution is not None else [],
        'total': solution.total if solution is not None else None,
        'period': {'start': period.start, 'end': period.end} if period else None,
        'stats': {
            'nodes_expanded': stats.nodes_expanded,
            'prunes': stats.prune_counts(),
            'elapsed_ms': round(stats.elapsed * 1000, 3),
        },
    }


def write_solution(
    solution: Solution | None,
    stats: SearchStats,
    query: SgqQuery,
    algorithm: str = 'sgselect',
) -> str:
    """JSON solution document; validated against the schema before rendering."""
    serializer = SolutionDocumentSerializer(data=solution_document(solution, stats, query, algorithm))
    serializer.is_valid(raise_exception=True)
    return JSONRenderer().render(serializer.data, renderer_context={'indent': 2}).decode() + '\n'


def read_solution(text: str) -> dict:
    try:
        data = JSONParser().parse(io.BytesIO(text.encode()))
    except drf_exceptions.ParseError as exc:
        raise InputError(f'solution document is not JSON: {exc.detail}') from None
    serializer = SolutionDocumentSerializer(data=data)
    try:
        serializer.is_valid(raise_exception=True)
    except drf_exceptions.ValidationError as exc:
        raise InputError(f'invalid solution document: {exc.detail}') from None
    return serializer.validated_data

