"""
Social graph and radius-constrained feasible graph.

Vertex ids are whitespace-free strings; their lexicographic order is the
tie-breaking order used everywhere downstream.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import networkx as nx

from .exceptions import InputError

logger = logging.getLogger(__name__)

INF = math.inf


class SocialGraph:
    """Weighted undirected graph; weights are social distances. Immutable."""

    def __init__(self, graph: nx.Graph):
        self._graph = nx.freeze(graph)
        self._vertices = tuple(sorted(graph.nodes))
        self._neighbors = {
            v: frozenset(graph.adj[v]) for v in self._vertices
        }

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[str, str, float]],
        vertices: Iterable[str] = (),
    ) -> 'SocialGraph':
        graph = nx.Graph()
        for v in vertices:
            _check_vertex_id(v)
            graph.add_node(v)
        for u, v, w in edges:
            _check_vertex_id(u)
            _check_vertex_id(v)
            if u == v:
                raise InputError(f'self-loop on vertex {u!r}')
            if graph.has_edge(u, v):
                raise InputError(f'duplicate edge {u!r}-{v!r}')
            weight = float(w)
            if not (weight > 0 and math.isfinite(weight)):
                raise InputError(f'edge {u!r}-{v!r} has non-positive or non-finite weight {w!r}')
            graph.add_edge(u, v, weight=weight)
        return cls(graph)

    @property
    def nx(self) -> nx.Graph:
        """Frozen networkx view of the graph."""
        return self._graph

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    def __contains__(self, v) -> bool:
        return v in self._neighbors

    def __len__(self) -> int:
        return len(self._vertices)

    def neighbors(self, v: str) -> frozenset[str]:
        try:
            return self._neighbors[v]
        except KeyError:
            raise InputError(f'unknown vertex {v!r}') from None

    def weight(self, u: str, v: str) -> float:
        return self._graph.edges[u, v]['weight']

    def edges(self) -> list[tuple[str, str, float]]:
        """Edges as (u, v, w) with u < v, sorted."""
        out = []
        for u, v, w in self._graph.edges(data='weight'):
            if v < u:
                u, v = v, u
            out.append((u, v, w))
        out.sort()
        return out

    def number_of_edges(self) -> int:
        return self._graph.number_of_edges()


def _check_vertex_id(v) -> None:
    if not isinstance(v, str) or not v or any(ch.isspace() for ch in v):
        raise InputError(f'vertex id must be a non-empty whitespace-free string, got {v!r}')


@dataclass(frozen=True)
class FeasibleGraph:
    """Vertices within `radius` hops of `origin`, with hop-bounded distances."""
    origin: str
    radius: int
    members: frozenset[str]
    dist: Mapping[str, float]
    pred: Mapping[str, str | None]
    neighbors: Mapping[str, frozenset[str]]
    edges: tuple[tuple[str, str, float], ...]
    # pred_layers[i][v]: predecessor of v on a minimum-distance path of <= i edges
    pred_layers: tuple[Mapping[str, str], ...] = field(repr=False, default=())

    @property
    def candidates(self) -> tuple[str, ...]:
        """Members other than the origin, by (distance, id)."""
        return tuple(sorted(
            (v for v in self.members if v != self.origin),
            key=lambda v: (self.dist[v], v),
        ))

    def non_neighbors_within(self, v: str, group) -> int:
        """|group - {v} - N_v|"""
        nbrs = self.neighbors[v]
        return sum(1 for u in group if u != v and u not in nbrs)

    def is_acquainted(self, group, k: int) -> bool:
        """True iff every member misses at most k others of `group`."""
        return all(self.non_neighbors_within(v, group) <= k for v in group)


def s_edge_min_distances(graph: SocialGraph, q: str, s: int) -> dict[str, tuple[float, str | None]]:
    """
    Minimum distance from q over paths of at most s edges, for every vertex.

    Returns v -> (distance, predecessor); unreachable vertices get (inf, None).
    """
    distances, layers = _relax_rounds(graph, q, s)
    final = layers[-1] if layers else {}
    return {v: (distances[v], final.get(v)) for v in graph.vertices}


def _relax_rounds(graph: SocialGraph, q: str, s: int):
    if q not in graph:
        raise InputError(f'unknown initiator {q!r}')
    if not isinstance(s, int) or s < 1:
        raise InputError(f'radius s must be a positive integer, got {s!r}')

    previous = {v: INF for v in graph.vertices}
    previous[q] = 0.0
    pred: dict[str, str] = {}
    layers = []
    for i in range(1, s + 1):
        current = dict(previous)
        pred = dict(pred)
        for v in graph.vertices:
            if v == q:
                continue
            for u in sorted(graph.neighbors(v)):
                candidate = previous[u] + graph.weight(u, v)
                if candidate < current[v]:
                    current[v] = candidate
                    pred[v] = u
        layers.append(pred)
        if current == previous:
            # converged; remaining rounds would repeat this layer
            layers.extend([pred] * (s - i))
            break
        previous = current
    return current, layers


def extract_feasible_graph(graph: SocialGraph, q: str, s: int) -> FeasibleGraph:
    distances, layers = _relax_rounds(graph, q, s)
    members = frozenset(v for v, d in distances.items() if d < INF)
    final = layers[-1] if layers else {}
    neighbors = {v: graph.neighbors(v) & members for v in members}
    edges = tuple(
        (u, v, w) for u, v, w in graph.edges() if u in members and v in members
    )
    logger.debug(
        "[GRAPH] feasible graph for q=%s s=%s: %s of %s vertices, %s edges",
        q, s, len(members), len(graph), len(edges),
    )
    return FeasibleGraph(
        origin=q,
        radius=s,
        members=members,
        dist={v: distances[v] for v in members},
        pred={v: final.get(v) for v in members},
        neighbors=neighbors,
        edges=edges,
        pred_layers=tuple(layers),
    )


def reconstruct_path(fg: FeasibleGraph, v: str) -> list[str]:
    """Witness path [q, ..., v] of at most `radius` edges whose weight is dist[v]."""
    if v not in fg.members:
        raise InputError(f'vertex {v!r} is not in the feasible graph of {fg.origin!r}')
    path = [v]
    level = fg.radius
    while path[-1] != fg.origin:
        # d^i_v = d^{i-1}_u + c_{u,v}, so step down one layer per edge
        path.append(fg.pred_layers[level - 1][path[-1]])
        level -= 1
    path.reverse()
    return path
