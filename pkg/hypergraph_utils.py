"""
Utilities for labeled uniform hypergraphs.

Vertices are labeled 1..r, edges are sorted tuples of labels. The gap series
sums over every labeled k-uniform hypergraph with m distinct edges and no
isolated vertex; these helpers enumerate them, split them into connected
components and compute canonical forms for isomorphism caching.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

import networkx as nx

from permspec_errors import ResourceLimitExceeded
from settings import HYPERGRAPH_SIZE_LIMIT

logger = logging.getLogger(__name__)

Edge = Tuple[int, ...]


@dataclass(frozen=True)
class DegreeSequence:
    """Vertex degrees listed in label order."""
    degrees: Tuple[int, ...]

    def __post_init__(self):
        if not self.degrees or any(d < 1 for d in self.degrees):
            raise ValueError(f"degrees must be positive, got {self.degrees}")

    @property
    def total(self) -> int:
        return sum(self.degrees)

    def __len__(self):
        return len(self.degrees)


@dataclass(frozen=True)
class Hypergraph:
    num_vertices: int
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        edges = tuple(sorted(tuple(sorted(e)) for e in self.edges))
        object.__setattr__(self, "edges", edges)
        if len(set(edges)) != len(edges):
            raise ValueError(f"edges must be distinct: {edges}")
        if len({len(e) for e in edges}) > 1:
            raise ValueError(f"edges must all have the same size: {edges}")
        covered = {v for e in edges for v in e}
        if covered != set(range(1, self.num_vertices + 1)):
            raise ValueError(f"vertices 1..{self.num_vertices} must each lie on an edge: {edges}")

    @classmethod
    def from_edges(cls, edges: Iterable[Iterable[int]]) -> "Hypergraph":
        edges = [tuple(e) for e in edges]
        return cls(num_vertices=max((v for e in edges for v in e), default=0), edges=tuple(edges))

    @property
    def k(self) -> int:
        return len(self.edges[0]) if self.edges else 0

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> FrozenSet[int]:
        return frozenset(range(1, self.num_vertices + 1))

    def degree_sequence(self) -> DegreeSequence:
        degrees = [0] * self.num_vertices
        for edge in self.edges:
            for v in edge:
                degrees[v - 1] += 1
        return DegreeSequence(tuple(degrees))

    def relabel(self, mapping: Dict[int, int]) -> "Hypergraph":
        return Hypergraph(self.num_vertices, tuple(tuple(mapping[v] for v in e) for e in self.edges))

    def components(self) -> List["Hypergraph"]:
        """Connected components, each relabeled 1..r_i in increasing label order."""
        parts = []
        for block in incidence_components(self.vertices, self.edges):
            order = {v: i + 1 for i, v in enumerate(sorted(block))}
            parts.append(Hypergraph(len(block), tuple(tuple(order[v] for v in e)
                                                      for e in self.edges if e[0] in block)))
        return parts

    def disjoint_union(self, other: "Hypergraph") -> "Hypergraph":
        shift = self.num_vertices
        return Hypergraph(self.num_vertices + other.num_vertices,
                          self.edges + tuple(tuple(v + shift for v in e) for e in other.edges))


def incidence_components(vertices: Iterable[int], edges: Iterable[Sequence[int]]) -> List[FrozenSet[int]]:
    """
    Vertex sets of the connected components of a hypergraph.

    Edges are cut down to `vertices` first; vertices on no edge are their own
    component.
    """
    vertices = set(vertices)
    graph = nx.Graph()
    graph.add_nodes_from(("v", v) for v in vertices)
    for index, edge in enumerate(edges):
        members = [v for v in edge if v in vertices]
        if members:
            graph.add_edges_from((("e", index), ("v", v)) for v in members)
    components = []
    for nodes in nx.connected_components(graph):
        block = frozenset(label for kind, label in nodes if kind == "v")
        if block:
            components.append(block)
    return sorted(components, key=min)


def enumerate_hypergraphs(k: int, m: int, size_limit: int = HYPERGRAPH_SIZE_LIMIT) -> List[Hypergraph]:
    """
    Every labeled k-uniform hypergraph on {1..r} with m distinct edges and no isolated vertex.

    Args:
        k: Edge size
        m: Number of edges
        size_limit: Largest allowed m*k

    Returns:
        Hypergraphs ordered by vertex count, then by edge list

    Raises:
        ResourceLimitExceeded: m*k exceeds size_limit
    """
    if k < 1 or m < 1:
        raise ValueError(f"need k >= 1 and m >= 1, got k={k}, m={m}")
    if m * k > size_limit:
        raise ResourceLimitExceeded(f"m*k = {m * k} exceeds the hypergraph size limit {size_limit}")

    result = []
    for r in range(k, m * k + 1):
        all_edges = list(itertools.combinations(range(1, r + 1), k))
        if len(all_edges) < m:
            continue
        chosen: List[Edge] = []

        def extend(start: int, covered: FrozenSet[int]):
            remaining = m - len(chosen)
            if remaining == 0:
                if len(covered) == r:
                    result.append(Hypergraph(r, tuple(chosen)))
                return
            if r - len(covered) > remaining * k:
                return
            uncovered = min(set(range(1, r + 1)) - covered, default=None)
            for index in range(start, len(all_edges) - remaining + 1):
                edge = all_edges[index]
                # edges are in lex order, so later edges cannot reach a smaller vertex
                if uncovered is not None and edge[0] > uncovered:
                    break
                chosen.append(edge)
                extend(index + 1, covered | frozenset(edge))
                chosen.pop()

        extend(0, frozenset())
    logger.debug(f"Enumerated {len(result)} hypergraphs with k={k}, m={m}")
    return result


def _vertex_invariants(graph: Hypergraph) -> Dict[int, Tuple]:
    degrees = graph.degree_sequence().degrees
    invariants = {}
    for v in range(1, graph.num_vertices + 1):
        incident = sorted(tuple(sorted(degrees[u - 1] for u in e)) for e in graph.edges if v in e)
        invariants[v] = (degrees[v - 1], tuple(incident))
    return invariants


def _canonical_connected(graph: Hypergraph) -> Tuple:
    invariants = _vertex_invariants(graph)
    cells: Dict[Tuple, List[int]] = {}
    for v, invariant in invariants.items():
        cells.setdefault(invariant, []).append(v)
    ordered_cells = [cells[key] for key in sorted(cells)]

    best = None
    for arrangement in itertools.product(*(itertools.permutations(cell) for cell in ordered_cells)):
        order = [v for cell in arrangement for v in cell]
        mapping = {v: i + 1 for i, v in enumerate(order)}
        edges = tuple(sorted(tuple(sorted(mapping[v] for v in e)) for e in graph.edges))
        if best is None or edges < best:
            best = edges
    return (graph.num_vertices, best)


def canonical_form(graph: Hypergraph) -> Tuple:
    """
    Isomorphism-invariant key: the sorted canonical forms of the components.

    Each component is relabeled cell by cell, cells being vertices with equal
    degree and incident-edge degree profile, and the lexicographically
    smallest edge list is kept.
    """
    return tuple(sorted(_canonical_connected(part) for part in graph.components()))
