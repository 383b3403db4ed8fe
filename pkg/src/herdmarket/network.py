"""Social networks stored as compressed adjacency (CSR) arrays."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ModelParams, Topology


@dataclass(frozen=True)
class SocialNetwork:
    """Per-agent ordered neighbor lists.

    Agent ``i`` polls ``indices[indptr[i]:indptr[i+1]]`` in that order; the
    trust weight for each (agent, neighbor) slot lives at the same offset.
    """

    indptr: np.ndarray
    indices: np.ndarray

    @property
    def n_agents(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_links(self) -> int:
        return len(self.indices)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(i).tolist() for i in range(self.n_agents)]

    def is_symmetric(self) -> bool:
        pairs = set()
        for i in range(self.n_agents):
            for j in self.neighbors(i):
                pairs.add((i, int(j)))
        return all((j, i) in pairs for i, j in pairs)

    @classmethod
    def from_adjacency(cls, adjacency: list[list[int]]) -> "SocialNetwork":
        indptr = np.zeros(len(adjacency) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in adjacency])
        flat = [j for a in adjacency for j in a]
        return cls(indptr=indptr, indices=np.asarray(flat, dtype=np.int64))


def lattice4(side: int) -> SocialNetwork:
    """Periodic square lattice, row-major indexing.

    Neighbor order is (right, left, down, up), so on a 50x50 torus agent 0
    polls [1, 49, 50, 2450].
    """
    idx = np.arange(side * side).reshape(side, side)
    right = np.roll(idx, -1, axis=1)
    left = np.roll(idx, 1, axis=1)
    down = np.roll(idx, -1, axis=0)
    up = np.roll(idx, 1, axis=0)
    indices = np.stack([right, left, down, up], axis=-1).reshape(-1).astype(np.int64)
    indptr = np.arange(0, 4 * side * side + 1, 4, dtype=np.int64)
    return SocialNetwork(indptr=indptr, indices=indices)


def complete(n: int) -> SocialNetwork:
    adjacency = [[j for j in range(n) if j != i] for i in range(n)]
    return SocialNetwork.from_adjacency(adjacency)


def random_graph(n: int, mean_degree: float, rng: np.random.Generator) -> SocialNetwork:
    """Uniform random simple graph with ``round(n * mean_degree / 2)`` edges."""
    n_edges = int(round(n * mean_degree / 2))
    max_edges = n * (n - 1) // 2
    n_edges = min(n_edges, max_edges)
    # sample distinct unordered pairs by rejection; cheap for sparse graphs
    edges: set[tuple[int, int]] = set()
    while len(edges) < n_edges:
        need = n_edges - len(edges)
        a = rng.integers(0, n, size=2 * need + 8)
        b = rng.integers(0, n, size=2 * need + 8)
        for x, y in zip(a.tolist(), b.tolist()):
            if x == y:
                continue
            edges.add((x, y) if x < y else (y, x))
            if len(edges) == n_edges:
                break
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for x, y in sorted(edges):
        adjacency[x].append(y)
        adjacency[y].append(x)
    for a in adjacency:
        a.sort()
    return SocialNetwork.from_adjacency(adjacency)


def build_network(params: ModelParams, rng: np.random.Generator) -> SocialNetwork:
    if params.topology is Topology.LATTICE4:
        return lattice4(params.lattice_side)
    if params.topology is Topology.COMPLETE:
        return complete(params.n_agents)
    return random_graph(params.n_agents, params.mean_degree, rng)
