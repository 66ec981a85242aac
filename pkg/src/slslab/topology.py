"""Agent interaction networks.

Supports complete graphs, clustering-maximized regular graphs (greedy
degree-preserving double-edge swaps), edge-list ingestion of real
networks, and k-core decomposition with an acceptance check for the
real-network pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Topology:
    """Undirected simple graph over densely labeled nodes [0, n).

    Immutable after construction; ``node_map`` records original labels
    when nodes were relabeled (ingestion, k-core).
    """

    n_nodes: int
    adjacency: tuple[frozenset, ...]
    node_map: tuple | None = None  # new index -> original label

    def __post_init__(self):
        for i, nbrs in enumerate(self.adjacency):
            if i in nbrs:
                raise TopologyError(f"self-loop at node {i}")
            for j in nbrs:
                if not 0 <= j < self.n_nodes:
                    raise TopologyError(f"neighbor {j} out of range")
                if i not in self.adjacency[j]:
                    raise TopologyError(f"asymmetric edge ({i}, {j})")

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n_nodes)
                for j in sorted(self.adjacency[i]) if i < j]

    def n_edges(self) -> int:
        return len(self.edges())

    def is_connected(self) -> bool:
        if self.n_nodes == 0:
            return False
        seen = {0}
        stack = [0]
        while stack:
            for j in self.adjacency[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == self.n_nodes

    def padded_adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """(n, max_degree) neighbor index matrix padded with -1, plus degrees."""
        deg = self.degrees
        dmax = int(deg.max()) if self.n_nodes else 0
        padded = np.full((self.n_nodes, dmax), -1, dtype=np.int64)
        for i, nbrs in enumerate(self.adjacency):
            padded[i, : len(nbrs)] = sorted(nbrs)
        return padded, deg


def from_edges(n_nodes: int, edge_iter, node_map=None) -> Topology:
    adj = [set() for _ in range(n_nodes)]
    for a, b in edge_iter:
        if a == b:
            continue
        adj[a].add(b)
        adj[b].add(a)
    return Topology(n_nodes, tuple(frozenset(s) for s in adj),
                    tuple(node_map) if node_map is not None else None)


def complete(n: int) -> Topology:
    if n < 2:
        raise TopologyError(f"complete graph needs n >= 2, got {n}")
    everyone = set(range(n))
    return Topology(n, tuple(frozenset(everyone - {i}) for i in range(n)))


def mean_clustering(t: Topology) -> float:
    """Average local clustering coefficient; degree < 2 contributes 0."""
    total = 0.0
    for i in range(t.n_nodes):
        nbrs = t.adjacency[i]
        d = len(nbrs)
        if d < 2:
            continue
        links = sum(1 for j in nbrs for k in t.adjacency[j] if k in nbrs)
        total += links / (d * (d - 1))
    return total / t.n_nodes if t.n_nodes else 0.0


def max_mean_clustering(
    n: int = 100,
    degree: int = 19,
    swap_budget: int = 200_000,
    seed=0,
) -> Topology:
    """Greedy clustering maximization over degree-regular graphs.

    Starts from a seeded random connected regular graph and proposes
    degree-preserving double-edge swaps, accepting only strict
    improvements in mean clustering that keep the graph connected.
    """
    if n * degree % 2 != 0 or degree >= n:
        raise TopologyError(f"infeasible regular graph (n={n}, degree={degree})")
    rng = np.random.default_rng(seed)
    g = nx.random_regular_graph(degree, n, seed=int(rng.integers(2**31)))
    while not nx.is_connected(g):
        g = nx.random_regular_graph(degree, n, seed=int(rng.integers(2**31)))

    adj = np.zeros((n, n), dtype=np.float64)
    for a, b in g.edges():
        adj[a, b] = adj[b, a] = 1.0
    deg_pairs = degree * (degree - 1)

    def mean_cc(a):
        # trace(A^3) via BLAS; regular graph, so all denominators equal
        return float(((a @ a) * a).sum()) / (n * deg_pairs)

    current = mean_cc(adj)
    edges = np.array(g.edges(), dtype=np.int64)

    for _ in range(swap_budget):
        i, j = rng.integers(len(edges), size=2)
        if i == j:
            continue
        a, b = edges[i]
        c, d = edges[j]
        if rng.random() < 0.5:
            c, d = d, c
        # propose (a-b, c-d) -> (a-c, b-d)
        if len({a, b, c, d}) < 4 or adj[a, c] or adj[b, d]:
            continue
        adj[a, b] = adj[b, a] = 0.0
        adj[c, d] = adj[d, c] = 0.0
        adj[a, c] = adj[c, a] = 1.0
        adj[b, d] = adj[d, b] = 1.0
        proposed = mean_cc(adj)
        if proposed > current and _connected_dense(adj):
            current = proposed
            edges[i] = (a, c)
            edges[j] = (b, d)
        else:
            adj[a, c] = adj[c, a] = 0.0
            adj[b, d] = adj[d, b] = 0.0
            adj[a, b] = adj[b, a] = 1.0
            adj[c, d] = adj[d, c] = 1.0

    rows, cols = np.nonzero(adj)
    return from_edges(n, ((int(a), int(b)) for a, b in zip(rows, cols) if a < b))


def _connected_dense(adj: np.ndarray) -> bool:
    n = len(adj)
    reached = np.zeros(n, dtype=bool)
    reached[0] = True
    frontier = adj[0] > 0
    while frontier.any():
        frontier &= ~reached
        reached |= frontier
        if reached.all():
            return True
        frontier = (adj[frontier].sum(axis=0) > 0)
    return bool(reached.all())


def load_edge_list(path) -> Topology:
    """Parse whitespace-separated integer pairs; '#' lines are comments.

    Duplicate edges collapse, self-loops drop, labels densify to [0, n)
    with the original labels recorded in ``node_map``.
    """
    raw_edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise TopologyError(f"{path}:{lineno}: expected two integers")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise TopologyError(f"{path}:{lineno}: unparseable line") from exc
            if a != b:
                raw_edges.append((a, b))
    if not raw_edges:
        raise TopologyError(f"{path}: empty graph after self-loop removal")
    labels = sorted({x for e in raw_edges for x in e})
    index = {lab: i for i, lab in enumerate(labels)}
    return from_edges(len(labels), ((index[a], index[b]) for a, b in raw_edges),
                      node_map=labels)


def save_edge_list(t: Topology, path) -> None:
    with open(path, "w") as fh:
        for a, b in t.edges():
            fh.write(f"{a} {b}\n")


def k_core(t: Topology, k: int) -> Topology:
    """Maximal subgraph with all degrees >= k; may be empty."""
    if k < 1:
        raise TopologyError(f"k must be >= 1, got {k}")
    alive = set(range(t.n_nodes))
    deg = {i: len(t.adjacency[i]) for i in alive}
    queue = [i for i in alive if deg[i] < k]
    while queue:
        i = queue.pop()
        if i not in alive:
            continue
        alive.discard(i)
        for j in t.adjacency[i]:
            if j in alive:
                deg[j] -= 1
                if deg[j] < k:
                    queue.append(j)
    kept = sorted(alive)
    index = {old: new for new, old in enumerate(kept)}
    original = t.node_map if t.node_map is not None else tuple(range(t.n_nodes))
    return from_edges(
        len(kept),
        ((index[a], index[b]) for a in kept for b in t.adjacency[a]
         if b in alive and a < b),
        node_map=[original[i] for i in kept],
    )


def validate_real_network(
    original: Topology, core: Topology, max_nodes: int = 500
) -> dict:
    """Acceptance report for an ingested network's 3-core.

    Accepts iff < 5% of nodes were removed, the core is connected, has at
    most ``max_nodes`` nodes, and every degree is >= 3 (so sampling 3
    neighbors is always feasible).
    """
    removed_fraction = (
        (original.n_nodes - core.n_nodes) / original.n_nodes
        if original.n_nodes else 1.0
    )
    connected = core.is_connected()
    min_degree = int(core.degrees.min()) if core.n_nodes else 0
    reasons = []
    if removed_fraction >= 0.05:
        reasons.append("removal fraction")
    if not connected:
        reasons.append("disconnected")
    if core.n_nodes > max_nodes:
        reasons.append("too many nodes")
    if min_degree < 3:
        reasons.append("degree below 3")
    return {
        "removed_fraction": removed_fraction,
        "connected": connected,
        "n_core": core.n_nodes,
        "min_degree": min_degree,
        "accepted": not reasons,
        "reasons": reasons,
    }
