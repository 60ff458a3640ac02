"""Time-varying bidirectional communication graphs and their spectral machinery.

Graphs are undirected and unweighted.  Every matrix quantity the estimators
and error bounds consume lives here: the signed incidence matrix B, the
Laplacian L = B Bᵀ, its eigenvalues (algebraic connectivity lambda2 and
lambda_max), the pseudoinverse L⁺, and the centering projector
M = I - 11ᵀ/N, which equals L L⁺ exactly when the graph is connected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DisconnectedGraph(ValueError):
    """Raised when a connected graph is required but the topology is split."""


@dataclass(frozen=True)
class Topology:
    """An undirected graph over integer agent ids.

    Edges are normalised to (min, max) pairs and stored in lexicographic
    order so that incidence-matrix column order is reproducible.
    """

    node_ids: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        nodes = tuple(self.node_ids)
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node ids")
        node_set = set(nodes)
        normalised = []
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if i not in node_set or j not in node_set:
                raise ValueError(f"edge {{{i},{j}}} references unknown node")
            normalised.append((min(i, j), max(i, j)))
        if len(set(normalised)) != len(normalised):
            raise ValueError("duplicate edge")
        object.__setattr__(self, "node_ids", nodes)
        object.__setattr__(self, "edges", tuple(sorted(normalised)))

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, node: int) -> tuple[int, ...]:
        out = [j if i == node else i for i, j in self.edges if node in (i, j)]
        return tuple(sorted(out))

    def degrees(self) -> np.ndarray:
        idx = {n: k for k, n in enumerate(self.node_ids)}
        deg = np.zeros(self.n_nodes, dtype=int)
        for i, j in self.edges:
            deg[idx[i]] += 1
            deg[idx[j]] += 1
        return deg


@dataclass(frozen=True)
class TopologySchedule:
    """Timed sequence of topologies; each phase is active right-continuously."""

    phases: tuple[tuple[float, Topology], ...]

    def __post_init__(self):
        if not self.phases:
            raise ValueError("schedule needs at least one phase")
        phases = tuple((float(t), topo) for t, topo in self.phases)
        times = [t for t, _ in phases]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("phase activation times must be strictly increasing")
        nodes = phases[0][1].node_ids
        if any(topo.node_ids != nodes for _, topo in phases):
            raise ValueError("all phases must share the same node set")
        object.__setattr__(self, "phases", phases)

    @property
    def node_ids(self) -> tuple[int, ...]:
        return self.phases[0][1].node_ids

    def topology_at(self, t: float) -> Topology:
        active = self.phases[0][1]
        for start, topo in self.phases:
            if t >= start:
                active = topo
            else:
                break
        return active


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    """Signed node-by-edge incidence matrix with a fixed orientation rule.

    For edge {i, j} with i < j the tail is i (entry -1) and the head is j
    (entry +1).  The protocols depend only on B Bᵀ and odd functions of
    Bᵀgamma, so any consistent orientation is equivalent; fixing one makes
    runs reproducible.
    """

    node_ids: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    matrix: np.ndarray
    orientation: str = "tail=min(i,j)"


def build_incidence(topology: Topology) -> IncidenceMatrix:
    """Incidence matrix of `topology`, one column per edge in edge-list order."""
    idx = {n: k for k, n in enumerate(topology.node_ids)}
    B = np.zeros((topology.n_nodes, topology.n_edges), dtype=int)
    for c, (i, j) in enumerate(topology.edges):
        B[idx[i], c] = -1
        B[idx[j], c] = 1
    return IncidenceMatrix(topology.node_ids, topology.edges, B)


def laplacian(topology: Topology) -> np.ndarray:
    """Integer Laplacian (degree matrix minus adjacency); equals B Bᵀ exactly."""
    idx = {n: k for k, n in enumerate(topology.node_ids)}
    L = np.zeros((topology.n_nodes, topology.n_nodes), dtype=int)
    for i, j in topology.edges:
        a, b = idx[i], idx[j]
        L[a, a] += 1
        L[b, b] += 1
        L[a, b] -= 1
        L[b, a] -= 1
    B = build_incidence(topology).matrix
    assert np.array_equal(L, B @ B.T)
    return L


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Laplacian eigenstructure and the derived quantities the bounds need."""

    laplacian: np.ndarray
    eigenvalues: np.ndarray          # ascending
    lambda2: float                   # smallest nonzero eigenvalue
    lambda_max: float
    laplacian_pinv: np.ndarray
    bt_pinv_norm2: float             # spectral norm of (Bᵀ)⁺, i.e. 1/sqrt(lambda2)
    centering: np.ndarray            # M = I - 11ᵀ/N
    zero_multiplicity: int

    @property
    def is_connected(self) -> bool:
        return self.zero_multiplicity == 1

    @property
    def n_nodes(self) -> int:
        return self.laplacian.shape[0]


def spectral(topology: Topology, require_connected: bool = False) -> SpectralData:
    """Eigendecompose the Laplacian and assemble the spectral quantities.

    lambda2 is the smallest eigenvalue above the zero threshold (the
    algebraic connectivity when the graph is connected).  The pseudoinverse
    inverts only the nonzero eigenvalues, with a relative zero threshold of
    1e-9 * lambda_max.

    Raises DisconnectedGraph when `require_connected` is set and the zero
    eigenvalue has multiplicity above one.
    """
    n = topology.n_nodes
    L = laplacian(topology)
    w, V = np.linalg.eigh(L.astype(float))
    lam_max = float(w[-1]) if n else 0.0
    tol = 1e-9 * lam_max if lam_max > 0 else 1e-12
    nonzero = w > tol
    zero_mult = int(n - np.count_nonzero(nonzero))
    if require_connected and zero_mult > 1:
        raise DisconnectedGraph(
            f"graph has {zero_mult} connected components; 1 required"
        )
    lam2 = float(w[nonzero][0]) if nonzero.any() else 0.0
    inv = np.where(nonzero, np.divide(1.0, w, out=np.zeros_like(w), where=nonzero), 0.0)
    pinv = (V * inv) @ V.T
    M = np.eye(n) - np.ones((n, n)) / n if n else np.zeros((0, 0))
    bt_pinv = 1.0 / np.sqrt(lam2) if lam2 > 0 else float("inf")
    return SpectralData(
        laplacian=L,
        eigenvalues=w,
        lambda2=lam2,
        lambda_max=lam_max,
        laplacian_pinv=pinv,
        bt_pinv_norm2=bt_pinv,
        centering=M,
        zero_multiplicity=zero_mult,
    )


def connected_components(topology: Topology) -> tuple[tuple[int, ...], ...]:
    """Partition of node ids into connected components.

    Breadth-first from the smallest unvisited id; components are ordered by
    their smallest member and each is sorted ascending, so the result is
    deterministic.
    """
    adjacency: dict[int, set[int]] = {n: set() for n in topology.node_ids}
    for i, j in topology.edges:
        adjacency[i].add(j)
        adjacency[j].add(i)
    seen: set[int] = set()
    components = []
    for start in sorted(topology.node_ids):
        if start in seen:
            continue
        frontier = [start]
        comp = {start}
        while frontier:
            nxt = []
            for u in frontier:
                for v in adjacency[u]:
                    if v not in comp:
                        comp.add(v)
                        nxt.append(v)
            frontier = nxt
        seen |= comp
        components.append(tuple(sorted(comp)))
    return tuple(components)


def component_averaging(topology: Topology) -> tuple[np.ndarray, np.ndarray]:
    """Block-averaging matrix P and per-agent component labels.

    P @ x averages x within each connected component, so x - P @ x is the
    per-component centering of x.  Labels are component indices ordered by
    smallest member.
    """
    comps = connected_components(topology)
    idx = {n: k for k, n in enumerate(topology.node_ids)}
    n = topology.n_nodes
    P = np.zeros((n, n))
    labels = np.zeros(n, dtype=int)
    for c, comp in enumerate(comps):
        members = [idx[m] for m in comp]
        for a in members:
            labels[a] = c
            for b in members:
                P[a, b] = 1.0 / len(members)
    return P, labels


def induced_subgraph(topology: Topology, nodes) -> Topology:
    """Topology restricted to `nodes` (keeps every edge with both ends inside)."""
    keep = set(int(n) for n in nodes)
    if not keep <= set(topology.node_ids):
        raise ValueError("nodes must be a subset of the topology's node ids")
    edges = tuple(e for e in topology.edges if e[0] in keep and e[1] in keep)
    return Topology(tuple(sorted(keep)), edges)


def verify_centering_identity(topology: Topology, tol: float) -> bool:
    """Check M = L L⁺ (max-abs within `tol`) and L = B Bᵀ exactly.

    Requires a connected topology; the identity only holds per component
    otherwise.
    """
    data = spectral(topology, require_connected=True)
    product_ok = bool(
        np.max(np.abs(data.centering - data.laplacian @ data.laplacian_pinv)) <= tol
    )
    B = build_incidence(topology).matrix
    return product_ok and np.array_equal(data.laplacian, B @ B.T)
