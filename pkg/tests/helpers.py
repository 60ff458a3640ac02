"""Shared test utilities: independent oracles and deterministic generators."""

from __future__ import annotations

import random

import numpy as np

from dacsim.graph import Topology


def jacobi_eigenvalues(matrix, rel_tol: float = 1e-13, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Deliberately independent of numpy's eigensolver so spectral results can
    be cross-checked against a second route.
    """
    A = np.array(matrix, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.array([])
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(A * A) - np.sum(np.diag(A) ** 2))
        if off <= rel_tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * A[:, p] - s * A[:, q]
                rot_q = s * A[:, p] + c * A[:, q]
                A[:, p], A[:, q] = rot_p, rot_q
                rot_p = c * A[p, :] - s * A[q, :]
                rot_q = s * A[p, :] + c * A[q, :]
                A[p, :], A[q, :] = rot_p, rot_q
    return np.sort(np.diag(A))


def random_connected_topology(rng: random.Random, n_nodes: int,
                              extra_edge_prob: float = 0.15) -> Topology:
    """Random connected graph: a random spanning tree plus extra edges."""
    nodes = list(range(1, n_nodes + 1))
    order = nodes[:]
    rng.shuffle(order)
    edges = set()
    for k in range(1, n_nodes):
        other = order[rng.randrange(k)]
        edges.add((min(order[k], other), max(order[k], other)))
    for i in nodes:
        for j in nodes:
            if i < j and (i, j) not in edges and rng.random() < extra_edge_prob:
                edges.add((i, j))
    return Topology(tuple(nodes), tuple(sorted(edges)))
