"""Edge-based average-consensus estimators as pure derivative/output maps.

Four protocol kinds share one state layout (one real state per undirected
edge, aligned with the active topology's edge list):

  alg1              d(eta)/dt = -rho * tanh(c * Bᵀ gamma),  gamma = B eta + z
  alg2              d(eta)/dt = -alpha * Bᵀ dz/dt - rho * tanh(c * Bᵀ gamma)
  alg2-transformed  d(xi)/dt  = -rho * tanh(c * Bᵀ gamma),
                    gamma = B xi + (I - alpha B Bᵀ) z
                    (derivative-free equivalent of alg2 under xi = eta + alpha Bᵀ z)
  baseline-sgn      d(eta)/dt = -g * sgn(Bᵀ gamma), per-edge gain g,
                    the discontinuous switching estimator used for comparison

tanh and sgn act componentwise; sgn(0) = 0.  All maps are pure functions of
(state, topology, signals, parameters) and safe to evaluate concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import IncidenceMatrix, Topology

PROTOCOL_KINDS = ("alg1", "alg2", "alg2-transformed", "baseline-sgn")


class DimensionMismatch(ValueError):
    """State, incidence, or signal dimensions disagree."""


@dataclass(frozen=True)
class ProtocolParams:
    """Global estimator parameters.

    rho and c drive the tanh term; alpha is the derivative feed-forward /
    output gain of alg2; the baseline uses either a uniform gain or
    per-agent gains mapped to edges.  Values are not validated here: the
    gain conditions are diagnostics (see analysis), and runs that violate
    them are legitimate experiments.
    """

    rho: float = 1.0
    c: float = 1.0
    alpha: float = 0.0
    baseline_gain: float = 1.0
    per_agent_gains: tuple[float, ...] | None = None


@dataclass
class ProtocolState:
    """Per-edge internal estimator states, aligned with a topology's edge list."""

    kind: str
    edge_states: np.ndarray

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        self.edge_states = np.asarray(self.edge_states, dtype=float)


def _check(state: ProtocolState, B: IncidenceMatrix, z: np.ndarray, zdot=None):
    k = B.matrix.shape[1]
    n = B.matrix.shape[0]
    if state.edge_states.shape != (k,):
        raise DimensionMismatch(f"state has {state.edge_states.shape[0]} entries, topology has {k} edges")
    if np.shape(z) != (n,):
        raise DimensionMismatch(f"z has shape {np.shape(z)}, expected ({n},)")
    if zdot is not None and np.shape(zdot) != (n,):
        raise DimensionMismatch(f"zdot has shape {np.shape(zdot)}, expected ({n},)")


def baseline_edge_gains(topology: Topology, params: ProtocolParams) -> np.ndarray:
    """Per-edge switching gains for the baseline.

    Uniform baseline_gain unless per_agent_gains is set, in which case each
    edge takes the larger of its two endpoint agents' gains.
    """
    if params.per_agent_gains is None:
        return np.full(topology.n_edges, float(params.baseline_gain))
    if len(params.per_agent_gains) != topology.n_nodes:
        raise DimensionMismatch(
            f"{len(params.per_agent_gains)} per-agent gains for {topology.n_nodes} agents"
        )
    gain = {n: float(g) for n, g in zip(topology.node_ids, params.per_agent_gains)}
    return np.array([max(gain[i], gain[j]) for i, j in topology.edges])


# ---------------------------------------------------------------------------
# output / derivative maps
# ---------------------------------------------------------------------------

def output_alg1(state: ProtocolState, B: IncidenceMatrix, z: np.ndarray) -> np.ndarray:
    """gamma = B eta + z (also the output of alg2 and the baseline)."""
    _check(state, B, z)
    return B.matrix @ state.edge_states + z


def derivative_alg1(state: ProtocolState, B: IncidenceMatrix, z: np.ndarray,
                    params: ProtocolParams) -> np.ndarray:
    _check(state, B, z)
    gamma = B.matrix @ state.edge_states + z
    return -params.rho * np.tanh(params.c * (B.matrix.T @ gamma))


def derivative_alg2(state: ProtocolState, B: IncidenceMatrix, z: np.ndarray,
                    zdot: np.ndarray, params: ProtocolParams) -> np.ndarray:
    _check(state, B, z, zdot)
    gamma = B.matrix @ state.edge_states + z
    return (-params.alpha * (B.matrix.T @ zdot)
            - params.rho * np.tanh(params.c * (B.matrix.T @ gamma)))


def output_alg2_transformed(state: ProtocolState, B: IncidenceMatrix, z: np.ndarray,
                            params: ProtocolParams) -> np.ndarray:
    """gamma = B xi + (I - alpha B Bᵀ) z."""
    _check(state, B, z)
    Bm = B.matrix
    return Bm @ state.edge_states + z - params.alpha * (Bm @ (Bm.T @ z))


def derivative_alg2_transformed(state: ProtocolState, B: IncidenceMatrix, z: np.ndarray,
                                params: ProtocolParams) -> np.ndarray:
    gamma = output_alg2_transformed(state, B, z, params)
    return -params.rho * np.tanh(params.c * (B.matrix.T @ gamma))


def derivative_baseline(state: ProtocolState, B: IncidenceMatrix, z: np.ndarray,
                        params: ProtocolParams,
                        edge_gains: np.ndarray | None = None) -> np.ndarray:
    """Discontinuous baseline; sgn(0) = 0 (numpy sign convention)."""
    _check(state, B, z)
    if edge_gains is None:
        edge_gains = baseline_edge_gains(Topology(B.node_ids, B.edges), params)
    gamma = B.matrix @ state.edge_states + z
    return -edge_gains * np.sign(B.matrix.T @ gamma)


def output(kind: str, state: ProtocolState, B: IncidenceMatrix, z: np.ndarray,
           params: ProtocolParams) -> np.ndarray:
    """gamma for any protocol kind."""
    if kind == "alg2-transformed":
        return output_alg2_transformed(state, B, z, params)
    return output_alg1(state, B, z)


# ---------------------------------------------------------------------------
# topology switches
# ---------------------------------------------------------------------------

def realign_state(old_state: ProtocolState, old_topology: Topology,
                  new_topology: Topology, fill: float = 0.0) -> ProtocolState:
    """Carry edge states across a topology switch.

    States of edges present in both topologies (matched by unordered
    endpoint pair) survive bit-exactly; states of removed edges are
    discarded; new edges start at `fill`.
    """
    if old_state.edge_states.shape != (old_topology.n_edges,):
        raise DimensionMismatch("state does not match the old topology")
    carried = dict(zip(old_topology.edges, old_state.edge_states))
    new_vals = np.array([carried.get(e, fill) for e in new_topology.edges])
    return ProtocolState(old_state.kind, new_vals)


# ---------------------------------------------------------------------------
# agent-wise adapter
# ---------------------------------------------------------------------------
# The agent-wise estimator keeps a (plus, minus) state pair per directed
# neighbour relation: for edge {i, j} agent i holds (eta+_ij, eta-_ij) and
# agent j holds (eta+_ji, eta-_ji).  With equal pair initialisation the
# pair sums stay constant (the two derivatives are exact negatives), which
# is what makes the compact one-state-per-edge form above equivalent.  The
# adapter exists to test that equivalence; simulations use the compact form.

def agentwise_output(eta_plus: np.ndarray, eta_minus: np.ndarray,
                     topology: Topology, z: np.ndarray) -> np.ndarray:
    """gamma_i = sum_j eta+_ij - sum_j eta-_ij + z_i.

    eta_plus / eta_minus have shape (k, 2): column 0 holds the pair owned
    by the edge's smaller endpoint, column 1 the pair owned by the larger.
    """
    idx = {n: a for a, n in enumerate(topology.node_ids)}
    gamma = np.array(z, dtype=float)
    for e, (i, j) in enumerate(topology.edges):
        gamma[idx[i]] += eta_plus[e, 0] - eta_minus[e, 0]
        gamma[idx[j]] += eta_plus[e, 1] - eta_minus[e, 1]
    return gamma


def agentwise_derivatives(eta_plus: np.ndarray, eta_minus: np.ndarray,
                          topology: Topology, z: np.ndarray,
                          params: ProtocolParams) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives of the agent-wise state pairs."""
    idx = {n: a for a, n in enumerate(topology.node_ids)}
    gamma = agentwise_output(eta_plus, eta_minus, topology, z)
    dplus = np.zeros_like(eta_plus)
    dminus = np.zeros_like(eta_minus)
    for e, (i, j) in enumerate(topology.edges):
        forward = -params.rho * np.tanh(params.c * (gamma[idx[i]] - gamma[idx[j]]))
        backward = -params.rho * np.tanh(params.c * (gamma[idx[j]] - gamma[idx[i]]))
        dplus[e, 0] = forward
        dminus[e, 0] = backward
        dplus[e, 1] = backward
        dminus[e, 1] = forward
    return dplus, dminus
