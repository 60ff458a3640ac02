"""Gain conditions, error bounds, and runtime error diagnostics.

The smooth bounded-error estimator (alg1) admits a closed-form boundary
layer width

    delta = (1/(2c)) * ln((rho + s) / (rho - s)),   s = sup ||dz/dt||_1,

valid when rho > s and c >= 1, and an ultimate bound on the per-agent
consensus error

    ||gamma_tilde||_inf <= ||(Bᵀ)⁺||_2 * sqrt(N * lambda_max / lambda2) * delta.

The derivative feed-forward estimator (alg2) instead carries the matrix
condition alpha * I - (B Bᵀ)⁺ > 0, which on the subspace orthogonal to the
all-ones vector reduces to alpha > 1/lambda2.  Both are evaluated here,
per connected component, and never enforced: violating runs are
experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .graph import (
    DisconnectedGraph,
    SpectralData,
    Topology,
    build_incidence,
    component_averaging,
    connected_components,
    induced_subgraph,
    spectral,
)
from .protocols import DimensionMismatch, ProtocolParams, baseline_edge_gains
from .signals import SignalBank


class InvalidGain(ValueError):
    """Gain condition rho > sup ||dz/dt||_1 (or c >= 1) violated."""


class InvalidLevelSets(ValueError):
    """Level-set ordering d_c >= epsilon >= delta^2/2 (or b > 0) violated."""


def delta_bound(rho: float, c: float, zdot_l1_sup: float) -> float:
    """Boundary-layer width of the tanh estimator."""
    if zdot_l1_sup < 0:
        raise ValueError("derivative bound must be nonnegative")
    if c < 1:
        raise InvalidGain(f"c = {c} violates c >= 1")
    if rho <= zdot_l1_sup:
        raise InvalidGain(
            f"rho = {rho} does not exceed the signal derivative bound {zdot_l1_sup}"
        )
    return math.log((rho + zdot_l1_sup) / (rho - zdot_l1_sup)) / (2.0 * c)


def ultimate_bound(delta: float, data: SpectralData, n_agents: int) -> float:
    """Steady-state inf-norm error bound for the tanh estimator.

    Built from the comparison functions alpha1(r) = (lambda2/N) r^2 and
    alpha2(r) = lambda_max r^2: the disagreement bound is
    alpha1^{-1}(alpha2(delta)) and the error bound scales it by ||(Bᵀ)⁺||_2.
    """
    if not data.is_connected:
        raise DisconnectedGraph("ultimate bound requires a connected component")
    if delta < 0:
        raise ValueError("delta must be nonnegative")

    def alpha1_inv(v: float) -> float:
        return math.sqrt(v * n_agents / data.lambda2)

    def alpha2(r: float) -> float:
        return data.lambda_max * r * r

    return data.bt_pinv_norm2 * alpha1_inv(alpha2(delta))


def finite_time_estimate(t0: float, d_c: float, epsilon: float, b: float,
                         delta: float = 0.0) -> float:
    """Time t* = t0 + (d_c - epsilon)/b to enter the target level set.

    Requires d_c >= epsilon >= delta^2/2 and a positive decay margin b.
    """
    if b <= 0:
        raise InvalidLevelSets(f"decay margin b = {b} must be positive")
    if not (d_c >= epsilon >= delta * delta / 2.0):
        raise InvalidLevelSets(
            f"need d_c >= epsilon >= delta^2/2, got d_c={d_c}, epsilon={epsilon}, "
            f"delta^2/2={delta * delta / 2.0}"
        )
    return t0 + (d_c - epsilon) / b


def min_lyapunov_decay_estimate(topology: Topology, params: ProtocolParams,
                                zdot_l1_sup: float, epsilon: float, d_c: float,
                                n_radii: int = 12) -> float:
    """Coarse grid estimate of the worst-case Lyapunov decay margin b.

    Samples error vectors on the annulus epsilon <= V <= d_c along the
    Laplacian eigenvector directions and lower-bounds
    -dV/dt >= sum_i (rho |theta_i| tanh(c |theta_i|) - |theta_i| s)
    with s the l1 derivative bound.  Approximate by construction: the true
    margin is a minimum over the full annulus.  A nonpositive return means
    no decay is certified at these gains.
    """
    if not (0 < epsilon <= d_c):
        raise InvalidLevelSets(f"need 0 < epsilon <= d_c, got {epsilon}, {d_c}")
    data = spectral(topology, require_connected=True)
    B = build_incidence(topology).matrix.astype(float)
    _, vecs = np.linalg.eigh(data.laplacian.astype(float))
    directions = [vecs[:, k] for k in range(1, topology.n_nodes)]
    radii = np.sqrt(2.0 * np.linspace(epsilon, d_c, n_radii))
    worst = math.inf
    for u in directions:
        for r in radii:
            theta = B.T @ (r * u)
            decay = float(
                np.sum(params.rho * np.abs(theta) * np.tanh(params.c * np.abs(theta))
                       - np.abs(theta) * zdot_l1_sup)
            )
            worst = min(worst, decay)
    return worst


def validate_alg2_condition(alpha: float, data: SpectralData) -> bool:
    """True iff alpha * I - L⁺ is positive definite orthogonally to 1.

    Equivalent to alpha exceeding the largest eigenvalue 1/lambda2 of L⁺.
    The all-ones direction carries eigenvalue alpha and is excluded: the
    disagreement this condition weighs is orthogonal to it.
    """
    if not data.is_connected:
        raise DisconnectedGraph("condition is defined per connected component")
    return alpha > 1.0 / data.lambda2


# ---------------------------------------------------------------------------
# runtime diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ErrorDiagnostics:
    """Snapshot error measures for one (gamma, z, topology) triple."""

    gamma_tilde: np.ndarray            # against the global signal average
    gamma_tilde_component: np.ndarray  # against each component's own average
    component_ids: np.ndarray
    disagreement: np.ndarray           # theta = Bᵀ gamma
    lyapunov: float                    # V = 0.5 * gamma_tilde . gamma_tilde
    inf_norm_error: float


def diagnostics(gamma: np.ndarray, z: np.ndarray, topology: Topology) -> ErrorDiagnostics:
    gamma = np.asarray(gamma, dtype=float)
    z = np.asarray(z, dtype=float)
    n = topology.n_nodes
    if gamma.shape != (n,) or z.shape != (n,):
        raise DimensionMismatch(
            f"gamma {gamma.shape} / z {z.shape} do not match {n} nodes"
        )
    P, labels = component_averaging(topology)
    B = build_incidence(topology).matrix.astype(float)
    g_tilde = gamma - np.mean(z)
    g_tilde_comp = gamma - P @ z
    return ErrorDiagnostics(
        gamma_tilde=g_tilde,
        gamma_tilde_component=g_tilde_comp,
        component_ids=labels,
        disagreement=B.T @ gamma,
        lyapunov=0.5 * float(g_tilde @ g_tilde),
        inf_norm_error=float(np.max(np.abs(g_tilde))),
    )


# ---------------------------------------------------------------------------
# per-component bound reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    """Gain conditions and error bounds for one connected component."""

    nodes: tuple[int, ...]
    n_agents: int
    lambda2: float
    lambda_max: float
    bt_pinv_norm2: float
    zdot_l1_sup: float
    delta: float                     # nan when not applicable to the protocol
    ultimate_bound_inf: float        # nan when not applicable
    rho_condition_ok: bool
    c_condition_ok: bool
    alpha_condition_ok: bool | None  # None for protocols without alpha


def bound_report(topology: Topology, bank: SignalBank, params: ProtocolParams,
                 protocol_kind: str) -> tuple[BoundReport, ...]:
    """One BoundReport per connected component with at least one edge.

    Edgeless (singleton) components are skipped: an isolated agent tracks
    its own signal exactly, so its component error is identically zero.
    """
    if len(bank) != topology.n_nodes:
        raise ValueError(f"bank has {len(bank)} signals for {topology.n_nodes} agents")
    idx = {n: k for k, n in enumerate(topology.node_ids)}
    reports = []
    for comp in connected_components(topology):
        sub = induced_subgraph(topology, comp)
        if sub.n_edges == 0:
            continue
        data = spectral(sub, require_connected=True)
        sup = float(bank.derivative_sups()[[idx[n] for n in comp]].sum())
        c_ok = params.c >= 1.0
        alpha_ok: bool | None = None
        delta = float("nan")
        bound = float("nan")
        if protocol_kind == "alg1":
            rho_ok = params.rho > sup
            if rho_ok and c_ok:
                delta = delta_bound(params.rho, params.c, sup)
                bound = ultimate_bound(delta, data, sub.n_nodes)
            else:
                delta = float("inf")
                bound = float("inf")
        elif protocol_kind in ("alg2", "alg2-transformed"):
            rho_ok = params.rho > 0
            alpha_ok = validate_alg2_condition(params.alpha, data)
        elif protocol_kind == "baseline-sgn":
            sub_params = params
            if params.per_agent_gains is not None:
                sub_params = replace(
                    params,
                    per_agent_gains=tuple(params.per_agent_gains[idx[n]] for n in comp),
                )
            rho_ok = bool(np.all(baseline_edge_gains(sub, sub_params) > 0))
            c_ok = True
        else:
            raise ValueError(f"unknown protocol kind {protocol_kind!r}")
        reports.append(BoundReport(
            nodes=comp,
            n_agents=sub.n_nodes,
            lambda2=data.lambda2,
            lambda_max=data.lambda_max,
            bt_pinv_norm2=data.bt_pinv_norm2,
            zdot_l1_sup=sup,
            delta=delta,
            ultimate_bound_inf=bound,
            rho_condition_ok=rho_ok,
            c_condition_ok=c_ok,
            alpha_condition_ok=alpha_ok,
        ))
    return tuple(reports)
