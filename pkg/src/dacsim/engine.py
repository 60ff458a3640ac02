"""Fixed-step simulation of a protocol over a topology schedule.

One run is strictly single-threaded and deterministic: the same
configuration produces a bit-identical trace.  Integration is forward
Euler or classical RK4 on a fixed grid; reference signals and their
derivatives are evaluated analytically at stage times.  Topology switches
are snapped to the grid and applied before the first post-switch step,
carrying surviving edge states bit-exactly.  Only the edge state is
integrated; the estimate gamma is an output and jumps at switches.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import analysis
from .graph import Topology, TopologySchedule, build_incidence, component_averaging
from .protocols import PROTOCOL_KINDS, ProtocolParams, ProtocolState, baseline_edge_gains, realign_state
from .signals import SignalBank

INTEGRATORS = ("euler", "rk4")


class ConfigInvalid(ValueError):
    """Simulation configuration rejected; the message names the field."""


class WindowTooLarge(ValueError):
    """Requested trailing window does not fit inside the final phase."""


@dataclass
class SimConfig:
    t0: float
    tf: float
    dt: float
    protocol_kind: str
    params: ProtocolParams
    schedule: TopologySchedule
    bank: SignalBank
    integrator: str = "euler"
    eta0: float | np.ndarray = 0.0
    record_stride: int = 1

    def validate(self) -> None:
        if self.protocol_kind not in PROTOCOL_KINDS:
            raise ConfigInvalid(f"protocol_kind: unknown kind {self.protocol_kind!r}")
        if self.integrator not in INTEGRATORS:
            raise ConfigInvalid(f"integrator: unknown integrator {self.integrator!r}")
        if not (self.tf > self.t0):
            raise ConfigInvalid(f"tf: must exceed t0 (got t0={self.t0}, tf={self.tf})")
        if not (self.dt > 0):
            raise ConfigInvalid(f"dt: must be positive (got {self.dt})")
        if self.dt > self.tf - self.t0:
            raise ConfigInvalid(f"dt: must not exceed the horizon {self.tf - self.t0}")
        if not (isinstance(self.record_stride, int) and self.record_stride >= 1):
            raise ConfigInvalid(f"record_stride: must be a positive integer (got {self.record_stride!r})")
        n = self.schedule.phases[0][1].n_nodes
        if len(self.bank) != n:
            raise ConfigInvalid(f"signals: {len(self.bank)} signals for {n} agents")
        if self.schedule.phases[0][0] != self.t0:
            raise ConfigInvalid(
                f"schedule: first phase activates at {self.schedule.phases[0][0]}, not t0={self.t0}"
            )
        if np.ndim(self.eta0) not in (0, 1):
            raise ConfigInvalid("eta0: must be a scalar or a vector")
        if np.ndim(self.eta0) == 1:
            k = self.schedule.phases[0][1].n_edges
            if np.shape(self.eta0) != (k,):
                raise ConfigInvalid(
                    f"eta0: vector of length {np.shape(self.eta0)[0]} for {k} edges"
                )
        gains = self.params.per_agent_gains
        if gains is not None and len(gains) != n:
            raise ConfigInvalid(f"per_agent_gains: {len(gains)} gains for {n} agents")


@dataclass(eq=False)
class SimTrace:
    """Time-indexed record of one run."""

    node_ids: tuple[int, ...]
    protocol_kind: str
    dt: float
    times: np.ndarray
    gamma: np.ndarray                 # (steps, N)
    gamma_tilde_global: np.ndarray    # gamma minus the all-agent signal average
    gamma_tilde_component: np.ndarray
    component_ids: np.ndarray         # (steps, N) ints
    disagreement: tuple[np.ndarray, ...]  # Bᵀ gamma; edge count varies by phase
    lyapunov: np.ndarray
    bound_inf: np.ndarray             # per-phase error bound, repeated per row
    events: tuple[tuple[float, str], ...]

    @property
    def n_recorded(self) -> int:
        return len(self.times)


@dataclass
class _Phase:
    start_index: int
    topology: Topology
    B: np.ndarray
    averaging: np.ndarray
    labels: np.ndarray
    bound_inf: float
    edge_gains: np.ndarray | None


def parameter_warnings(config: SimConfig) -> tuple[str, ...]:
    """Human-readable gain-condition failures, per phase and component."""
    messages = []
    kind = config.protocol_kind
    p = config.params
    for start, topo in config.schedule.phases:
        for rep in analysis.bound_report(topo, config.bank, p, kind):
            where = f"phase t>={start:g}, component {rep.nodes}"
            if kind == "alg1" and not rep.rho_condition_ok:
                messages.append(
                    f"{where}: rho = {p.rho:g} does not exceed the signal derivative "
                    f"bound {rep.zdot_l1_sup:g}; the bounded-error guarantee does not apply"
                )
            if kind in ("alg2", "alg2-transformed"):
                if not rep.rho_condition_ok:
                    messages.append(f"{where}: rho = {p.rho:g} must be positive")
                if rep.alpha_condition_ok is False:
                    messages.append(
                        f"{where}: alpha = {p.alpha:g} does not exceed 1/lambda2 = "
                        f"{1.0 / rep.lambda2:g}; the asymptotic-convergence condition fails"
                    )
            if kind == "baseline-sgn" and not rep.rho_condition_ok:
                messages.append(f"{where}: baseline switching gains must be positive")
            if not rep.c_condition_ok:
                messages.append(f"{where}: c = {p.c:g} violates c >= 1")
    return tuple(messages)


def _phase_bound(topology: Topology, bank: SignalBank, params: ProtocolParams,
                 kind: str) -> float:
    """Per-phase bound column: max component error bound (alg1 only)."""
    if kind != "alg1":
        return float("nan")
    reports = analysis.bound_report(topology, bank, params, kind)
    if not reports:
        return float("nan")
    return max(rep.ultimate_bound_inf for rep in reports)


def _build_phases(config: SimConfig, n_steps: int) -> list[_Phase]:
    phases = []
    seen = set()
    for start, topo in config.schedule.phases:
        index = max(round((start - config.t0) / config.dt), 0)
        if index > n_steps:
            continue  # switch scheduled past the horizon
        if index in seen:
            raise ConfigInvalid(f"schedule: switch times collide on the step grid at index {index}")
        seen.add(index)
        P, labels = component_averaging(topo)
        gains = None
        if config.protocol_kind == "baseline-sgn":
            gains = baseline_edge_gains(topo, config.params)
        phases.append(_Phase(
            start_index=index,
            topology=topo,
            B=build_incidence(topo).matrix.astype(float),
            averaging=P,
            labels=labels,
            bound_inf=_phase_bound(topo, config.bank, config.params, config.protocol_kind),
            edge_gains=gains,
        ))
    return phases


def _make_rhs(kind: str, B: np.ndarray, params: ProtocolParams,
              bank: SignalBank, edge_gains: np.ndarray | None):
    Bt = np.ascontiguousarray(B.T)
    rho, c, alpha = params.rho, params.c, params.alpha

    if kind == "alg1":
        def rhs(t, y):
            gamma = B @ y + bank.eval(t)
            return -rho * np.tanh(c * (Bt @ gamma))
    elif kind == "alg2":
        def rhs(t, y):
            gamma = B @ y + bank.eval(t)
            return -alpha * (Bt @ bank.eval_derivative(t)) - rho * np.tanh(c * (Bt @ gamma))
    elif kind == "alg2-transformed":
        def rhs(t, y):
            z = bank.eval(t)
            gamma = B @ y + z - alpha * (B @ (Bt @ z))
            return -rho * np.tanh(c * (Bt @ gamma))
    else:  # baseline-sgn
        def rhs(t, y):
            gamma = B @ y + bank.eval(t)
            return -edge_gains * np.sign(Bt @ gamma)
    return rhs


def _make_output(kind: str, B: np.ndarray, params: ProtocolParams, bank: SignalBank):
    Bt = np.ascontiguousarray(B.T)
    alpha = params.alpha
    if kind == "alg2-transformed":
        def out(t, y):
            z = bank.eval(t)
            return B @ y + z - alpha * (B @ (Bt @ z)), z
    else:
        def out(t, y):
            z = bank.eval(t)
            return B @ y + z, z
    return out


def run(config: SimConfig) -> SimTrace:
    """Integrate the configured protocol and record a SimTrace.

    Gain-condition violations are reported as RuntimeWarnings, never
    errors.  Recording happens every `record_stride` steps plus the final
    step; the sample at a switch time reflects the new topology
    (right-continuous switching).
    """
    config.validate()
    for message in parameter_warnings(config):
        warnings.warn(message, RuntimeWarning, stacklevel=2)

    t0, dt = config.t0, config.dt
    n_steps = round((config.tf - t0) / dt)
    phases = _build_phases(config, n_steps)
    bank = config.bank
    n = len(config.schedule.node_ids)
    realign_fill = 0.0 if np.ndim(config.eta0) == 1 else float(config.eta0)

    record_at = sorted(set(range(0, n_steps + 1, config.record_stride)) | {n_steps})
    m = len(record_at)
    record_index = {step: row for row, step in enumerate(record_at)}

    times = np.empty(m)
    gamma_rec = np.empty((m, n))
    gt_global = np.empty((m, n))
    gt_comp = np.empty((m, n))
    comp_ids = np.empty((m, n), dtype=int)
    disagreement: list[np.ndarray] = [None] * m
    lyap = np.empty(m)
    bound_col = np.empty(m)
    events: list[tuple[float, str]] = []

    phase_pos = 0
    phase = phases[0]
    eta = (np.full(phase.topology.n_edges, float(config.eta0))
           if np.ndim(config.eta0) == 0 else np.array(config.eta0, dtype=float))
    rhs = _make_rhs(config.protocol_kind, phase.B, config.params, bank, phase.edge_gains)
    out = _make_output(config.protocol_kind, phase.B, config.params, bank)
    rk4 = config.integrator == "rk4"

    for i in range(n_steps + 1):
        t = t0 + i * dt
        if phase_pos + 1 < len(phases) and phases[phase_pos + 1].start_index == i:
            new = phases[phase_pos + 1]
            state = realign_state(
                ProtocolState(config.protocol_kind, eta), phase.topology, new.topology,
                fill=realign_fill,
            )
            carried = len(set(phase.topology.edges) & set(new.topology.edges))
            events.append((
                t,
                f"topology switch: {phase.topology.n_edges} -> {new.topology.n_edges} edges "
                f"({carried} carried)",
            ))
            phase_pos += 1
            phase = new
            eta = state.edge_states
            rhs = _make_rhs(config.protocol_kind, phase.B, config.params, bank, phase.edge_gains)
            out = _make_output(config.protocol_kind, phase.B, config.params, bank)

        row = record_index.get(i)
        if row is not None:
            gamma, z = out(t, eta)
            diff_global = gamma - z.mean()
            times[row] = t
            gamma_rec[row] = gamma
            gt_global[row] = diff_global
            gt_comp[row] = gamma - phase.averaging @ z
            comp_ids[row] = phase.labels
            disagreement[row] = phase.B.T @ gamma
            lyap[row] = 0.5 * float(diff_global @ diff_global)
            bound_col[row] = phase.bound_inf

        if i == n_steps:
            break
        if rk4:
            half = 0.5 * dt
            k1 = rhs(t, eta)
            k2 = rhs(t + half, eta + half * k1)
            k3 = rhs(t + half, eta + half * k2)
            k4 = rhs(t + dt, eta + dt * k3)
            eta = eta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            eta = eta + dt * rhs(t, eta)

    return SimTrace(
        node_ids=config.schedule.node_ids,
        protocol_kind=config.protocol_kind,
        dt=dt,
        times=times,
        gamma=gamma_rec,
        gamma_tilde_global=gt_global,
        gamma_tilde_component=gt_comp,
        component_ids=comp_ids,
        disagreement=tuple(disagreement),
        lyapunov=lyap,
        bound_inf=bound_col,
        events=tuple(events),
    )


def run_pair_equivalence(config: SimConfig) -> float:
    """Integrate alg2 and its derivative-free transform side by side.

    The transform initialisation xi0 = eta0 + alpha * Bᵀ z(t0) is applied
    automatically.  Returns the max over recorded steps and agents of the
    absolute gamma discrepancy between the two runs.
    """
    if config.protocol_kind != "alg2":
        raise ConfigInvalid("protocol_kind: pair equivalence is defined for alg2")
    config.validate()
    first = config.schedule.phases[0][1]
    B = build_incidence(first).matrix.astype(float)
    eta0 = (np.full(first.n_edges, float(config.eta0))
            if np.ndim(config.eta0) == 0 else np.array(config.eta0, dtype=float))
    xi0 = eta0 + config.params.alpha * (B.T @ config.bank.eval(config.t0))
    transformed = replace(config, protocol_kind="alg2-transformed", eta0=xi0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        trace_a = run(config)
        trace_b = run(transformed)
    return float(np.max(np.abs(trace_a.gamma - trace_b.gamma)))


def chattering_index(trace: SimTrace, window: int) -> float:
    """Fraction of consecutive-step sign alternations in the disagreement.

    Computed over the final `window` recorded steps and averaged across
    disagreement components: 0 means no alternation, 1 alternates every
    step.  The window must fit inside the final phase so that the edge set
    is constant.
    """
    if not (isinstance(window, int) and window >= 2):
        raise WindowTooLarge(f"window must be an integer >= 2, got {window!r}")
    if window > trace.n_recorded:
        raise WindowTooLarge(f"window of {window} steps exceeds {trace.n_recorded} recorded steps")
    tail = trace.disagreement[-window:]
    k = tail[0].shape[0]
    if any(arr.shape[0] != k for arr in tail):
        raise WindowTooLarge("window spans a topology switch")
    if k == 0:
        return 0.0
    signs = np.sign(np.stack(tail))
    alternations = (signs[:-1] * signs[1:]) < 0
    return float(alternations.mean(axis=0).mean())


def steady_state_error(trace: SimTrace, transient: float = 3.0) -> float:
    """Max component inf-norm error after the final phase's transient.

    The transient cutoff defaults to 3 s past the final phase start; the
    finite entry time is not computable in general, so the bound is treated
    as a steady-state property.
    """
    phase_start = max((t for t, _ in trace.events), default=trace.times[0])
    mask = trace.times >= phase_start + transient
    if not mask.any():
        mask = trace.times == trace.times[-1]
    return float(np.max(np.abs(trace.gamma_tilde_component[mask])))
