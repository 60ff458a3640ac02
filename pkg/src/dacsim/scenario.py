"""Scenario files: strict parsing, canonical hashing, SimConfig assembly.

A scenario is a JSON object with four mandatory sections (network, signals,
protocol, sim) and an optional output section.  Parsing is strict: unknown
keys are fatal, so typos in experiment definitions cannot pass silently.
All times are SI seconds.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import INTEGRATORS, ConfigInvalid, SimConfig
from .graph import Topology, TopologySchedule
from .protocols import PROTOCOL_KINDS, ProtocolParams
from .signals import SignalBank, SignalSpec, benchmark_bank

_SIGNAL_KEYS = ("kind", "amplitude", "omega", "phase", "offset", "slope")


def _require_mapping(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigInvalid(f"{path}: expected an object")
    return obj


def _check_keys(obj: dict, path: str, required: tuple[str, ...], optional: tuple[str, ...] = ()):
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ConfigInvalid(f"{path}: unknown key(s) {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ConfigInvalid(f"{path}: missing required key(s) {missing}")


def _real(obj, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ConfigInvalid(f"{path}: expected a number")
    value = float(obj)
    if not np.isfinite(value):
        raise ConfigInvalid(f"{path}: must be finite")
    return value


def _int(obj, path: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ConfigInvalid(f"{path}: expected an integer")
    return obj


def _edge_list(obj, path: str) -> list[tuple[int, int]]:
    if not isinstance(obj, list):
        raise ConfigInvalid(f"{path}: expected a list of 2-integer arrays")
    edges = []
    for pos, e in enumerate(obj):
        if not (isinstance(e, list) and len(e) == 2):
            raise ConfigInvalid(f"{path}[{pos}]: expected a 2-integer array")
        edges.append((_int(e[0], f"{path}[{pos}][0]"), _int(e[1], f"{path}[{pos}][1]")))
    return edges


@dataclass
class Scenario:
    """Parsed scenario plus the canonical dictionary it hashes to."""

    schedule: TopologySchedule
    bank: SignalBank
    protocol_kind: str
    params: ProtocolParams
    t0: float
    tf: float
    dt: float
    integrator: str
    eta0: float | list[float]
    record_stride: int
    csv_path: str | None
    plot_script: bool
    semantic: dict


def parse_scenario(source) -> Scenario:
    """Parse a scenario from a path, JSON string, or already-loaded dict."""
    if isinstance(source, dict):
        doc = source
    else:
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigInvalid(f"scenario: cannot read {path} ({exc})") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"scenario: invalid JSON ({exc})") from exc
    doc = _require_mapping(doc, "scenario")
    _check_keys(doc, "scenario", ("network", "signals", "protocol", "sim"), ("output",))

    # network
    net = _require_mapping(doc["network"], "network")
    _check_keys(net, "network", ("nodes", "edges"), ("schedule",))
    if not isinstance(net["nodes"], list) or not net["nodes"]:
        raise ConfigInvalid("network.nodes: expected a nonempty integer list")
    nodes = tuple(_int(v, f"network.nodes[{k}]") for k, v in enumerate(net["nodes"]))
    edges0 = _edge_list(net["edges"], "network.edges")

    # sim (parsed before the schedule: phase times anchor at t0)
    sim = _require_mapping(doc["sim"], "sim")
    _check_keys(sim, "sim", ("t0", "tf", "dt"), ("integrator", "eta0", "record_stride"))
    t0 = _real(sim["t0"], "sim.t0")
    tf = _real(sim["tf"], "sim.tf")
    dt = _real(sim["dt"], "sim.dt")
    integrator = sim.get("integrator", "euler")
    if integrator not in INTEGRATORS:
        raise ConfigInvalid(f"sim.integrator: unknown integrator {integrator!r}")
    eta0_raw = sim.get("eta0", 0.0)
    if isinstance(eta0_raw, list):
        eta0: float | list[float] = [_real(v, f"sim.eta0[{k}]") for k, v in enumerate(eta0_raw)]
    else:
        eta0 = _real(eta0_raw, "sim.eta0")
    record_stride = sim.get("record_stride", 1)
    if isinstance(record_stride, bool) or not isinstance(record_stride, int) or record_stride < 1:
        raise ConfigInvalid("sim.record_stride: expected a positive integer")

    try:
        phases = [(t0, Topology(nodes, tuple(edges0)))]
        sched_entries = net.get("schedule", [])
        if not isinstance(sched_entries, list):
            raise ConfigInvalid("network.schedule: expected a list of {time, edges} objects")
        for pos, entry in enumerate(sched_entries):
            entry = _require_mapping(entry, f"network.schedule[{pos}]")
            _check_keys(entry, f"network.schedule[{pos}]", ("time", "edges"))
            when = _real(entry["time"], f"network.schedule[{pos}].time")
            topo = Topology(nodes, tuple(_edge_list(entry["edges"], f"network.schedule[{pos}].edges")))
            phases.append((when, topo))
        schedule = TopologySchedule(tuple(phases))
    except ValueError as exc:
        if isinstance(exc, ConfigInvalid):
            raise
        raise ConfigInvalid(f"network: {exc}") from exc

    # signals
    sig = doc["signals"]
    if sig == "paper-bank":
        bank = benchmark_bank()
    elif isinstance(sig, list):
        specs = []
        for pos, entry in enumerate(sig):
            entry = _require_mapping(entry, f"signals[{pos}]")
            _check_keys(entry, f"signals[{pos}]", ("kind",), _SIGNAL_KEYS[1:])
            kwargs = {k: _real(entry[k], f"signals[{pos}].{k}") for k in _SIGNAL_KEYS[1:] if k in entry}
            try:
                specs.append(SignalSpec(entry["kind"], **kwargs))
            except ValueError as exc:
                raise ConfigInvalid(f"signals[{pos}]: {exc}") from exc
        bank = SignalBank(tuple(specs))
    else:
        raise ConfigInvalid('signals: expected "paper-bank" or a list of signal objects')
    if len(bank) != len(nodes):
        raise ConfigInvalid(f"signals: {len(bank)} signals for {len(nodes)} agents")

    # protocol
    proto = _require_mapping(doc["protocol"], "protocol")
    _check_keys(proto, "protocol", ("kind",),
                ("rho", "c", "alpha", "baseline_gain", "per_agent_gains"))
    kind = proto["kind"]
    if kind not in PROTOCOL_KINDS:
        raise ConfigInvalid(f"protocol.kind: unknown kind {kind!r}")
    gains = proto.get("per_agent_gains")
    if gains is not None:
        if not isinstance(gains, list):
            raise ConfigInvalid("protocol.per_agent_gains: expected a list of numbers")
        gains = tuple(_real(v, f"protocol.per_agent_gains[{k}]") for k, v in enumerate(gains))
    params = ProtocolParams(
        rho=_real(proto.get("rho", 1.0), "protocol.rho"),
        c=_real(proto.get("c", 1.0), "protocol.c"),
        alpha=_real(proto.get("alpha", 0.0), "protocol.alpha"),
        baseline_gain=_real(proto.get("baseline_gain", 1.0), "protocol.baseline_gain"),
        per_agent_gains=gains,
    )

    # output
    out = _require_mapping(doc.get("output", {}), "output")
    _check_keys(out, "output", (), ("csv_path", "plot_script"))
    csv_path = out.get("csv_path")
    if csv_path is not None and not isinstance(csv_path, str):
        raise ConfigInvalid("output.csv_path: expected a string")
    plot_script = out.get("plot_script", False)
    if not isinstance(plot_script, bool):
        raise ConfigInvalid("output.plot_script: expected a boolean")

    semantic = {
        "network": {
            "nodes": sorted(nodes),
            "edges": [list(e) for e in schedule.phases[0][1].edges],
            "schedule": [
                {"time": when, "edges": [list(e) for e in topo.edges]}
                for when, topo in schedule.phases[1:]
            ],
        },
        "signals": [
            {k: getattr(s, k) for k in _SIGNAL_KEYS} for s in bank.specs
        ],
        "protocol": {
            "kind": kind,
            "rho": params.rho,
            "c": params.c,
            "alpha": params.alpha,
            "baseline_gain": params.baseline_gain,
            "per_agent_gains": list(params.per_agent_gains) if params.per_agent_gains else None,
        },
        "sim": {
            "t0": t0, "tf": tf, "dt": dt, "integrator": integrator,
            "eta0": eta0, "record_stride": record_stride,
        },
    }
    return Scenario(
        schedule=schedule, bank=bank, protocol_kind=kind, params=params,
        t0=t0, tf=tf, dt=dt, integrator=integrator, eta0=eta0,
        record_stride=record_stride, csv_path=csv_path, plot_script=plot_script,
        semantic=semantic,
    )


def scenario_hash(scenario: Scenario) -> str:
    """SHA-256 of the canonical semantic document.

    Output options are excluded: the hash changes exactly when a field that
    affects the computed trace changes.
    """
    canonical = json.dumps(scenario.semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def to_sim_config(scenario: Scenario, tf: float | None = None) -> SimConfig:
    eta0 = scenario.eta0
    if isinstance(eta0, list):
        eta0 = np.array(eta0, dtype=float)
    return SimConfig(
        t0=scenario.t0,
        tf=scenario.tf if tf is None else float(tf),
        dt=scenario.dt,
        protocol_kind=scenario.protocol_kind,
        params=scenario.params,
        schedule=scenario.schedule,
        bank=scenario.bank,
        integrator=scenario.integrator,
        eta0=eta0,
        record_stride=scenario.record_stride,
    )
