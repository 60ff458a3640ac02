"""The built-in nine-agent benchmark study.

Nine agents on a 3x3 grid graph; at t = 2 s agent 2's communication module
fails, dropping its three links and splitting the network into an isolated
agent and an eight-node component.  Four protocol configurations are
compared on this scenario:

  alg1             rho = 16, c = 1, dt = 0.01
  alg2             rho = 4.1, c = 4, alpha = 0.16, dt = 0.01
  baseline-fine    signum baseline, uniform gain 10, dt = 1e-4
  baseline-coarse  signum baseline, heterogeneous per-agent gains, dt = 0.01
"""

from __future__ import annotations

NODES = list(range(1, 10))

# 3x3 grid: columns (1,2,3), (4,5,6), (7,8,9) bottom to top.
PRE_FAILURE_EDGES = [
    [1, 2], [1, 4], [2, 3], [2, 5], [3, 6], [4, 5],
    [4, 7], [5, 6], [5, 8], [6, 9], [7, 8], [8, 9],
]
POST_FAILURE_EDGES = [e for e in PRE_FAILURE_EDGES if 2 not in e]
FAILURE_TIME = 2.0

HETEROGENEOUS_GAINS = [5.7, 4.6, 3.4, 2.3, 1.2, 1.2, 2.3, 3.4, 4.6]
UNIFORM_FINE_GAIN = 10.0

ALG1 = {"kind": "alg1", "rho": 16.0, "c": 1.0}
ALG2 = {"kind": "alg2", "rho": 4.1, "c": 4.0, "alpha": 0.16}


def scenario_dict(protocol: dict, dt: float, tf: float = 30.0, t0: float = 0.0,
                  integrator: str = "euler", record_stride: int = 1,
                  csv_path: str | None = None, plot_script: bool = False,
                  with_failure: bool = True) -> dict:
    """JSON-ready scenario document for the benchmark network."""
    network: dict = {"nodes": list(NODES), "edges": [list(e) for e in PRE_FAILURE_EDGES]}
    if with_failure:
        network["schedule"] = [
            {"time": FAILURE_TIME, "edges": [list(e) for e in POST_FAILURE_EDGES]}
        ]
    doc = {
        "network": network,
        "signals": "paper-bank",
        "protocol": dict(protocol),
        "sim": {"t0": t0, "tf": tf, "dt": dt, "integrator": integrator,
                "record_stride": record_stride},
        "output": {"plot_script": plot_script},
    }
    if csv_path is not None:
        doc["output"]["csv_path"] = csv_path
    return doc


def study_configurations(tf: float = 30.0) -> dict[str, dict]:
    """The four benchmark configurations, keyed by a filename-safe label."""
    return {
        "alg1": scenario_dict(ALG1, dt=0.01, tf=tf),
        "alg2": scenario_dict(ALG2, dt=0.01, tf=tf),
        "baseline_fine": scenario_dict(
            {"kind": "baseline-sgn", "baseline_gain": UNIFORM_FINE_GAIN},
            dt=1e-4, tf=tf, record_stride=100,
        ),
        "baseline_coarse": scenario_dict(
            {"kind": "baseline-sgn", "per_agent_gains": list(HETEROGENEOUS_GAINS)},
            dt=0.01, tf=tf,
        ),
    }


def compare_protocol(kind: str, dt: float, base_protocol: dict, n_agents: int) -> dict:
    """Protocol section for one cell of a comparison grid.

    The scenario's own protocol section wins when the kind matches;
    otherwise the benchmark parameter sets apply.  Baseline gains follow
    the study: uniform gain 10 below dt = 5 ms, heterogeneous per-agent
    gains at coarser sampling (nine-agent network only).
    """
    if kind == base_protocol.get("kind"):
        return dict(base_protocol)
    if kind == "alg1":
        return dict(ALG1)
    if kind in ("alg2", "alg2-transformed"):
        out = dict(ALG2)
        out["kind"] = kind
        return out
    if kind == "baseline-sgn":
        if dt >= 5e-3 and n_agents == len(HETEROGENEOUS_GAINS):
            return {"kind": "baseline-sgn", "per_agent_gains": list(HETEROGENEOUS_GAINS)}
        return {"kind": "baseline-sgn", "baseline_gain": UNIFORM_FINE_GAIN}
    raise ValueError(f"unknown protocol kind {kind!r}")
