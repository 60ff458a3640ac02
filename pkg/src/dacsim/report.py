"""Trace serialization and figure rendering.

Traces are written as CSV with `#` header comments carrying the scenario
hash, events, and the per-component bound report.  Values are serialized
with 17 significant digits, which round-trips IEEE doubles exactly: a
re-parsed trace reproduces every recorded value bit for bit.

Figures (agent estimates, and the per-component error on a log axis) are
rendered with matplotlib straight to PNG files next to the CSV.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .analysis import BoundReport
from .engine import SimTrace


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _fmt_bool(value: bool | None) -> str:
    if value is None:
        return "n/a"
    return "true" if value else "false"


def report_lines(reports: tuple[BoundReport, ...], phase_start: float) -> list[str]:
    """Flat key-value block for one phase's component reports."""
    lines = []
    for rep in reports:
        fields = [
            f"component={','.join(str(n) for n in rep.nodes)}",
            f"n_agents={rep.n_agents}",
            f"lambda2={_fmt(rep.lambda2)}",
            f"lambda_max={_fmt(rep.lambda_max)}",
            f"bt_pinv_norm2={_fmt(rep.bt_pinv_norm2)}",
            f"zdot_l1_sup={_fmt(rep.zdot_l1_sup)}",
            f"delta={_fmt(rep.delta)}",
            f"ultimate_bound_inf={_fmt(rep.ultimate_bound_inf)}",
            f"rho_condition_ok={_fmt_bool(rep.rho_condition_ok)}",
            f"c_condition_ok={_fmt_bool(rep.c_condition_ok)}",
            f"alpha_condition_ok={_fmt_bool(rep.alpha_condition_ok)}",
        ]
        lines.append(f"phase t>={phase_start:g} " + " ".join(fields))
    return lines


def trace_columns(trace: SimTrace) -> list[str]:
    n = len(trace.node_ids)
    return (
        ["t"]
        + [f"gamma_{i}" for i in trace.node_ids]
        + [f"err_comp_{i}" for i in trace.node_ids]
        + ["err_global_inf", "V", "bound_inf"]
        + [f"component_id_{i}" for i in trace.node_ids]
    )


def write_trace_csv(path, trace: SimTrace, header_meta: dict[str, str],
                    report_block: list[str]) -> Path:
    """Write a trace; header_meta and report_block become `#` comments."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    err_inf = np.max(np.abs(trace.gamma_tilde_global), axis=1)
    with path.open("w", newline="") as handle:
        for key, value in header_meta.items():
            handle.write(f"# {key}: {value}\n")
        for t, desc in trace.events:
            handle.write(f"# event: t={t:g} {desc}\n")
        for line in report_block:
            handle.write(f"# {line}\n")
        writer = csv.writer(handle)
        writer.writerow(trace_columns(trace))
        for row in range(trace.n_recorded):
            writer.writerow(
                [_fmt(trace.times[row])]
                + [_fmt(v) for v in trace.gamma[row]]
                + [_fmt(v) for v in trace.gamma_tilde_component[row]]
                + [_fmt(err_inf[row]), _fmt(trace.lyapunov[row]), _fmt(trace.bound_inf[row])]
                + [str(int(v)) for v in trace.component_ids[row]]
            )
    return path


def read_trace_csv(path) -> tuple[list[str], dict[str, np.ndarray]]:
    """Parse a trace CSV back into (comment lines, column arrays)."""
    comments = []
    rows = []
    header: list[str] | None = None
    with Path(path).open(newline="") as handle:
        for raw in handle:
            if raw.startswith("#"):
                comments.append(raw[1:].strip())
                continue
            parsed = next(csv.reader([raw]))
            if header is None:
                header = parsed
            else:
                rows.append([float(v) for v in parsed])
    if header is None:
        raise ValueError(f"{path}: no CSV header found")
    data = np.array(rows)
    columns = {name: data[:, k] for k, name in enumerate(header)}
    return comments, columns


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def render_figures(trace: SimTrace, out_prefix, title: str = "") -> list[Path]:
    """Render the estimate and log-error figures for one trace.

    Writes <out_prefix>_estimates.png and <out_prefix>_error.png and
    returns their paths.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_prefix = Path(out_prefix)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)
    t = trace.times
    # The recorded global error is gamma minus the signal average, so the
    # average itself is recoverable without storing it separately.
    signal_average = trace.gamma[:, 0] - trace.gamma_tilde_global[:, 0]
    paths = []

    fig, ax = plt.subplots(figsize=(8, 4.5))
    for k, node in enumerate(trace.node_ids):
        ax.plot(t, trace.gamma[:, k], lw=1.0, label=f"agent {node}")
    ax.plot(t, signal_average, "k--", lw=1.6, label="signal average")
    for when, _ in trace.events:
        ax.axvline(when, color="0.6", ls=":", lw=1.0)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("estimate")
    ax.set_title(title or f"{trace.protocol_kind}: agent estimates")
    ax.legend(fontsize=7, ncol=2, loc="upper right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    est_path = out_prefix.with_name(out_prefix.name + "_estimates.png")
    fig.savefig(est_path, dpi=120)
    plt.close(fig)
    paths.append(est_path)

    fig, ax = plt.subplots(figsize=(8, 4.5))
    err = np.maximum(np.abs(trace.gamma_tilde_component), 1e-16)
    for k, node in enumerate(trace.node_ids):
        ax.semilogy(t, err[:, k], lw=1.0, label=f"agent {node}")
    finite_bound = np.isfinite(trace.bound_inf)
    if finite_bound.any():
        ax.semilogy(t[finite_bound], trace.bound_inf[finite_bound], "k--", lw=1.6,
                    label="error bound")
    for when, _ in trace.events:
        ax.axvline(when, color="0.6", ls=":", lw=1.0)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("|component error|")
    ax.set_title(title or f"{trace.protocol_kind}: consensus error")
    ax.legend(fontsize=7, ncol=2, loc="upper right")
    ax.grid(True, alpha=0.3, which="both")
    fig.tight_layout()
    err_path = out_prefix.with_name(out_prefix.name + "_error.png")
    fig.savefig(err_path, dpi=120)
    plt.close(fig)
    paths.append(err_path)
    return paths
