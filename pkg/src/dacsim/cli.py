"""Command-line entry point.

Subcommands:
  run         integrate one scenario file, write the CSV trace (and figures)
  validate    print the per-phase spectral data, bounds, and gain conditions
  compare     run a protocol-kind x sampling-time grid and tabulate metrics
  repro-paper run the built-in nine-agent benchmark study (four configs)

Exit codes: 0 ok, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import copy
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import analysis, benchmark, engine, report
from .engine import ConfigInvalid, SimTrace, WindowTooLarge
from .scenario import Scenario, parse_scenario, scenario_hash, to_sim_config

_COMPARE_KINDS = "alg1,alg2,baseline-sgn"
_COMPARE_DTS = "0.01,0.0001"
_MAX_CSV_ROWS = 3001


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigInvalid(message)


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--force", action="store_true",
                        help="allow writing into a non-empty output directory")
    common.add_argument("--tf", type=float, metavar="SECONDS",
                        help="override the simulation horizon")
    common.add_argument("--seedless", action="store_true",
                        help="reserved; the simulator uses no randomness")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = _Parser(prog="dacsim", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[common], help="run one scenario")
    p_run.add_argument("scenario", help="scenario JSON file")

    p_val = sub.add_parser("validate", parents=[common],
                           help="print bounds and gain conditions for a scenario")
    p_val.add_argument("scenario", help="scenario JSON file")

    p_cmp = sub.add_parser("compare", parents=[common],
                           help="run a protocol x sampling-time grid")
    p_cmp.add_argument("scenario", help="base scenario JSON file")
    p_cmp.add_argument("--kinds", default=_COMPARE_KINDS,
                       help=f"comma-separated protocol kinds (default {_COMPARE_KINDS})")
    p_cmp.add_argument("--dts", default=_COMPARE_DTS,
                       help=f"comma-separated sampling times (default {_COMPARE_DTS})")

    sub.add_parser("repro-paper", parents=[common],
                   help="run the built-in nine-agent benchmark study")
    return parser


def _emit_warnings(scenario: Scenario) -> None:
    config = to_sim_config(scenario)
    for message in engine.parameter_warnings(config):
        print(f"warning: {message}", file=sys.stderr)


def _silent_run(config) -> SimTrace:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return engine.run(config)


def _thin(trace: SimTrace, max_rows: int) -> SimTrace:
    """Row-subsampled copy for CSV emission (always keeps the final row)."""
    if trace.n_recorded <= max_rows:
        return trace
    stride = -(-trace.n_recorded // max_rows)
    keep = sorted(set(range(0, trace.n_recorded, stride)) | {trace.n_recorded - 1})
    idx = np.array(keep)
    return SimTrace(
        node_ids=trace.node_ids,
        protocol_kind=trace.protocol_kind,
        dt=trace.dt,
        times=trace.times[idx],
        gamma=trace.gamma[idx],
        gamma_tilde_global=trace.gamma_tilde_global[idx],
        gamma_tilde_component=trace.gamma_tilde_component[idx],
        component_ids=trace.component_ids[idx],
        disagreement=tuple(trace.disagreement[i] for i in keep),
        lyapunov=trace.lyapunov[idx],
        bound_inf=trace.bound_inf[idx],
        events=trace.events,
    )


def _report_block(scenario: Scenario) -> list[str]:
    lines = []
    for start, topo in scenario.schedule.phases:
        reports = analysis.bound_report(topo, scenario.bank, scenario.params,
                                        scenario.protocol_kind)
        lines.extend(report.report_lines(reports, start))
        reported = {n for rep in reports for n in rep.nodes}
        for node in topo.node_ids:
            if node not in reported:
                lines.append(f"phase t>={start:g} component={node} "
                             "isolated agent: tracks its own signal exactly")
    return lines


def _scenario_with_tf(scenario_path: str, tf: float | None) -> Scenario:
    scenario = parse_scenario(scenario_path)
    if tf is not None:
        doc = copy.deepcopy(scenario.semantic)
        doc["sim"]["tf"] = float(tf)
        scenario = parse_scenario(doc)
    return scenario


def _write_outputs(scenario: Scenario, trace: SimTrace, csv_path: Path,
                   quiet: bool) -> None:
    meta = {
        "scenario_hash": scenario_hash(scenario),
        "protocol": scenario.protocol_kind,
        "integrator": scenario.integrator,
        "dt": format(scenario.dt, ".17g"),
    }
    report.write_trace_csv(csv_path, _thin(trace, _MAX_CSV_ROWS), meta,
                           _report_block(scenario))
    if not quiet:
        print(f"trace: {csv_path}")
    if scenario.plot_script:
        figures = report.render_figures(trace, csv_path.with_suffix(""))
        if not quiet:
            for fig in figures:
                print(f"figure: {fig}")


def cmd_run(args) -> int:
    scenario = _scenario_with_tf(args.scenario, args.tf)
    _emit_warnings(scenario)
    trace = _silent_run(to_sim_config(scenario))
    name = scenario.csv_path or (Path(args.scenario).stem + ".csv")
    out_dir = Path(args.out) if args.out else Path.cwd()
    _write_outputs(scenario, trace, out_dir / name, args.quiet)
    return 0


def cmd_validate(args) -> int:
    scenario = _scenario_with_tf(args.scenario, args.tf)
    print(f"scenario_hash: {scenario_hash(scenario)}")
    print(f"protocol: {scenario.protocol_kind}")
    for line in _report_block(scenario):
        print(line)
    return 0


def _final_phase_window(trace: SimTrace, seconds: float) -> int:
    wanted = round(seconds / trace.dt) + 1
    last_event = max((t for t, _ in trace.events), default=None)
    if last_event is not None:
        wanted = min(wanted, int(np.count_nonzero(trace.times >= last_event)))
    return min(wanted, trace.n_recorded)


def cmd_compare(args) -> int:
    base = _scenario_with_tf(args.scenario, args.tf)
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    dts = [float(v) for v in args.dts.split(",") if v.strip()]
    if not kinds or not dts:
        raise ConfigInvalid("--kinds/--dts: need at least one kind and one dt")
    out_dir = Path(args.out) if args.out else Path("compare-out")
    out_dir.mkdir(parents=True, exist_ok=True)

    n_agents = len(base.schedule.node_ids)
    rows = []
    for kind in kinds:
        for dt in dts:
            doc = copy.deepcopy(base.semantic)
            doc["protocol"] = benchmark.compare_protocol(kind, dt, base.semantic["protocol"],
                                                         n_agents)
            doc["sim"]["dt"] = dt
            doc["sim"]["record_stride"] = 1
            scenario = parse_scenario(doc)
            started = time.perf_counter()
            trace = _silent_run(to_sim_config(scenario))
            wall = time.perf_counter() - started
            steady = engine.steady_state_error(trace)
            window = _final_phase_window(trace, 5.0)
            try:
                chatter = engine.chattering_index(trace, window)
            except WindowTooLarge:
                chatter = float("nan")
            label = f"{kind.replace('-', '_')}_dt{dt:g}"
            csv_path = out_dir / f"{label}.csv"
            _write_outputs(scenario, trace, csv_path, quiet=True)
            rows.append((kind, dt, steady, chatter, wall))

    print(f"{'kind':<18} {'dt':>10} {'steady_err':>14} {'chattering':>12} {'wall_s':>8}")
    for kind, dt, steady, chatter, wall in rows:
        print(f"{kind:<18} {dt:>10g} {steady:>14.6e} {chatter:>12.4f} {wall:>8.2f}")
    if not args.quiet:
        print(f"per-run CSVs in {out_dir}")
    return 0


def cmd_repro(args) -> int:
    out_dir = Path(args.out) if args.out else Path("repro-out")
    if out_dir.exists() and any(out_dir.iterdir()) and not args.force:
        raise ConfigInvalid(f"--out: {out_dir} exists and is not empty (use --force)")
    out_dir.mkdir(parents=True, exist_ok=True)
    tf = args.tf if args.tf is not None else 30.0
    for name, doc in benchmark.study_configurations(tf=tf).items():
        scenario = parse_scenario(doc)
        _emit_warnings(scenario)
        trace = _silent_run(to_sim_config(scenario))
        meta = {
            "scenario_hash": scenario_hash(scenario),
            "protocol": scenario.protocol_kind,
            "integrator": scenario.integrator,
            "dt": format(scenario.dt, ".17g"),
        }
        csv_path = out_dir / f"{name}.csv"
        report.write_trace_csv(csv_path, _thin(trace, _MAX_CSV_ROWS), meta,
                               _report_block(scenario))
        figures = report.render_figures(trace, out_dir / name)
        if not args.quiet:
            steady = engine.steady_state_error(trace)
            print(f"{name}: trace {csv_path.name}, figures "
                  f"{', '.join(f.name for f in figures)}, steady error {steady:.4g}")
    return 0


_COMMANDS = {
    "run": cmd_run,
    "validate": cmd_validate,
    "compare": cmd_compare,
    "repro-paper": cmd_repro,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
