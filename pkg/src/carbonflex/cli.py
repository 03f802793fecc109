"""Command-line entry point.

Exit status: 0 on success, 1 for usage errors, 2 for data or validation
errors (bad trace, infeasible job, unwritable output).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .engine import AccountingError, Aggregate, account, aggregate_family, normalize
from .policies import (
    RateShift,
    SuspendResume,
    WaitAndScale,
    dvfs_starts,
    plan_dvfs,
    plan_suspend_resume,
    plan_wait_and_scale,
    sweep_dvfs,
)
from .powermodel import SERVERS, ScalabilityProfile, get_server, load_server_model
from .report import (
    AGGREGATE_COLUMNS,
    Report,
    aggregate_rows,
    render,
    render_heatmap_svg,
    trace_digest,
)
from .trace import TraceError, format_timestamp, read_trace, render_csv, synth_trace
from .workload import CheckpointableJob, DvfsJob, ScalableJob

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", metavar="PATH", help="write to PATH instead of stdout")


def _start_flags(p: argparse.ArgumentParser, all_default: bool) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--start", type=int, metavar="SLOT", help="single start slot")
    g.add_argument("--all-starts", action="store_true", default=None,
                   help="every start slot whose window fits the trace"
                   + (" (default)" if all_default else ""))


def _server_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--server", choices=sorted(SERVERS), help="built-in server model")
    g.add_argument("--server-config", metavar="PATH", help="key = value server model file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="carbonflex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"carbonflex {__version__}")
    sub = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    trace = sub.add_parser("trace", help="trace tooling")
    tsub = trace.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = tsub.add_parser("validate", help="check a trace CSV")
    v.add_argument("path")
    s = tsub.add_parser("synth", help="write a synthetic diurnal trace")
    s.add_argument("--days", type=int, required=True)
    s.add_argument("--base", type=float, required=True)
    s.add_argument("--amplitude", type=float, required=True)
    s.add_argument("--period", type=float, default=24.0, help="hours")
    s.add_argument("--noise", type=float, default=0.0, help="gaussian std, gCO2eq/kWh")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", metavar="PATH")

    for group, all_default in (("run", False), ("sweep", True)):
        g = sub.add_parser(group, help=f"{group} a carbon-aware policy")
        gsub = g.add_subparsers(dest="command", required=True, parser_class=_Parser)

        t = gsub.add_parser("temporal", help="suspend-resume")
        t.add_argument("--trace", required=True)
        t.add_argument("--duration-hours", type=float, default=24.0)
        t.add_argument("--power-watts", type=float, default=120.0)
        if group == "run":
            t.add_argument("--slack", type=float, default=1.0)
            t.add_argument("--checkpoint-min", type=float, default=0.0)
            t.add_argument("--restore-min", type=float, default=0.0)
        else:
            t.add_argument("--slacks", type=_floats, default=[1.0, 1.5, 2.0, 2.5, 3.0])
            t.add_argument("--overhead-min", type=_floats, default=None,
                           help="overhead variants; each sets checkpoint and restore minutes "
                           "(default 5,10,15)")
            t.add_argument("--checkpoint-min", type=float)
            t.add_argument("--restore-min", type=float)

        k = gsub.add_parser("scale", help="Wait&Scale")
        k.add_argument("--trace", required=True)
        k.add_argument("--work", type=float, default=24.0, help="slot-equivalents at one node")
        k.add_argument("--per-node-watts", type=float, default=120.0)
        k.add_argument("--reduction", type=float, required=True,
                       help="throughput reduction per additional node, e.g. 0.05")
        k.add_argument("--max-nodes", type=int,
                       help="default: largest valid count up to 10")
        if group == "run":
            k.add_argument("--k", type=int, required=True)
        else:
            k.add_argument("--ks", type=_ints, help="default: 1..max-nodes")

        d = gsub.add_parser("dvfs", help="dual-frequency rate shifting")
        d.add_argument("--trace", required=True)
        d.add_argument("--work", type=float, default=24.0, help="slot-equivalents at F_max")
        d.add_argument("--io", type=float, required=True, help="IO fraction in [0, 1]")
        _server_flags(d)
        if group == "run":
            d.add_argument("--f-low-carbon", type=float, required=True, metavar="MHZ")
            d.add_argument("--f-high-carbon", type=float, required=True, metavar="MHZ")
        else:
            d.add_argument("--svg", metavar="PATH", help="also write a heatmap")
            d.add_argument("--svg-metric", default="norm_carbon_efficiency",
                           choices=("norm_carbon_efficiency", "norm_energy_efficiency"))

        for p in (t, k, d):
            _start_flags(p, all_default)
            _output_flags(p)
    return parser


def _server(args):
    if args.server_config:
        return load_server_model(args.server_config)
    return get_server(args.server or "e5-2620v4")


def _profile(args) -> ScalabilityProfile:
    if args.max_nodes is not None:
        return ScalabilityProfile(args.reduction, args.max_nodes)
    return ScalabilityProfile.largest(args.reduction, limit=10)


def _starts(args, all_default: bool):
    if args.start is not None:
        return [args.start]
    if args.all_starts or all_default:
        return None
    return [0]


def _metadata(args, trace, **params) -> dict:
    return {
        "tool": "carbonflex",
        "version": __version__,
        "command": f"{args.group} {args.command}",
        "trace_sha256_16": trace_digest(trace),
        "trace_slots": len(trace),
        "slot_hours": trace.slot_duration,
        "parameters": params,
    }


def _per_start_report(meta, trace, schedules) -> Report:
    runs = [account(s, trace) for s in schedules]
    columns = ["start", "timestamp", "useful_work", "energy_kwh", "carbon_g",
               "completion_slots", "segments", "overhead_events",
               "energy_efficiency", "carbon_efficiency",
               "norm_energy_efficiency", "norm_carbon_efficiency"]
    rows = []
    for sched, run, (ne, nc) in zip(schedules, runs, normalize(runs)):
        rows.append({
            "start": sched.start_slot,
            "timestamp": format_timestamp(trace.timestamp(sched.start_slot)),
            "useful_work": run.useful_work,
            "energy_kwh": run.energy,
            "carbon_g": run.carbon,
            "completion_slots": run.completion_slots,
            "segments": len(sched.segments()),
            "overhead_events": len(sched.overhead_events),
            "energy_efficiency": run.energy_efficiency,
            "carbon_efficiency": run.carbon_efficiency,
            "norm_energy_efficiency": ne,
            "norm_carbon_efficiency": nc,
        })
    return Report(meta, columns, rows)


def _feasible(policy, trace, starts) -> tuple[list[int], int]:
    window = policy.window_slots(trace)
    candidates = list(range(len(trace))) if starts is None else starts
    ok = [s for s in candidates if 0 <= s and s + window <= len(trace)]
    if not ok:
        raise ValueError(f"no feasible start: job window of {window} slots does not fit the trace")
    return ok, len(candidates) - len(ok)


def _run(args) -> tuple[Report, str | None]:
    trace = read_trace(args.trace)
    starts = _starts(args, all_default=False)
    if args.command == "temporal":
        job = CheckpointableJob(args.duration_hours, args.power_watts,
                                args.checkpoint_min, args.restore_min, args.slack)
        ok, excluded = _feasible(SuspendResume(job), trace, starts)
        scheds = [plan_suspend_resume(job, trace, s) for s in ok]
        params = dict(duration_hours=job.duration, power_watts=job.power, slack=job.slack_factor,
                      checkpoint_min=job.checkpoint_time, restore_min=job.restore_time)
    elif args.command == "scale":
        job = ScalableJob(args.work, args.per_node_watts, _profile(args))
        ok, excluded = _feasible(WaitAndScale(job, args.k), trace, starts)
        scheds = [plan_wait_and_scale(job, args.k, trace, s) for s in ok]
        params = dict(work=job.work, per_node_watts=job.per_node_power, k=args.k,
                      reduction=job.profile.reduction_per_node, max_nodes=job.profile.max_nodes)
    else:
        job = DvfsJob(args.work, args.io, _server(args))
        ok, excluded = _feasible(RateShift(job, args.f_low_carbon, args.f_high_carbon), trace, starts)
        scheds = [plan_dvfs(job, args.f_low_carbon, args.f_high_carbon, trace, s) for s in ok]
        params = dict(work=job.work, io=job.io_fraction, server=job.server.name,
                      f_low_carbon=args.f_low_carbon, f_high_carbon=args.f_high_carbon)
    report = _per_start_report(_metadata(args, trace, **params), trace, scheds)
    report.excluded_starts = excluded
    return report, None


def _sweep(args) -> tuple[Report, str | None]:
    trace = read_trace(args.trace)
    starts = _starts(args, all_default=True)
    svg = None
    if args.command == "temporal":
        explicit = args.checkpoint_min is not None or args.restore_min is not None
        if explicit and args.overhead_min is not None:
            raise UsageError("--overhead-min conflicts with --checkpoint-min/--restore-min")
        if explicit:
            variants = [(args.checkpoint_min or 0.0, args.restore_min or 0.0)]
        else:
            variants = [(m, m) for m in (args.overhead_min or [5.0, 10.0, 15.0])]
        params, policies = [], []
        for ck, rs in variants:
            for slack in args.slacks:
                job = CheckpointableJob(args.duration_hours, args.power_watts, ck, rs, slack)
                params.append(dict(checkpoint_min=ck, restore_min=rs, slack=slack))
                policies.append(SuspendResume(job))
        aggs = aggregate_family(policies, trace, starts)
        columns = ["checkpoint_min", "restore_min", "slack"]
        meta = _metadata(args, trace, duration_hours=args.duration_hours,
                         power_watts=args.power_watts)
    elif args.command == "scale":
        profile = _profile(args)
        job = ScalableJob(args.work, args.per_node_watts, profile)
        ks = args.ks or list(range(1, profile.max_nodes + 1))
        policies = [WaitAndScale(job, k) for k in ks]
        params = [dict(k=k) for k in ks]
        aggs = aggregate_family(policies, trace, starts)
        columns = ["k"]
        meta = _metadata(args, trace, work=job.work, per_node_watts=job.per_node_power,
                         reduction=profile.reduction_per_node, max_nodes=profile.max_nodes)
    else:
        job = DvfsJob(args.work, args.io, _server(args))
        feasible = dvfs_starts(job, trace)
        candidates = list(range(len(trace))) if starts is None else starts
        chosen = [s for s in candidates if s in feasible]
        if not chosen:
            raise ValueError("no feasible start for the slowest frequency pair")
        cells = sweep_dvfs(job, trace, chosen)
        excluded = len(candidates) - len(chosen)
        aggs = [Aggregate(c.aggregate.starts, c.aggregate.useful_work, c.aggregate.energy,
                          c.aggregate.carbon, c.aggregate.completion_slots, excluded)
                for c in cells]
        params = [dict(f_low_carbon=c.f_low_carbon, f_high_carbon=c.f_high_carbon) for c in cells]
        columns = ["f_low_carbon", "f_high_carbon"]
        meta = _metadata(args, trace, work=job.work, io=job.io_fraction, server=job.server.name)
    rows = aggregate_rows(params, aggs)
    report = Report(meta, columns + AGGREGATE_COLUMNS, rows, aggs[0].excluded if aggs else 0)
    if args.command == "dvfs" and args.svg:
        levels = list(job.server.levels)
        grid = np.array([r[args.svg_metric] for r in rows]).reshape(len(levels), len(levels))
        title = f"{args.svg_metric} (io={job.io_fraction:g}, {job.server.name})"
        svg = render_heatmap_svg(levels, levels, grid, title)
    return report, svg


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text, encoding="utf-8", newline="")


def _trace_cmd(args) -> int:
    if args.command == "validate":
        t = read_trace(args.path)
        print(
            f"{args.path}: ok, {len(t)} slots of {t.slot_duration:g} h from "
            f"{format_timestamp(t.start_time)}; intensity min {t.intensities.min():.6g} "
            f"mean {t.intensities.mean():.6g} max {t.intensities.max():.6g} gCO2eq/kWh"
        )
        return EXIT_OK
    t = synth_trace(args.days, args.base, args.amplitude, args.period, args.noise, args.seed)
    _write(render_csv(t), args.out)
    return EXIT_OK


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.group == "trace":
            return _trace_cmd(args)
        report, svg = (_run if args.group == "run" else _sweep)(args)
        _write(render(report, args.format), args.out)
        if svg is not None:
            _write(svg, args.svg)
        return EXIT_OK
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TraceError, AccountingError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
