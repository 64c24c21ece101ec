"""Command line interface.

    hybridbench run --config exp.cfg [--out report.json]
    hybridbench run --workload sort --n 100000 --seed 42 [--share F | --calibrate K]
    hybridbench suite --config suite.cfg --out table.csv
    hybridbench gen --kind sort --n 100000 --seed 42 --out data.bin

Exit codes: 0 success, 2 config error, 3 I/O error, 4 oracle failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ExperimentConfig, load_config_file
from .datasets import generate_uar, write_dataset
from .errors import ConfigError, DataIOError, HybridBenchError, OracleMismatch
from .harness import (
    build_suite,
    report_json_text,
    run_experiment,
    run_suite,
    write_report,
    write_suite,
)

_PLATFORM_FLAGS = {
    "throughput_a": "platform.device_a.throughput",
    "workers_a": "platform.device_a.workers",
    "throughput_b": "platform.device_b.throughput",
    "workers_b": "platform.device_b.workers",
    "bandwidth": "platform.link.bandwidth_bytes_per_s",
    "latency": "platform.link.latency_s",
    "accounting": "platform.accounting",
}


def _add_platform_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("platform overrides")
    group.add_argument("--throughput-a", type=float)
    group.add_argument("--throughput-b", type=float)
    group.add_argument("--workers-a", type=int)
    group.add_argument("--workers-b", type=int)
    group.add_argument("--bandwidth", type=float)
    group.add_argument("--latency", type=float)
    group.add_argument("--accounting", choices=["modeled", "measured"])


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one workload and emit a JSON report")
    run_p.add_argument("--config", help="experiment config file")
    run_p.add_argument("--workload", help="workload name")
    run_p.add_argument("--n", type=int, help="generated input size")
    run_p.add_argument("--seed", type=int, help="generator seed")
    run_p.add_argument("--input", help="input file path")
    run_p.add_argument("--share", type=float, help="manual DeviceA work fraction")
    run_p.add_argument("--calibrate", type=int, help="calibration refinement budget")
    run_p.add_argument("--out", help="report path (stdout if omitted)")
    run_p.add_argument("--dump-taskgraph", metavar="FILE.dot", help="write the task DAG as DOT")
    run_p.add_argument(
        "--plot",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="render a timeline figure next to --out",
    )
    _add_platform_flags(run_p)

    suite_p = sub.add_parser("suite", help="run a benchmark suite and emit a CSV table")
    suite_p.add_argument("--config", required=True)
    suite_p.add_argument("--out", required=True)
    suite_p.add_argument(
        "--plot",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="render a bar chart next to --out",
    )

    gen_p = sub.add_parser("gen", help="generate a seeded dataset file")
    gen_p.add_argument("--kind", required=True)
    gen_p.add_argument("--n", type=int, required=True)
    gen_p.add_argument("--seed", type=int, required=True)
    gen_p.add_argument("--out", required=True)
    gen_p.add_argument("--bins", type=int)
    gen_p.add_argument("--density", type=float)
    gen_p.add_argument("--edge-factor", type=int)
    gen_p.add_argument("--p", type=float)
    return parser


def _run_mapping(args: argparse.Namespace) -> dict[str, str]:
    mapping: dict[str, str] = {}
    if args.config:
        mapping.update(load_config_file(args.config))
    if args.workload:
        mapping["workload.name"] = args.workload
    if args.n is not None:
        mapping["input.n"] = str(args.n)
    if args.seed is not None:
        mapping["input.seed"] = str(args.seed)
    if args.input is not None:
        mapping["input.path"] = args.input
        mapping.setdefault("input.kind", "file")
    if args.share is not None and args.calibrate is not None:
        raise ConfigError("--share and --calibrate are mutually exclusive")
    if args.share is not None:
        mapping["share.fraction_a"] = repr(args.share)
        mapping.pop("share.calibrate", None)
    if args.calibrate is not None:
        mapping["share.calibrate"] = str(args.calibrate)
        mapping.pop("share.fraction_a", None)
    for attr, key in _PLATFORM_FLAGS.items():
        value = getattr(args, attr)
        if value is not None:
            mapping[key] = str(value)
    return mapping


def _cmd_run(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_mapping(_run_mapping(args))
    out_path = args.out or config.out_path
    report = run_experiment(config)
    if args.dump_taskgraph:
        from .workloads import REGISTRY

        runner = REGISTRY[config.workload](config)
        runner.run_hybrid(config.platform(), config.share)
        Path(args.dump_taskgraph).write_text(runner.last_task_graph.to_dot(), encoding="ascii")
    if out_path:
        write_report(report, out_path)
        if args.plot:
            from .plots import save_timeline_figure

            save_timeline_figure(report, Path(out_path).with_suffix(".png"))
        print(f"report written to {out_path}", file=sys.stderr)
    else:
        sys.stdout.write(report_json_text(report))
    return 0


def _cmd_suite(args: argparse.Namespace) -> int:
    mapping = load_config_file(args.config)
    suite = build_suite(mapping)
    rows = run_suite(suite)
    write_suite(rows, args.out)
    if args.plot:
        from .plots import save_suite_figure

        save_suite_figure(rows, Path(args.out).with_suffix(".png"))
    failures = [row for row in rows if row.error]
    for row in failures:
        print(f"{row.workload}: {row.error}", file=sys.stderr)
    print(f"suite table written to {args.out}", file=sys.stderr)
    if failures:
        first = failures[0].error or ""
        if first.startswith("OracleMismatch"):
            return 4
        if first.startswith("DataIOError"):
            return 3
        return 2
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    params = {}
    if args.bins is not None:
        params["bins"] = args.bins
    if args.density is not None:
        params["density"] = args.density
    if args.edge_factor is not None:
        params["edge_factor"] = args.edge_factor
    if args.p is not None:
        params["p"] = args.p
    dataset = generate_uar(args.kind, args.n, args.seed, **params)
    write_dataset(args.kind, dataset, args.out)
    print(f"dataset written to {args.out}", file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "suite":
            return _cmd_suite(args)
        return _cmd_gen(args)
    except OracleMismatch as exc:
        print(f"oracle failure: {exc}", file=sys.stderr)
        return 4
    except (DataIOError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HybridBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
