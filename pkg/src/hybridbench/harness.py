"""Experiment orchestration and report emission.

One experiment runs the hybrid kernel, asserts its correctness oracle,
re-runs both solo baselines, and produces a RunReport. A suite runs a
list of experiments sequentially (timing hygiene), averages gain and
idle over repetitions, and emits a CSV table plus JSON. Reports carry no
timestamps, so fixed config + seed + modeled accounting gives
byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

from .config import BenchmarkSuite, ExperimentConfig, WORKLOAD_NAMES
from .errors import DataIOError, HybridBenchError
from .worksharing import RunReport, make_run_report
from .workloads import REGISTRY, SUITE_DEFAULTS


def run_experiment(config: ExperimentConfig) -> RunReport:
    """Run one workload hybrid, gate on its oracle, and report."""
    platform = config.platform()
    runner = REGISTRY[config.workload](config)
    result, timeline, share, extra = runner.run_hybrid(platform, config.share)
    runner.verify(result)
    pure_a = runner.solo_time(platform, platform.device_a)
    pure_b = runner.solo_time(platform, platform.device_b)
    return make_run_report(
        workload=runner.name,
        unit=runner.unit,
        dataset=runner.dataset_label(),
        timeline=timeline,
        work_share=share,
        pure_a_time=pure_a,
        pure_b_time=pure_b,
        config=config.echo(),
        extra={**runner.input_meta(), **extra},
    )


def report_json_text(report: RunReport) -> str:
    return json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n"


def write_report(report: RunReport, path: str | Path) -> None:
    try:
        Path(path).write_text(report_json_text(report), encoding="ascii")
    except OSError as exc:
        raise DataIOError(f"cannot write report {path}: {exc}") from exc


@dataclass(frozen=True)
class SuiteRow:
    workload: str
    dataset: str
    gain_percent: float | None
    idle_percent: float | None
    repetitions: int
    error: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "workload": self.workload,
            "dataset": self.dataset,
            "gain_percent": self.gain_percent,
            "idle_percent": self.idle_percent,
            "repetitions": self.repetitions,
            "error": self.error,
        }


def run_suite(suite: BenchmarkSuite) -> list[SuiteRow]:
    """Run every experiment `repetitions` times; failures are recorded in
    their row and the suite continues."""
    rows: list[SuiteRow] = []
    for config in suite.experiments:
        gains: list[float] = []
        idles: list[float] = []
        dataset = ""
        error = None
        try:
            for _ in range(suite.repetitions):
                report = run_experiment(config)
                dataset = report.dataset
                if report.gain_percent is not None:
                    gains.append(report.gain_percent)
                idles.append(report.idle_percent)
        except HybridBenchError as exc:
            error = f"{type(exc).__name__}: {exc}"
        if error is not None:
            rows.append(SuiteRow(config.workload, dataset, None, None, suite.repetitions, error))
        else:
            rows.append(
                SuiteRow(
                    config.workload,
                    dataset,
                    sum(gains) / len(gains) if gains else None,
                    sum(idles) / len(idles),
                    suite.repetitions,
                )
            )
    return rows


def suite_csv_text(rows: list[SuiteRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["workload", "dataset", "gain_percent", "idle_percent"])
    for row in rows:
        writer.writerow(
            [
                row.workload,
                row.dataset,
                "" if row.gain_percent is None else repr(row.gain_percent),
                "" if row.idle_percent is None else repr(row.idle_percent),
            ]
        )
    return buf.getvalue()


def write_suite(rows: list[SuiteRow], path: str | Path) -> None:
    path = Path(path)
    try:
        path.write_text(suite_csv_text(rows), encoding="ascii")
        summary = {"rows": [row.to_json_dict() for row in rows]}
        path.with_suffix(".json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="ascii"
        )
    except OSError as exc:
        raise DataIOError(f"cannot write suite table {path}: {exc}") from exc


def build_suite(mapping: dict[str, str]) -> BenchmarkSuite:
    """Build a suite from a flat config mapping.

    `suite.workloads` (comma list, default: all nine) and
    `suite.repetitions` select the runs; `platform.*` applies to every
    experiment; `<workload>.<key>` overrides that workload's input
    parameters (n, seed, bins, density, radius, ...).
    """
    from .errors import ConfigError

    names_value = mapping.get("suite.workloads", ",".join(WORKLOAD_NAMES))
    names = [n.strip() for n in names_value.split(",") if n.strip()]
    for name in names:
        if name not in WORKLOAD_NAMES:
            raise ConfigError(f"unknown workload {name!r} in suite.workloads")
    repetitions = int(mapping.get("suite.repetitions", "1"))
    seed_default = mapping.get("suite.seed", "42")

    platform_keys = {k: v for k, v in mapping.items() if k.startswith("platform.")}
    known_prefixes = {"suite", "platform"} | set(WORKLOAD_NAMES)
    for key in mapping:
        prefix = key.split(".", 1)[0]
        if prefix not in known_prefixes:
            raise ConfigError(f"unknown suite config key {key!r}")

    experiments = []
    for name in names:
        values = dict(SUITE_DEFAULTS[name])
        values.setdefault("seed", seed_default)
        for key, value in mapping.items():
            if key.startswith(name + "."):
                values[key.split(".", 1)[1]] = value
        exp_mapping = {"workload.name": name}
        exp_mapping.update(platform_keys)
        for pkey, pvalue in values.items():
            exp_mapping[f"input.{pkey}"] = pvalue
        experiments.append(ExperimentConfig.from_mapping(exp_mapping))
    return BenchmarkSuite(tuple(experiments), repetitions)
