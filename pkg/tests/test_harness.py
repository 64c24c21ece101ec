import json

import pytest

from hybridbench.config import BenchmarkSuite, ExperimentConfig
from hybridbench.datasets import gen_csr
from hybridbench.errors import OracleMismatch
from hybridbench.harness import (
    build_suite,
    report_json_text,
    run_experiment,
    run_suite,
    suite_csv_text,
    write_suite,
)
from hybridbench.kernels_irregular import save_matrix_market
from hybridbench.workloads import REGISTRY, SUITE_DEFAULTS
from hybridbench.config import WORKLOAD_NAMES


def make_config(workload: str, n: int, seed: int = 42, **extra) -> ExperimentConfig:
    mapping = {"workload.name": workload, "input.n": str(n), "input.seed": str(seed)}
    mapping.update({k: str(v) for k, v in extra.items()})
    return ExperimentConfig.from_mapping(mapping)


def test_registry_covers_all_workloads():
    assert set(REGISTRY) == set(WORKLOAD_NAMES)
    assert set(SUITE_DEFAULTS) == set(WORKLOAD_NAMES)


def test_sort_experiment_gain_near_linear_prediction():
    report = run_experiment(make_config("sort", 100_000))
    assert report.gain_percent == pytest.approx(25.0, abs=2.0)
    assert report.idle_percent <= 5.0
    assert report.work_share.fraction_a == 0.25


def test_hist_share_zero_gain_exactly_zero():
    report = run_experiment(make_config("hist", 50_000, **{"share.fraction_a": "0"}))
    assert report.gain_percent == 0.0
    assert report.idle_percent == 50.0


def test_spmv_file_report_echoes_dims(tmp_path):
    m = gen_csr(40, 40, seed=9, density=0.1)
    path = tmp_path / "m.mtx"
    save_matrix_market(m, path)
    cfg = ExperimentConfig.from_mapping(
        {"workload.name": "spmv", "input.path": str(path)}
    )
    report = run_experiment(cfg)
    assert report.extra["rows"] == 40
    assert report.extra["cols"] == 40
    assert report.extra["nnz"] == m.nnz
    assert report.dataset == "m.mtx"


def test_calibrated_share_recorded():
    report = run_experiment(make_config("hist", 10_000, **{"share.calibrate": "6"}))
    assert report.work_share.origin.value == "calibrated"
    assert report.work_share.fraction_a == 0.25
    assert len(report.work_share.probe.refinement_steps) == 7


def test_report_identities_hold():
    report = run_experiment(make_config("conv", 64))
    assert report.resource_efficiency_percent == 100.0 - report.idle_percent
    ratio = report.hybrid_time / min(report.pure_a_time, report.pure_b_time)
    assert report.gain_percent == pytest.approx(100.0 * (1.0 - ratio))
    assert report.gain_ratio == pytest.approx(ratio)


def test_oracle_gate_blocks_reports(monkeypatch):
    cfg = make_config("hist", 1000)
    runner_cls = REGISTRY["hist"]

    def sabotage(self, result):
        raise OracleMismatch("forced failure")

    monkeypatch.setattr(runner_cls, "verify", sabotage)
    with pytest.raises(OracleMismatch):
        run_experiment(cfg)


def test_experiment_determinism_byte_identical():
    for workload, n in (("sort", 20_000), ("cc", 512), ("lbm", 8)):
        cfg = make_config(workload, n)
        first = report_json_text(run_experiment(cfg))
        second = report_json_text(run_experiment(cfg))
        assert first == second


def test_measured_accounting_runs():
    report = run_experiment(
        make_config("hist", 50_000, **{"platform.accounting": "measured"})
    )
    assert report.hybrid_time > 0
    assert report.timeline.total_end > 0


def test_suite_two_workloads_three_reps():
    suite = BenchmarkSuite(
        (make_config("hist", 5000), make_config("conv", 48)), repetitions=3
    )
    rows = run_suite(suite)
    assert len(rows) == 2
    csv_text = suite_csv_text(rows)
    lines = csv_text.strip().splitlines()
    assert lines[0] == "workload,dataset,gain_percent,idle_percent"
    assert len(lines) == 3
    assert rows[0].repetitions == 3
    assert rows[0].error is None


def test_suite_empty_emits_header_only():
    rows = run_suite(BenchmarkSuite((), repetitions=1))
    assert suite_csv_text(rows).strip() == "workload,dataset,gain_percent,idle_percent"


def test_suite_records_failures_and_continues(monkeypatch):
    def sabotage(self, result):
        raise OracleMismatch("forced")

    monkeypatch.setattr(REGISTRY["hist"], "verify", sabotage)
    suite = BenchmarkSuite((make_config("hist", 1000), make_config("conv", 32)), 1)
    rows = run_suite(suite)
    assert rows[0].error is not None and rows[0].error.startswith("OracleMismatch")
    assert rows[1].error is None


def test_build_suite_defaults_and_overrides(tmp_path):
    mapping = {
        "suite.workloads": "hist,conv",
        "suite.repetitions": "2",
        "hist.n": "4000",
        "conv.n": "40",
        "platform.device_b.throughput": "2.0",
    }
    suite = build_suite(mapping)
    assert suite.repetitions == 2
    assert [c.workload for c in suite.experiments] == ["hist", "conv"]
    assert suite.experiments[0].n == 4000
    assert suite.experiments[1].platform().device_b.throughput == 2.0


def test_write_suite_emits_csv_and_json(tmp_path):
    rows = run_suite(BenchmarkSuite((make_config("hist", 2000),), 1))
    out = tmp_path / "table.csv"
    write_suite(rows, out)
    assert out.exists()
    summary = json.loads((tmp_path / "table.json").read_text())
    assert summary["rows"][0]["workload"] == "hist"


def test_lr_and_lbm_reject_manual_share():
    from hybridbench.errors import ConfigError

    with pytest.raises(ConfigError):
        run_experiment(make_config("lr", 500, **{"share.fraction_a": "0.5"}))
    with pytest.raises(ConfigError):
        run_experiment(make_config("lbm", 6, **{"share.fraction_a": "0.5"}))


def test_cc_manual_fraction_respected():
    report = run_experiment(make_config("cc", 512, **{"share.fraction_a": "0.25"}))
    assert report.extra["prefix_size"] == 128
    assert report.work_share.fraction_a == 0.25
