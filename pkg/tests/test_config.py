import pytest

from hybridbench.config import (
    BenchmarkSuite,
    ExperimentConfig,
    ShareSpec,
    parse_config_text,
)
from hybridbench.errors import ConfigError
from hybridbench.platform import Accounting


def test_parse_flat_keys():
    text = """
    # experiment
    workload.name = sort
    input.n = 1000          ; trailing comment
    input.seed = 42
    platform.device_b.throughput = 3.5
    """
    mapping = parse_config_text(text)
    assert mapping["workload.name"] == "sort"
    assert mapping["input.n"] == "1000"
    assert mapping["platform.device_b.throughput"] == "3.5"


def test_parse_rejects_bad_lines():
    with pytest.raises(ConfigError):
        parse_config_text("just a line\n")
    with pytest.raises(ConfigError):
        parse_config_text("a = 1\na = 2\n")
    with pytest.raises(ConfigError):
        parse_config_text("a =\n")


def base_mapping(**extra):
    mapping = {"workload.name": "hist", "input.n": "100", "input.seed": "1"}
    mapping.update(extra)
    return mapping


def test_experiment_from_mapping_defaults():
    cfg = ExperimentConfig.from_mapping(base_mapping())
    platform = cfg.platform()
    assert platform.device_a.throughput == 1.0
    assert platform.device_b.throughput == 3.0
    assert platform.accounting is Accounting.MODELED
    assert cfg.share.mode == "formula"


def test_unknown_workload_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(base_mapping(**{"workload.name": "fft"}))


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(base_mapping(**{"inputt.n": "9"}))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(base_mapping(**{"platform.gpu.count": "2"}))


def test_exactly_one_input_source():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(base_mapping(**{"input.path": "x.bin"}))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"workload.name": "hist"})
    cfg = ExperimentConfig.from_mapping({"workload.name": "hist", "input.path": "x.bin"})
    assert cfg.input_kind == "file"


def test_seed_required_for_generated_inputs():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"workload.name": "hist", "input.n": "10"})


def test_share_options_exclusive():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(
            base_mapping(**{"share.fraction_a": "0.5", "share.calibrate": "3"})
        )
    manual = ExperimentConfig.from_mapping(base_mapping(**{"share.fraction_a": "0.5"}))
    assert manual.share == ShareSpec("manual", fraction_a=0.5)
    cal = ExperimentConfig.from_mapping(base_mapping(**{"share.calibrate": "3"}))
    assert cal.share.mode == "calibrated" and cal.share.refinements == 3


def test_share_fraction_bounds():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(base_mapping(**{"share.fraction_a": "1.5"}))


def test_accounting_parse():
    cfg = ExperimentConfig.from_mapping(base_mapping(**{"platform.accounting": "measured"}))
    assert cfg.platform().accounting is Accounting.MEASURED
    bad = ExperimentConfig.from_mapping(base_mapping(**{"platform.accounting": "wallclock"}))
    with pytest.raises(ConfigError):
        bad.platform()


def test_echo_is_deterministic():
    cfg = ExperimentConfig.from_mapping(base_mapping())
    assert cfg.echo() == cfg.echo()
    assert cfg.echo()["workload.name"] == "hist"


def test_suite_repetitions_validated():
    cfg = ExperimentConfig.from_mapping(base_mapping())
    with pytest.raises(ConfigError):
        BenchmarkSuite((cfg,), repetitions=0)
