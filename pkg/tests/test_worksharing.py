import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import seq_histogram
from hybridbench.datasets import gen_hist_data
from hybridbench.kernels_regular import HistogramWorkload
from hybridbench.platform import (
    DeviceId,
    Interval,
    Platform,
    Timeline,
    modeled_compute_time,
)
from hybridbench.worksharing import (
    ShareOrigin,
    WorkShare,
    calibrate,
    compute_gain,
    compute_idle,
    formula_share,
    run_workshared,
    split_fraction_formula,
)

times = st.floats(min_value=1e-6, max_value=1e6)


def test_formula_examples():
    t = 7.3
    assert split_fraction_formula(3 * t, t).fraction_a == 0.25
    assert split_fraction_formula(t, t).fraction_a == 0.5
    assert split_fraction_formula(0.82, 0.18).fraction_a == pytest.approx(0.18)


def test_formula_rejects_nonpositive():
    with pytest.raises(ValueError):
        split_fraction_formula(0.0, 1.0)
    with pytest.raises(ValueError):
        split_fraction_formula(1.0, -2.0)


@given(t_a=times, t_b=times)
def test_formula_equalizes_finish_times(t_a, t_b):
    f = split_fraction_formula(t_a, t_b).fraction_a
    assert 0.0 <= f <= 1.0
    # side times under the linear model: f*t_a vs (1-f)*t_b; the rounding
    # of f propagates with slope t_b, so the tolerance scales with it
    assert f * t_a == pytest.approx((1 - f) * t_b, rel=1e-9, abs=1e-12 * max(t_a, t_b))


def test_workshare_bounds():
    with pytest.raises(ValueError):
        WorkShare.manual(1.5)
    with pytest.raises(ValueError):
        WorkShare.manual(-0.1)


def _linear_probe(device, work):
    return modeled_compute_time(device, work)


def test_calibrate_linear_model_keeps_formula(platform13):
    share = calibrate(platform13, _linear_probe, sample=1000.0, max_refinements=12)
    assert share.fraction_a == 0.25
    assert share.origin is ShareOrigin.CALIBRATED
    base_time = share.probe.refinement_steps[0][1]
    assert all(t >= base_time for _, t in share.probe.refinement_steps)


def test_calibrate_symmetric(platform11):
    share = calibrate(platform11, _linear_probe, sample=10.0, max_refinements=6)
    assert share.fraction_a == 0.5


def test_calibrate_zero_budget(platform13):
    share = calibrate(platform13, _linear_probe, sample=10.0, max_refinements=0)
    assert share.fraction_a == 0.25
    assert len(share.probe.refinement_steps) == 1


def test_calibrate_moves_off_formula_when_model_is_nonlinear(platform13):
    # DeviceA pays a fixed overhead, so the best fraction is below formula
    def probe(device, work):
        t = modeled_compute_time(device, work)
        return t + 5.0 if device.id is DeviceId.A and work > 0 else t

    share = calibrate(platform13, probe, sample=100.0, max_refinements=40)
    best_f = share.fraction_a
    assert best_f < 0.25
    hybrid = lambda f: max(probe(platform13.device_a, f * 100.0), probe(platform13.device_b, (1 - f) * 100.0))  # noqa: E731
    assert hybrid(best_f) <= hybrid(0.25)


def test_gain_examples():
    assert compute_gain(75.0, 100.0, 300.0) == 25.0
    assert compute_gain(100.0, 100.0, 120.0) == 0.0
    assert compute_gain(81.4, 100.0, 250.0) == pytest.approx(18.6)


def test_gain_negative_when_hybrid_loses():
    assert compute_gain(200.0, 100.0, 150.0) < 0


def test_gain_rejects_nonpositive():
    with pytest.raises(ValueError):
        compute_gain(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        compute_gain(1.0, -1.0, 1.0)


@given(t=times, other=times)
def test_gain_zero_when_hybrid_matches_best(t, other):
    assert compute_gain(t, t, t + other) == 0.0


def test_idle_examples():
    full = Timeline.build([Interval(0, 10)], [Interval(0, 10)])
    assert compute_idle(full) == 0.0
    half = Timeline.build([Interval(0, 10)], [])
    assert compute_idle(half) == 50.0
    partial = Timeline.build([Interval(0, 10)], [Interval(0, 8)])
    assert compute_idle(partial) == 10.0  # (0 + 2) / (2 * 10)


def test_idle_empty_timeline_rejected():
    with pytest.raises(ValueError):
        compute_idle(Timeline.build())


def test_idle_relabel_invariant():
    a = [Interval(0, 3), Interval(5, 6)]
    b = [Interval(0, 9)]
    t1 = Timeline.build(a, b)
    t2 = Timeline.build(b, a)
    assert compute_idle(t1) == compute_idle(t2)


def test_run_workshared_histogram_oracle(platform13):
    data = gen_hist_data(1_000_000, seed=42)
    workload = HistogramWorkload(data, 256)
    result, report = run_workshared(platform13, workload, WorkShare.manual(0.25))
    expected = np.bincount(data, minlength=256)
    assert np.array_equal(result.bins, expected)
    assert report.gain_percent == pytest.approx(25.0, abs=1e-9)
    assert report.pure_a_time == pytest.approx(1_000_000 / 1.0)
    assert report.pure_b_time == pytest.approx(1_000_000 / 3.0)


@pytest.mark.parametrize("fraction,device", [(0.0, "b"), (1.0, "a")])
def test_run_workshared_degenerate_split(platform13, fraction, device):
    data = gen_hist_data(5000, seed=3)
    workload = HistogramWorkload(data, 256)
    result, report = run_workshared(platform13, workload, WorkShare.manual(fraction))
    solo = workload.merge([workload.run_part(platform13.device(DeviceId.A), data)])
    assert np.array_equal(result.bins, solo.bins)
    # only one side busy
    busy_a = report.timeline.busy(DeviceId.A)
    busy_b = report.timeline.busy(DeviceId.B)
    assert (busy_a == 0.0) == (device == "b")
    assert (busy_b == 0.0) == (device == "a")
    assert report.idle_percent == 50.0


def test_formula_split_gives_zero_idle_and_gain_bound(platform13):
    data = gen_hist_data(300_000, seed=9)
    workload = HistogramWorkload(data, 256)
    share = formula_share(platform13)
    assert share.fraction_a == 0.25  # s_a / (s_a + s_b)
    _, report = run_workshared(platform13, workload, share)
    # one element quantum of slack at most
    assert report.idle_percent <= 100.0 / data.size
    # gain bound: 100 * s_slow / (s_fast + s_slow)
    assert report.gain_percent == pytest.approx(25.0, abs=1e-3)
    assert report.resource_efficiency_percent == 100.0 - report.idle_percent


def test_run_workshared_split_invariance_small(platform13):
    data = gen_hist_data(4096, seed=5, bins=64)
    workload = HistogramWorkload(data, 64)
    expected = seq_histogram(data, 64)
    for frac in np.linspace(0, 1, 11):
        result, _ = run_workshared(platform13, workload, WorkShare.manual(float(frac)), baselines=False)
        assert np.array_equal(result.bins, expected)


def test_report_serialization_roundtrip(platform13):
    data = gen_hist_data(1000, seed=1)
    workload = HistogramWorkload(data, 256)
    _, report = run_workshared(platform13, workload, formula_share(platform13))
    doc = report.to_json_dict()
    assert doc["resource_efficiency_percent"] == 100.0 - doc["idle_percent"]
    assert doc["work_share"]["origin"] == "formula"
    assert set(doc["timeline"]) == {"device_a", "device_b", "total_end"}
