"""Work sharing: split fractions, calibration, two-sided execution, metrics.

The split fraction assigns `fraction_a` of the work to DeviceA so that,
under the linear cost model, both devices finish together. Gain compares
the hybrid time against the best pure single-device time; idle time is
the fraction of the run during which either device sits unused,
normalized over both devices so resource efficiency is 100 - idle%.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from time import perf_counter
from typing import Any, Protocol, Sequence, runtime_checkable

from .platform import (
    Device,
    DeviceId,
    Interval,
    Platform,
    Timeline,
    modeled_compute_time,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class ShareOrigin(Enum):
    FORMULA = "formula"
    CALIBRATED = "calibrated"
    MANUAL = "manual"


@dataclass(frozen=True)
class CalibrationProbe:
    """Solo probe times on each device plus the trace of calibration
    evaluations as (fraction, hybrid_time) pairs."""

    t_device_a: float
    t_device_b: float
    sample_size: float = 0.0
    refinement_steps: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if not (self.t_device_a > 0 and self.t_device_b > 0):
            raise ValueError("probe times must be > 0")
        for frac, _ in self.refinement_steps:
            if not 0.0 <= frac <= 1.0:
                raise ValueError(f"refinement fraction {frac} outside [0, 1]")

    def to_json_dict(self) -> dict:
        return {
            "t_device_a": self.t_device_a,
            "t_device_b": self.t_device_b,
            "sample_size": self.sample_size,
            "refinement_steps": [[f, t] for f, t in self.refinement_steps],
        }


@dataclass(frozen=True)
class WorkShare:
    """Share of the work assigned to DeviceA, with provenance."""

    fraction_a: float
    origin: ShareOrigin
    probe: CalibrationProbe | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.fraction_a <= 1.0:
            raise ValueError(f"fraction_a {self.fraction_a} outside [0, 1]")

    @classmethod
    def manual(cls, fraction_a: float) -> "WorkShare":
        return cls(fraction_a, ShareOrigin.MANUAL)

    def to_json_dict(self) -> dict:
        return {
            "fraction_a": self.fraction_a,
            "origin": self.origin.value,
            "probe": self.probe.to_json_dict() if self.probe else None,
        }


def split_fraction_formula(t_a: float, t_b: float) -> WorkShare:
    """Split so both devices finish together: fraction_a = t_b / (t_a + t_b),
    where t_a and t_b are solo runtimes of the same work on each device."""
    if not (t_a > 0 and t_b > 0):
        raise ValueError("solo times must be > 0")
    return WorkShare(t_b / (t_a + t_b), ShareOrigin.FORMULA, CalibrationProbe(t_a, t_b))


def formula_share(platform: Platform) -> WorkShare:
    """Formula split from device throughputs alone: fraction_a = s_a / (s_a + s_b)."""
    return split_fraction_formula(
        1.0 / platform.device_a.throughput, 1.0 / platform.device_b.throughput
    )


def calibrate(platform: Platform, probe_fn, sample: float, max_refinements: int) -> WorkShare:
    """Refine the formula split by golden-section search on the probed hybrid time.

    `probe_fn(device, work)` runs `work` units of the workload solo on the
    given device and returns its time; the hybrid time of a candidate
    fraction is the max of the two probed sides. The formula fraction is
    evaluated first and wins ties, so under a purely linear cost model the
    refinements never move the split.
    """
    if not sample > 0:
        raise ValueError("sample size must be > 0")
    if max_refinements < 0:
        raise ValueError("max_refinements must be >= 0")
    t_a = probe_fn(platform.device_a, sample)
    t_b = probe_fn(platform.device_b, sample)
    base = split_fraction_formula(t_a, t_b)

    def hybrid_time(frac: float) -> float:
        side_a = probe_fn(platform.device_a, frac * sample)
        side_b = probe_fn(platform.device_b, (1.0 - frac) * sample)
        return max(side_a, side_b)

    steps: list[tuple[float, float]] = [(base.fraction_a, hybrid_time(base.fraction_a))]
    best_f, best_t = steps[0]

    lo, hi = 0.0, 1.0
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1 = f2 = None
    budget = max_refinements
    while budget > 0:
        if f1 is None:
            f1 = hybrid_time(x1)
            steps.append((x1, f1))
        elif f2 is None:
            f2 = hybrid_time(x2)
            steps.append((x2, f2))
        else:
            if f1 <= f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - _GOLDEN * (hi - lo)
                f1 = hybrid_time(x1)
                steps.append((x1, f1))
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + _GOLDEN * (hi - lo)
                f2 = hybrid_time(x2)
                steps.append((x2, f2))
        budget -= 1

    for frac, t in steps[1:]:
        if t < best_t:
            best_f, best_t = frac, t
    probe = CalibrationProbe(t_a, t_b, sample, tuple(steps))
    return WorkShare(best_f, ShareOrigin.CALIBRATED, probe)


def compute_gain(hybrid_time: float, pure_a_time: float, pure_b_time: float) -> float:
    """Percent improvement of the hybrid over the best pure device; negative
    when the hybrid loses."""
    if not (hybrid_time > 0 and pure_a_time > 0 and pure_b_time > 0):
        raise ValueError("all times must be > 0")
    return 100.0 * (1.0 - hybrid_time / min(pure_a_time, pure_b_time))


def compute_idle(timeline: Timeline) -> float:
    """Percent of the run during which a device is unused, averaged over
    both devices: 100 * sum(total_end - busy) / (2 * total_end)."""
    if not timeline.total_end > 0:
        raise ValueError("timeline is empty")
    total = timeline.total_end
    idle = (total - timeline.busy(DeviceId.A)) + (total - timeline.busy(DeviceId.B))
    return 100.0 * idle / (2.0 * total)


@dataclass(frozen=True)
class RunReport:
    """Metrics and provenance for one hybrid run.

    `gain_ratio` is the raw hybrid/best-pure ratio backing `gain_percent`.
    Baselines are None when the caller did not request solo re-runs.
    """

    workload: str
    unit: str
    dataset: str
    hybrid_time: float
    pure_a_time: float | None
    pure_b_time: float | None
    gain_percent: float | None
    gain_ratio: float | None
    idle_percent: float
    resource_efficiency_percent: float
    timeline: Timeline
    work_share: WorkShare | None
    config: dict[str, str] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.resource_efficiency_percent != 100.0 - self.idle_percent:
            raise ValueError("resource efficiency must equal 100 - idle_percent")
        if self.pure_a_time is not None and self.pure_b_time is not None:
            expected = compute_gain(self.hybrid_time, self.pure_a_time, self.pure_b_time)
            if self.gain_percent != expected:
                raise ValueError("gain_percent inconsistent with raw times")

    def to_json_dict(self) -> dict:
        return {
            "workload": self.workload,
            "unit": self.unit,
            "dataset": self.dataset,
            "hybrid_time": self.hybrid_time,
            "pure_a_time": self.pure_a_time,
            "pure_b_time": self.pure_b_time,
            "gain_percent": self.gain_percent,
            "gain_ratio": self.gain_ratio,
            "idle_percent": self.idle_percent,
            "resource_efficiency_percent": self.resource_efficiency_percent,
            "timeline": self.timeline.to_json_dict(),
            "work_share": self.work_share.to_json_dict() if self.work_share else None,
            "config": dict(sorted(self.config.items())),
            "extra": self.extra,
        }


def make_run_report(
    workload: str,
    unit: str,
    dataset: str,
    timeline: Timeline,
    work_share: WorkShare | None,
    pure_a_time: float | None = None,
    pure_b_time: float | None = None,
    hybrid_time: float | None = None,
    config: dict[str, str] | None = None,
    extra: dict[str, Any] | None = None,
) -> RunReport:
    if hybrid_time is None:
        hybrid_time = timeline.total_end
    gain = ratio = None
    if pure_a_time is not None and pure_b_time is not None:
        gain = compute_gain(hybrid_time, pure_a_time, pure_b_time)
        ratio = hybrid_time / min(pure_a_time, pure_b_time)
    idle = compute_idle(timeline)
    return RunReport(
        workload=workload,
        unit=unit,
        dataset=dataset,
        hybrid_time=hybrid_time,
        pure_a_time=pure_a_time,
        pure_b_time=pure_b_time,
        gain_percent=gain,
        gain_ratio=ratio,
        idle_percent=idle,
        resource_efficiency_percent=100.0 - idle,
        timeline=timeline,
        work_share=work_share,
        config=config or {},
        extra=extra or {},
    )


@runtime_checkable
class Partitionable(Protocol):
    """A workload splittable by a fraction into two independent parts.

    Correctness must be split-invariant: merge(run(a), run(b)) equals the
    single-device result for every fraction.
    """

    name: str
    unit: str

    def partition(self, fraction_a: float) -> tuple[Any, Any]: ...

    def work_units(self, part: Any) -> float: ...

    def run_part(self, device: Device, part: Any) -> Any: ...

    def merge(self, partials: Sequence[Any]) -> Any: ...


def two_sided_timeline(
    platform: Platform, work_a: float, work_b: float, label: str
) -> Timeline:
    """Modeled timeline of two concurrently executing sides."""
    ivs_a = []
    ivs_b = []
    if work_a > 0:
        ivs_a.append(Interval(0.0, modeled_compute_time(platform.device_a, work_a), label))
    if work_b > 0:
        ivs_b.append(Interval(0.0, modeled_compute_time(platform.device_b, work_b), label))
    return Timeline.build(ivs_a, ivs_b)


def run_workshared(
    platform: Platform,
    workload: Partitionable,
    share: WorkShare,
    *,
    baselines: bool = True,
    dataset: str = "",
    config: dict[str, str] | None = None,
    extra: dict[str, Any] | None = None,
) -> tuple[Any, RunReport]:
    """Execute the two partitions concurrently, merge, and report.

    The result is independent of the share; baselines, when requested,
    re-run the full input solo on each device rather than extrapolating.
    """
    part_a, part_b = workload.partition(share.fraction_a)
    work_a = workload.work_units(part_a)
    work_b = workload.work_units(part_b)

    if platform.modeled:
        with ThreadPoolExecutor(max_workers=2) as pool:
            fut_a = pool.submit(workload.run_part, platform.device_a, part_a)
            fut_b = pool.submit(workload.run_part, platform.device_b, part_b)
            partials = [fut_a.result(), fut_b.result()]
        timeline = two_sided_timeline(platform, work_a, work_b, workload.name)
    else:
        t0 = perf_counter()

        def timed(device: Device, part: Any) -> tuple[Any, float, float]:
            start = perf_counter()
            value = workload.run_part(device, part)
            return value, start - t0, perf_counter() - t0

        with ThreadPoolExecutor(max_workers=2) as pool:
            fut_a = pool.submit(timed, platform.device_a, part_a)
            fut_b = pool.submit(timed, platform.device_b, part_b)
            res_a, res_b = fut_a.result(), fut_b.result()
        partials = [res_a[0], res_b[0]]
        ivs_a = [Interval(res_a[1], res_a[2], workload.name)] if work_a > 0 else []
        ivs_b = [Interval(res_b[1], res_b[2], workload.name)] if work_b > 0 else []
        timeline = Timeline.build(ivs_a, ivs_b)

    result = workload.merge(partials)

    pure_a = pure_b = None
    if baselines:
        full_a, _ = workload.partition(1.0)
        _, full_b = workload.partition(0.0)
        pure_a = _solo_time(platform, platform.device_a, workload, full_a)
        pure_b = _solo_time(platform, platform.device_b, workload, full_b)

    report = make_run_report(
        workload=workload.name,
        unit=workload.unit,
        dataset=dataset,
        timeline=timeline,
        work_share=share,
        pure_a_time=pure_a,
        pure_b_time=pure_b,
        config=config,
        extra=extra,
    )
    return result, report


def _solo_time(
    platform: Platform, device: Device, workload: Partitionable, full_part: Any
) -> float:
    if platform.modeled:
        workload.run_part(device, full_part)
        return modeled_compute_time(device, workload.work_units(full_part))
    start = perf_counter()
    workload.run_part(device, full_part)
    return perf_counter() - start
