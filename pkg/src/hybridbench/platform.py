"""Two-device platform model with deterministic cost accounting.

A Platform pairs two Devices (each a throughput in work-units per modeled
second backed by a host thread pool) with a TransferLink. Under modeled
accounting every reported time is a pure function of the inputs, so runs
are bit-reproducible; measured accounting wraps kernel sections in wall
clocks and is only ever informational.

Work-sharing deliberately does not charge the link: the split formula
assumes intermediate communication is hidden by compute. Task graphs do
charge it on cross-device edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple

from .errors import StructuralError


class DeviceId(str, Enum):
    A = "device_a"
    B = "device_b"

    def other(self) -> "DeviceId":
        return DeviceId.B if self is DeviceId.A else DeviceId.A


class Accounting(Enum):
    MODELED = "modeled"
    MEASURED = "measured"


@dataclass(frozen=True)
class Device:
    """One side of the platform: throughput in work-units per modeled second."""

    id: DeviceId
    throughput: float
    worker_count: int = 1

    def __post_init__(self) -> None:
        if not self.throughput > 0:
            raise ValueError(f"device throughput must be > 0, got {self.throughput}")
        if self.worker_count < 1:
            raise ValueError(f"worker_count must be >= 1, got {self.worker_count}")


@dataclass(frozen=True)
class TransferLink:
    """Inter-device link: bandwidth in bytes per modeled second plus a
    fixed per-transfer latency."""

    bandwidth: float
    latency: float = 0.0

    def __post_init__(self) -> None:
        if not self.bandwidth > 0:
            raise ValueError(f"link bandwidth must be > 0, got {self.bandwidth}")
        if self.latency < 0:
            raise ValueError(f"link latency must be >= 0, got {self.latency}")


@dataclass(frozen=True)
class Platform:
    device_a: Device
    device_b: Device
    link: TransferLink
    accounting: Accounting = Accounting.MODELED

    def __post_init__(self) -> None:
        if self.device_a.id is not DeviceId.A or self.device_b.id is not DeviceId.B:
            raise ValueError("device_a must have id DeviceId.A and device_b DeviceId.B")

    def device(self, device_id: DeviceId) -> Device:
        return self.device_a if device_id is DeviceId.A else self.device_b

    @property
    def devices(self) -> tuple[Device, Device]:
        return (self.device_a, self.device_b)

    @property
    def modeled(self) -> bool:
        return self.accounting is Accounting.MODELED

    @classmethod
    def build(
        cls,
        throughput_a: float = 1.0,
        throughput_b: float = 3.0,
        workers_a: int = 4,
        workers_b: int = 4,
        bandwidth: float = 6e9,
        latency: float = 0.0,
        accounting: Accounting = Accounting.MODELED,
    ) -> "Platform":
        return cls(
            Device(DeviceId.A, throughput_a, workers_a),
            Device(DeviceId.B, throughput_b, workers_b),
            TransferLink(bandwidth, latency),
            accounting,
        )


class Interval(NamedTuple):
    start: float
    end: float
    label: str = ""


def _validated(intervals: Iterable[Interval]) -> tuple[Interval, ...]:
    out = tuple(sorted((Interval(*iv) for iv in intervals), key=lambda iv: (iv.start, iv.end)))
    for iv in out:
        if iv.start < 0 or iv.end < iv.start:
            raise StructuralError(f"bad interval {iv}")
    for cur, nxt in zip(out, out[1:]):
        if nxt.start < cur.end:
            raise StructuralError(f"overlapping intervals on one device: {cur} / {nxt}")
    return out


@dataclass(frozen=True)
class Timeline:
    """Per-device busy intervals plus the completion time of the run.

    Intervals within one device are sorted and non-overlapping; a device
    busy in parallel slots is represented by coalesced spans.
    """

    device_a: tuple[Interval, ...] = ()
    device_b: tuple[Interval, ...] = ()
    total_end: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "device_a", _validated(self.device_a))
        object.__setattr__(self, "device_b", _validated(self.device_b))
        for iv in self.device_a + self.device_b:
            if iv.end > self.total_end + 1e-12:
                raise StructuralError(f"interval {iv} ends past total_end={self.total_end}")

    @classmethod
    def build(
        cls,
        device_a: Iterable[Interval] = (),
        device_b: Iterable[Interval] = (),
        total_end: float | None = None,
    ) -> "Timeline":
        a = _validated(device_a)
        b = _validated(device_b)
        if total_end is None:
            total_end = max((iv.end for iv in a + b), default=0.0)
        return cls(a, b, total_end)

    def intervals(self, device_id: DeviceId) -> tuple[Interval, ...]:
        return self.device_a if device_id is DeviceId.A else self.device_b

    def busy(self, device_id: DeviceId) -> float:
        return sum(iv.end - iv.start for iv in self.intervals(device_id))

    def to_json_dict(self) -> dict:
        return {
            "device_a": [[iv.start, iv.end, iv.label] for iv in self.device_a],
            "device_b": [[iv.start, iv.end, iv.label] for iv in self.device_b],
            "total_end": self.total_end,
        }


def modeled_compute_time(device: Device, work: float) -> float:
    """Modeled seconds to process `work` work-units: work / throughput."""
    if work < 0:
        raise ValueError(f"work must be >= 0, got {work}")
    return work / device.throughput


def modeled_transfer_time(link: TransferLink, nbytes: float) -> float:
    """Modeled seconds to move `nbytes` across the link; zero bytes still
    pays the latency."""
    if nbytes < 0:
        raise ValueError(f"byte count must be >= 0, got {nbytes}")
    return link.latency + nbytes / link.bandwidth


def merge_timelines(a: Timeline, b: Timeline) -> Timeline:
    """Union of two timelines from the same run epoch; overlap within one
    device is a structural error."""
    return Timeline.build(
        a.device_a + b.device_a,
        a.device_b + b.device_b,
        total_end=max(a.total_end, b.total_end),
    )
