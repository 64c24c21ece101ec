"""Figure rendering for reports: a device-occupancy chart per run and a
gain/idle bar chart per suite, written next to the machine-readable
output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import DataIOError
from .platform import DeviceId
from .worksharing import RunReport


def save_timeline_figure(report: RunReport, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 2.6))
    colors = {DeviceId.A: "#4878d0", DeviceId.B: "#ee854a"}
    for y, device_id in ((1, DeviceId.A), (0, DeviceId.B)):
        spans = [(iv.start, iv.end - iv.start) for iv in report.timeline.intervals(device_id)]
        if spans:
            ax.broken_barh(spans, (y + 0.1, 0.8), color=colors[device_id])
    ax.set_yticks([0.5, 1.5])
    ax.set_yticklabels(["device_b", "device_a"])
    ax.set_xlim(0, max(report.timeline.total_end, 1e-12))
    ax.set_xlabel("modeled seconds")
    gain = "" if report.gain_percent is None else f"  gain {report.gain_percent:.1f}%"
    ax.set_title(f"{report.workload}  idle {report.idle_percent:.1f}%{gain}")
    fig.tight_layout()
    _save(fig, path)


def save_suite_figure(rows, path: str | Path) -> None:
    done = [r for r in rows if r.idle_percent is not None]
    fig, ax = plt.subplots(figsize=(max(6, 0.9 * len(done) + 2), 3.2))
    xs = range(len(done))
    gains = [r.gain_percent if r.gain_percent is not None else 0.0 for r in done]
    idles = [r.idle_percent for r in done]
    width = 0.4
    ax.bar([x - width / 2 for x in xs], gains, width, label="gain %", color="#4878d0")
    ax.bar([x + width / 2 for x in xs], idles, width, label="idle %", color="#ee854a")
    ax.set_xticks(list(xs))
    ax.set_xticklabels([r.workload for r in done])
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.legend()
    ax.set_title("hybrid gain and idle time per workload")
    fig.tight_layout()
    _save(fig, path)


def _save(fig, path: str | Path) -> None:
    try:
        fig.savefig(path, dpi=120)
    except OSError as exc:
        raise DataIOError(f"cannot write figure {path}: {exc}") from exc
    finally:
        plt.close(fig)
