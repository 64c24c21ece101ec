"""Experiment and suite configuration.

Config files are flat `section.key = value` text; `#` and `;` start
comments. The platform section carries `platform.device_a.throughput`,
`platform.device_a.workers`, the same for device_b,
`platform.link.bandwidth_bytes_per_s`, `platform.link.latency_s`, and
`platform.accounting = modeled|measured`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DataIOError
from .platform import Accounting, Device, DeviceId, Platform, TransferLink

WORKLOAD_NAMES = ("sort", "hist", "spmv", "spgemm", "conv", "bilat", "lr", "cc", "lbm")

# workload-specific input.* keys, all optional
INPUT_PARAM_KEYS = (
    "bins",
    "density",
    "radius",
    "sigma_s",
    "sigma_r",
    "edge_factor",
    "p",
    "model",
    "tau",
    "steps",
    "path_b",
    "leaf_a",
    "leaf_b",
)

PLATFORM_DEFAULTS = {
    "platform.device_a.throughput": "1.0",
    "platform.device_a.workers": "4",
    "platform.device_b.throughput": "3.0",
    "platform.device_b.workers": "4",
    "platform.link.bandwidth_bytes_per_s": "6e9",
    "platform.link.latency_s": "0.0",
    "platform.accounting": "modeled",
}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse `section.key = value` lines into a flat mapping."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_config_file(path: str | Path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def _to_int(mapping: dict[str, str], key: str) -> int:
    try:
        return int(mapping[key], 0)
    except ValueError as exc:
        raise ConfigError(f"{key}: not an integer ({mapping[key]!r})") from exc


def _to_float(mapping: dict[str, str], key: str) -> float:
    try:
        return float(mapping[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number ({mapping[key]!r})") from exc


@dataclass(frozen=True)
class ShareSpec:
    """How the work share is chosen: formula (default), manual fraction,
    or calibrated with a refinement budget."""

    mode: str = "formula"
    fraction_a: float | None = None
    refinements: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("formula", "manual", "calibrated"):
            raise ConfigError(f"unknown share mode {self.mode!r}")
        if self.mode == "manual":
            if self.fraction_a is None or not 0.0 <= self.fraction_a <= 1.0:
                raise ConfigError("manual share requires fraction_a in [0, 1]")
        if self.mode == "calibrated" and self.refinements < 0:
            raise ConfigError("calibration refinements must be >= 0")


@dataclass(frozen=True)
class ExperimentConfig:
    workload: str
    input_kind: str  # "uar" | "file"
    n: int | None = None
    seed: int | None = None
    path: str | None = None
    params: dict[str, str] = field(default_factory=dict)
    platform_values: dict[str, str] = field(default_factory=lambda: dict(PLATFORM_DEFAULTS))
    share: ShareSpec = field(default_factory=ShareSpec)
    out_path: str | None = None

    def __post_init__(self) -> None:
        if self.workload not in WORKLOAD_NAMES:
            raise ConfigError(f"unknown workload {self.workload!r}")
        if self.input_kind not in ("uar", "file"):
            raise ConfigError(f"unknown input kind {self.input_kind!r}")
        if self.input_kind == "uar":
            if self.path is not None:
                raise ConfigError("exactly one input source: both generator and path given")
            if self.n is None or self.n < 1:
                raise ConfigError("generated inputs need input.n >= 1")
            if self.seed is None:
                raise ConfigError("generated inputs need input.seed")
        else:
            if self.path is None:
                raise ConfigError("file inputs need input.path")
            if self.n is not None:
                raise ConfigError("exactly one input source: both path and n given")

    def platform(self) -> Platform:
        vals = self.platform_values
        accounting = vals["platform.accounting"].lower()
        if accounting not in ("modeled", "measured"):
            raise ConfigError(f"platform.accounting must be modeled|measured, got {accounting!r}")
        try:
            return Platform(
                Device(
                    DeviceId.A,
                    _to_float(vals, "platform.device_a.throughput"),
                    _to_int(vals, "platform.device_a.workers"),
                ),
                Device(
                    DeviceId.B,
                    _to_float(vals, "platform.device_b.throughput"),
                    _to_int(vals, "platform.device_b.workers"),
                ),
                TransferLink(
                    _to_float(vals, "platform.link.bandwidth_bytes_per_s"),
                    _to_float(vals, "platform.link.latency_s"),
                ),
                Accounting.MODELED if accounting == "modeled" else Accounting.MEASURED,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def param_float(self, name: str, default: float) -> float:
        if name in self.params:
            try:
                return float(self.params[name])
            except ValueError as exc:
                raise ConfigError(f"input.{name}: not a number") from exc
        return default

    def param_int(self, name: str, default: int) -> int:
        if name in self.params:
            try:
                return int(self.params[name], 0)
            except ValueError as exc:
                raise ConfigError(f"input.{name}: not an integer") from exc
        return default

    def echo(self) -> dict[str, str]:
        """Resolved configuration for the report, deterministic."""
        out = {"workload.name": self.workload, "input.kind": self.input_kind}
        if self.input_kind == "uar":
            out["input.n"] = str(self.n)
            out["input.seed"] = str(self.seed)
        else:
            out["input.path"] = str(self.path)
        for key, value in self.params.items():
            out[f"input.{key}"] = value
        out.update(self.platform_values)
        out["share.mode"] = self.share.mode
        if self.share.fraction_a is not None:
            out["share.fraction_a"] = repr(self.share.fraction_a)
        if self.share.mode == "calibrated":
            out["share.calibrate"] = str(self.share.refinements)
        return out

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "ExperimentConfig":
        unknown = [
            k
            for k in mapping
            if not (
                k.startswith("platform.")
                or k in ("workload.name", "input.kind", "input.n", "input.seed", "input.path", "output.path")
                or k in ("share.fraction_a", "share.calibrate")
                or (k.startswith("input.") and k.split(".", 1)[1] in INPUT_PARAM_KEYS)
            )
        ]
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "workload.name" not in mapping:
            raise ConfigError("missing workload.name")
        workload = mapping["workload.name"].lower()

        n = _to_int(mapping, "input.n") if "input.n" in mapping else None
        seed = _to_int(mapping, "input.seed") if "input.seed" in mapping else None
        path = mapping.get("input.path")
        kind = mapping.get("input.kind")
        if kind is None:
            kind = "file" if path is not None else "uar"

        params = {
            key.split(".", 1)[1]: value
            for key, value in mapping.items()
            if key.startswith("input.") and key.split(".", 1)[1] in INPUT_PARAM_KEYS
        }

        platform_values = dict(PLATFORM_DEFAULTS)
        for key, value in mapping.items():
            if key.startswith("platform."):
                if key not in PLATFORM_DEFAULTS:
                    raise ConfigError(f"unknown platform key {key!r}")
                platform_values[key] = value

        if "share.fraction_a" in mapping and "share.calibrate" in mapping:
            raise ConfigError("share.fraction_a and share.calibrate are mutually exclusive")
        if "share.fraction_a" in mapping:
            share = ShareSpec("manual", fraction_a=_to_float(mapping, "share.fraction_a"))
        elif "share.calibrate" in mapping:
            share = ShareSpec("calibrated", refinements=_to_int(mapping, "share.calibrate"))
        else:
            share = ShareSpec()

        return cls(
            workload=workload,
            input_kind=kind,
            n=n,
            seed=seed,
            path=path,
            params=params,
            platform_values=platform_values,
            share=share,
            out_path=mapping.get("output.path"),
        )


@dataclass(frozen=True)
class BenchmarkSuite:
    experiments: tuple[ExperimentConfig, ...]
    repetitions: int = 1

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ConfigError("suite repetitions must be >= 1")
