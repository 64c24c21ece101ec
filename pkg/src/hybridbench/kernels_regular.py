"""Regular, compute-bound hybrid kernels: histogram, sort, convolution,
bilateral filter.

All four are split-invariant: the merged two-sided result equals the
single-device result for every share (exactly for the integer kernels,
and bit-for-bit here even for the filters, since each output row is a
pure function of the source image regardless of which strip owns it).
Border policy for both filters is clamp-to-edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataIOError
from .platform import Device, Platform
from .worksharing import WorkShare, formula_share, run_workshared


# --------------------------------------------------------------------------
# images


@dataclass(frozen=True)
class Image:
    """Row-major pixel grid; uint8 for inputs, float64 for filter outputs."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def read_pgm(path: str | Path) -> Image:
    """Read a P2 (ASCII) or P5 (binary) PGM with maxval <= 255."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise DataIOError(f"cannot read image {path}: {exc}") from exc
    try:
        magic, fields, offset = _pgm_header(raw)
        width, height, maxval = fields
        if maxval <= 0 or maxval > 255:
            raise ValueError(f"unsupported maxval {maxval}")
        count = width * height
        if magic == b"P5":
            data = np.frombuffer(raw, dtype=np.uint8, count=count, offset=offset)
        else:
            values = raw[offset:].split()
            if len(values) < count:
                raise ValueError("truncated P2 payload")
            data = np.array([int(v) for v in values[:count]], dtype=np.uint8)
        return Image(data.reshape(height, width).copy())
    except Exception as exc:
        raise DataIOError(f"malformed PGM {path}: {exc}") from exc


def _pgm_header(raw: bytes) -> tuple[bytes, tuple[int, int, int], int]:
    if raw[:2] not in (b"P2", b"P5"):
        raise ValueError("not a P2/P5 PGM")
    magic = raw[:2]
    fields: list[int] = []
    i = 2
    while len(fields) < 3:
        while i < len(raw) and raw[i : i + 1].isspace():
            i += 1
        if i < len(raw) and raw[i : i + 1] == b"#":
            while i < len(raw) and raw[i : i + 1] != b"\n":
                i += 1
            continue
        j = i
        while j < len(raw) and not raw[j : j + 1].isspace():
            j += 1
        fields.append(int(raw[i:j]))
        i = j
    i += 1  # single whitespace after maxval
    return magic, (fields[0], fields[1], fields[2]), i


def write_pgm(image: Image, path: str | Path, binary: bool = True) -> None:
    """Write maxval-255 PGM; float pixels are rounded and clamped to [0, 255]."""
    data = np.asarray(image.pixels)
    if data.dtype != np.uint8:
        data = np.clip(np.rint(data), 0, 255).astype(np.uint8)
    header = f"{'P5' if binary else 'P2'}\n{image.width} {image.height}\n255\n"
    try:
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            if binary:
                fh.write(data.tobytes())
            else:
                for row in data:
                    fh.write((" ".join(str(v) for v in row) + "\n").encode("ascii"))
    except OSError as exc:
        raise DataIOError(f"cannot write image {path}: {exc}") from exc


# --------------------------------------------------------------------------
# histogram


@dataclass(frozen=True)
class HistogramResult:
    bins: np.ndarray
    bin_count: int

    def __post_init__(self) -> None:
        if self.bin_count < 1 or len(self.bins) != self.bin_count:
            raise ValueError("bins length must equal bin_count >= 1")


class HistogramWorkload:
    """Index-range split; each side merges per-worker private histograms,
    which reproduces atomic-increment semantics deterministically."""

    name = "hist"
    unit = "elements"

    def __init__(self, data: np.ndarray, bin_count: int):
        if bin_count < 1:
            raise ValueError("bin_count must be >= 1")
        data = np.asarray(data)
        if data.size and (data.min() < 0 or data.max() >= bin_count):
            raise ValueError("element outside bin domain")
        self.data = data
        self.bin_count = bin_count

    def partition(self, fraction_a: float):
        split = int(math.floor(fraction_a * self.data.size))
        return self.data[:split], self.data[split:]

    def work_units(self, part) -> float:
        return float(part.size)

    def run_part(self, device: Device, part) -> np.ndarray:
        counts = np.zeros(self.bin_count, dtype=np.int64)
        bounds = np.linspace(0, part.size, device.worker_count + 1).astype(int)
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            counts += np.bincount(part[lo:hi], minlength=self.bin_count)
        return counts

    def merge(self, partials: Sequence[np.ndarray]) -> HistogramResult:
        total = np.zeros(self.bin_count, dtype=np.int64)
        for partial in partials:
            total += partial
        return HistogramResult(total, self.bin_count)


def hybrid_histogram(
    data: np.ndarray, bin_count: int, platform: Platform, share: WorkShare | None = None
) -> HistogramResult:
    workload = HistogramWorkload(data, bin_count)
    share = share or formula_share(platform)
    result, _ = run_workshared(platform, workload, share, baselines=False)
    return result


# --------------------------------------------------------------------------
# sample sort

SORT_FANOUT = 64
SORT_HIST_CELLS = 256
SORT_MAX_DEPTH = 8


def _insertion_sort(a: np.ndarray) -> None:
    for i in range(1, a.size):
        v = a[i]
        j = i - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v


def _quantile_splitters(chunk: np.ndarray, counts: np.ndarray, lo, hi) -> np.ndarray:
    """Equal-mass splitter values from a value-cell histogram."""
    span = float(hi) - float(lo)
    cum = np.cumsum(counts)
    n = chunk.size
    masses = np.arange(1, SORT_FANOUT) * (n / SORT_FANOUT)
    cells = np.searchsorted(cum, masses, side="left")
    splitters = float(lo) + (cells + 1) * (span / SORT_HIST_CELLS)
    return np.unique(splitters)


def _cell_indices(chunk: np.ndarray, lo, hi) -> np.ndarray:
    span = float(hi) - float(lo)
    idx = ((chunk - float(lo)) * (SORT_HIST_CELLS / span)).astype(np.int64)
    return np.clip(idx, 0, SORT_HIST_CELLS - 1)


def _partition_bins(chunk: np.ndarray, splitters: np.ndarray) -> list[np.ndarray]:
    bin_ids = np.searchsorted(splitters, chunk, side="right")
    order = np.argsort(bin_ids, kind="stable")
    arranged = chunk[order]
    counts = np.bincount(bin_ids, minlength=splitters.size + 1)
    bounds = np.concatenate([[0], np.cumsum(counts)])
    return [arranged[bounds[i] : bounds[i + 1]] for i in range(counts.size)]


def _sort_bin(chunk: np.ndarray, leaf: int, depth: int, use_insertion: bool) -> np.ndarray:
    if chunk.size <= 1:
        return chunk
    if chunk.size <= leaf:
        if use_insertion:
            out = chunk.copy()
            _insertion_sort(out)
            return out
        return np.sort(chunk, kind="quicksort")
    if depth >= SORT_MAX_DEPTH:
        return np.sort(chunk, kind="quicksort")
    lo, hi = chunk.min(), chunk.max()
    if lo == hi:
        return chunk
    counts = np.bincount(_cell_indices(chunk, lo, hi), minlength=SORT_HIST_CELLS)
    splitters = _quantile_splitters(chunk, counts, lo, hi)
    if splitters.size == 0:
        return np.sort(chunk, kind="quicksort")
    return np.concatenate(
        [_sort_bin(b, leaf, depth + 1, use_insertion) for b in _partition_bins(chunk, splitters)]
    )


def sample_sort_hybrid(
    data: np.ndarray,
    platform: Platform,
    leaf_a: int = 2048,
    leaf_b: int = 32,
    share: WorkShare | None = None,
) -> tuple[np.ndarray, float, float]:
    """Splitter-based sort with hybrid binning; returns (sorted, work_a, work_b).

    The top-level value histogram is computed as two merged partial
    histograms (one per device side). Splitters sit at the histogram's
    equal-mass quantiles; the smallest bins are assigned to DeviceA until
    its work share is met, the rest to DeviceB. DeviceA finishes its bins
    with a standard comparison sort at leaf_a; DeviceB keeps splitting to
    leaf_b and insertion-sorts those leaves.
    """
    if not leaf_a >= leaf_b >= 2:
        raise ValueError("need leaf_a >= leaf_b >= 2")
    arr = np.asarray(data)
    fraction = (share or formula_share(platform)).fraction_a
    n = arr.size
    if n <= 1:
        return arr.copy(), float(n), 0.0
    if n <= leaf_a:
        return np.sort(arr, kind="quicksort"), float(n), 0.0
    lo, hi = arr.min(), arr.max()
    if lo == hi:
        return arr.copy(), float(n), 0.0

    # hybrid histogram of value cells: one partial per device, merged
    split = int(math.floor(fraction * n))
    cells = _cell_indices(arr, lo, hi)
    counts = np.bincount(cells[:split], minlength=SORT_HIST_CELLS) + np.bincount(
        cells[split:], minlength=SORT_HIST_CELLS
    )
    splitters = _quantile_splitters(arr, counts, lo, hi)
    if splitters.size == 0:
        return np.sort(arr, kind="quicksort"), float(n), 0.0
    bins = _partition_bins(arr, splitters)

    # smallest bins go to DeviceA; the cut is the prefix minimizing the
    # two sides' normalized finish time max(w_a/f, w_b/(1-f))
    sizes = np.array([b.size for b in bins])
    order_asc = np.argsort(sizes, kind="stable")
    prefix = np.concatenate([[0.0], np.cumsum(sizes[order_asc])])
    if fraction <= 0.0:
        cut = 0
    elif fraction >= 1.0:
        cut = len(bins)
    else:
        finish = np.maximum(prefix / fraction, (n - prefix) / (1.0 - fraction))
        cut = int(np.argmin(finish))
    on_a = np.zeros(len(bins), dtype=bool)
    on_a[order_asc[:cut]] = True

    sorted_bins: list[np.ndarray] = [np.empty(0, dtype=arr.dtype)] * len(bins)

    def side(device_is_a: bool) -> None:
        leaf = leaf_a if device_is_a else leaf_b
        for i, b in enumerate(bins):
            if on_a[i] == device_is_a:
                sorted_bins[i] = _sort_bin(b, leaf, 1, use_insertion=not device_is_a)

    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=2) as pool:
        fa = pool.submit(side, True)
        fb = pool.submit(side, False)
        fa.result(), fb.result()

    work_a = float(sizes[on_a].sum())
    return np.concatenate(sorted_bins), work_a, float(n) - work_a


def hybrid_sort(
    data: np.ndarray,
    platform: Platform,
    leaf_a: int = 2048,
    leaf_b: int = 32,
    share: WorkShare | None = None,
) -> np.ndarray:
    out, _, _ = sample_sort_hybrid(data, platform, leaf_a, leaf_b, share)
    return out


# --------------------------------------------------------------------------
# convolution


@dataclass(frozen=True)
class FilterKernel:
    """Square odd-sided weight stencil."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = self.weights
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] % 2 == 0:
            raise ValueError("kernel must be square with odd side")
        if not np.isfinite(w).all():
            raise ValueError("kernel weights must be finite")

    @property
    def radius(self) -> int:
        return self.weights.shape[0] // 2

    @classmethod
    def delta(cls, radius: int) -> "FilterKernel":
        w = np.zeros((2 * radius + 1, 2 * radius + 1))
        w[radius, radius] = 1.0
        return cls(w)

    @classmethod
    def gaussian(cls, radius: int, sigma: float | None = None) -> "FilterKernel":
        sigma = sigma or max(radius / 2.0, 0.5)
        ax = np.arange(-radius, radius + 1, dtype=np.float64)
        g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma**2))
        return cls(g / g.sum())


def convolve_rows(
    pixels: np.ndarray, kernel: FilterKernel, row0: int, row1: int
) -> np.ndarray:
    """Correlation of rows [row0, row1) against the full source image with
    clamp-to-edge borders: out(p) = sum_k w_k * I(clamp(p + offset_k))."""
    height, width = pixels.shape
    r = kernel.radius
    n_rows = row1 - row0
    if n_rows <= 0:
        return np.zeros((0, width))
    rows_idx = np.clip(np.arange(row0 - r, row1 + r), 0, height - 1)
    slab = pixels[rows_idx].astype(np.float64)
    slab = np.pad(slab, ((0, 0), (r, r)), mode="edge")
    out = np.zeros((n_rows, width))
    for dy in range(2 * r + 1):
        for dx in range(2 * r + 1):
            weight = kernel.weights[dy, dx]
            if weight == 0.0:
                continue
            out += weight * slab[dy : dy + n_rows, dx : dx + width]
    return out


class ConvolutionWorkload:
    """Horizontal strip split at row floor(share * height); halo rows are
    read from the shared source image."""

    name = "conv"
    unit = "neighbor accumulations"

    def __init__(self, image: Image, kernel: FilterKernel):
        self.image = image
        self.kernel = kernel
        self._per_row = image.width * (2 * kernel.radius + 1) ** 2

    def partition(self, fraction_a: float):
        split = int(math.floor(fraction_a * self.image.height))
        return (0, split), (split, self.image.height)

    def work_units(self, part) -> float:
        return float((part[1] - part[0]) * self._per_row)

    def run_part(self, device: Device, part) -> np.ndarray:
        return convolve_rows(self.image.pixels, self.kernel, part[0], part[1])

    def merge(self, partials: Sequence[np.ndarray]) -> Image:
        return Image(np.vstack(partials))


def hybrid_convolve(
    image: Image, kernel: FilterKernel, platform: Platform, share: WorkShare | None = None
) -> Image:
    workload = ConvolutionWorkload(image, kernel)
    share = share or formula_share(platform)
    result, _ = run_workshared(platform, workload, share, baselines=False)
    return result


# --------------------------------------------------------------------------
# bilateral filter


@dataclass(frozen=True)
class BilateralLut:
    """Precomputed Gaussian weights: one spatial entry per stencil offset in
    row-major order, one range entry per absolute intensity difference."""

    spatial_weights: np.ndarray
    range_weights: np.ndarray
    sigma_s: float
    sigma_r: float
    radius: int

    def __post_init__(self) -> None:
        side = 2 * self.radius + 1
        if self.spatial_weights.shape != (side * side,):
            raise ValueError("spatial table must have (2r+1)^2 entries")
        if self.range_weights.shape != (256,):
            raise ValueError("range table must have 256 entries")
        for table in (self.spatial_weights, self.range_weights):
            if not ((table > 0) & (table <= 1.0)).all():
                raise ValueError("lut weights must lie in (0, 1]")

    @property
    def entry_count(self) -> int:
        return self.spatial_weights.size + self.range_weights.size


def build_bilateral_lut(radius: int, sigma_s: float, sigma_r: float) -> BilateralLut:
    """spatial[d] = exp(-|offset|^2 / 2 sigma_s^2), range[k] = exp(-k^2 / 2 sigma_r^2)."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if not (sigma_s > 0 and sigma_r > 0):
        raise ValueError("sigmas must be > 0")
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    dist2 = ax[:, None] ** 2 + ax[None, :] ** 2
    spatial = np.exp(-dist2 / (2.0 * sigma_s**2)).ravel()
    diffs = np.arange(256, dtype=np.float64)
    rng = np.exp(-(diffs**2) / (2.0 * sigma_r**2))
    return BilateralLut(spatial, rng, sigma_s, sigma_r, radius)


def bilateral_rows(
    pixels: np.ndarray, lut: BilateralLut, row0: int, row1: int
) -> np.ndarray:
    """Normalized spatial x range weighted mean over the stencil, rows
    [row0, row1), clamp-to-edge. Intensities must be integers in [0, 255]."""
    height, width = pixels.shape
    r = lut.radius
    n_rows = row1 - row0
    if n_rows <= 0:
        return np.zeros((0, width))
    rows_idx = np.clip(np.arange(row0 - r, row1 + r), 0, height - 1)
    slab = pixels[rows_idx].astype(np.int64)
    slab = np.pad(slab, ((0, 0), (r, r)), mode="edge")
    center = slab[r : r + n_rows, r : r + width]
    num = np.zeros((n_rows, width))
    den = np.zeros((n_rows, width))
    side = 2 * r + 1
    for dy in range(side):
        for dx in range(side):
            neighbor = slab[dy : dy + n_rows, dx : dx + width]
            w = lut.spatial_weights[dy * side + dx] * lut.range_weights[
                np.abs(neighbor - center)
            ]
            num += w * neighbor
            den += w
    return num / den


class BilateralApplyWorkload:
    """Work-shared LUT application; the LUT build itself is a separate task."""

    name = "bilat"
    unit = "neighbor accumulations"

    def __init__(self, image: Image, lut: BilateralLut):
        self.image = image
        self.lut = lut
        self._per_row = image.width * (2 * lut.radius + 1) ** 2

    def partition(self, fraction_a: float):
        split = int(math.floor(fraction_a * self.image.height))
        return (0, split), (split, self.image.height)

    def work_units(self, part) -> float:
        return float((part[1] - part[0]) * self._per_row)

    def run_part(self, device: Device, part) -> np.ndarray:
        return bilateral_rows(self.image.pixels, self.lut, part[0], part[1])

    def merge(self, partials: Sequence[np.ndarray]) -> Image:
        return Image(np.vstack(partials))


def hybrid_bilateral(
    image: Image, lut: BilateralLut, platform: Platform, share: WorkShare | None = None
) -> Image:
    workload = BilateralApplyWorkload(image, lut)
    share = share or formula_share(platform)
    result, _ = run_workshared(platform, workload, share, baselines=False)
    return result
