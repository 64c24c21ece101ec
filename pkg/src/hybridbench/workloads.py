"""Workload runners: bind each kernel to input handling, share
resolution, modeled accounting, and a correctness gate.

Each runner re-runs the full input solo on each device for the
baselines, and its `verify` is asserted before any report is emitted.
Work-shared kernels ride the generic partition/run/merge engine; the
task-parallel ones (bilateral LUT feed, list-ranking pipeline, LBM
function split, CC merge) model their phases as small task graphs.
"""

from __future__ import annotations

import math
from pathlib import Path
from time import perf_counter
from typing import Any, Callable

import numpy as np
import scipy.ndimage
import scipy.sparse
import scipy.sparse.csgraph

from . import datasets
from .config import ExperimentConfig, ShareSpec
from .errors import ConfigError, OracleMismatch
from .kernels_irregular import (
    CsrMatrix,
    Lattice,
    LinkedListArr,
    LBM_DEVICE_A_FUNCS,
    LBM_DEVICE_B_FUNCS,
    cc_hybrid_with_stats,
    cc_balanced_fraction,
    cc_work_units,
    lattice_mass,
    lbm_assemble,
    lbm_collide_stream,
    lbm_moments,
    lbm_step_single,
    list_rank_with_stats,
    load_edge_list,
    load_matrix_market,
    shiloach_vishkin,
    bfs_prefix_components,
    SpgemmWorkload,
    SpmvWorkload,
    spmv_preprocess,
)
from .kernels_regular import (
    ConvolutionWorkload,
    FilterKernel,
    HistogramWorkload,
    Image,
    build_bilateral_lut,
    bilateral_rows,
    read_pgm,
    sample_sort_hybrid,
)
from .platform import Device, DeviceId, Platform, Timeline, modeled_compute_time
from .rng import mix_seed, uniform_floats
from .taskgraph import Edge, Task, TaskGraph, execute_schedule, schedule_with_assignment, schedule_to_timeline
from .worksharing import (
    Partitionable,
    ShareOrigin,
    WorkShare,
    calibrate,
    formula_share,
    run_workshared,
    two_sided_timeline,
)


def resolve_share(platform: Platform, spec: ShareSpec, total_units: float) -> WorkShare:
    if spec.mode == "manual":
        return WorkShare.manual(spec.fraction_a)
    if spec.mode == "calibrated":
        probe = lambda device, work: modeled_compute_time(device, work)  # noqa: E731
        return calibrate(platform, probe, max(total_units, 1.0), spec.refinements)
    return formula_share(platform)


def _timed_solo(platform: Platform, device: Device, run: Callable[[], Any], units: float) -> float:
    """Execute the full-input solo run and return its time: modeled from
    work units under modeled accounting, wall-clock otherwise."""
    if platform.modeled:
        run()
        return modeled_compute_time(device, units)
    t0 = perf_counter()
    run()
    return perf_counter() - t0


def _labels_equivalent(a: np.ndarray, b: np.ndarray) -> bool:
    """Same partition up to label renaming."""
    if a.shape != b.shape:
        return False
    _, ca = np.unique(a, return_inverse=True)
    _, cb = np.unique(b, return_inverse=True)
    # first-occurrence canonical form
    def canon(c):
        seen: dict[int, int] = {}
        out = np.empty_like(c)
        for i, v in enumerate(c):
            out[i] = seen.setdefault(int(v), len(seen))
        return out

    return np.array_equal(canon(ca), canon(cb))


class WorkloadRunner:
    name = ""
    unit = ""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.last_task_graph: TaskGraph | None = None

    def dataset_label(self) -> str:
        if self.cfg.input_kind == "uar":
            return f"uar:n={self.cfg.n},seed={self.cfg.seed}"
        return Path(self.cfg.path).name

    def input_meta(self) -> dict[str, Any]:
        return {}

    def run_hybrid(
        self, platform: Platform, spec: ShareSpec
    ) -> tuple[Any, Timeline, WorkShare | None, dict[str, Any]]:
        raise NotImplementedError

    def solo_time(self, platform: Platform, device: Device) -> float:
        raise NotImplementedError

    def verify(self, result: Any) -> None:
        raise NotImplementedError


class _WorkSharedRunner(WorkloadRunner):
    """Runners backed by the generic partition/run/merge engine."""

    workload: Partitionable

    def _total_units(self) -> float:
        full, _ = self.workload.partition(1.0)
        return self.workload.work_units(full)

    def run_hybrid(self, platform, spec):
        share = resolve_share(platform, spec, self._total_units())
        result, report = run_workshared(platform, self.workload, share, baselines=False)
        part_a, part_b = self.workload.partition(share.fraction_a)
        units_a = self.workload.work_units(part_a)
        units_b = self.workload.work_units(part_b)
        self.last_task_graph = TaskGraph(
            [
                Task("side_a", units_a, units_a, f"{self.name} on device_a"),
                Task("side_b", units_b, units_b, f"{self.name} on device_b"),
                Task("merge", 0.0, 0.0, "merge partials"),
            ],
            [Edge("side_a", "merge"), Edge("side_b", "merge")],
        )
        return result, report.timeline, share, self._extra(share)

    def _extra(self, share: WorkShare) -> dict[str, Any]:
        return {}

    def solo_time(self, platform, device):
        if device.id is DeviceId.A:
            full, _ = self.workload.partition(1.0)
        else:
            _, full = self.workload.partition(0.0)
        return _timed_solo(
            platform,
            device,
            lambda: self.workload.run_part(device, full),
            self.workload.work_units(full),
        )


# --------------------------------------------------------------------------


class SortRunner(WorkloadRunner):
    name = "sort"
    unit = "elements"

    def __init__(self, cfg: ExperimentConfig):
        super().__init__(cfg)
        if cfg.input_kind == "uar":
            self.data = datasets.gen_sort_data(cfg.n, cfg.seed)
        else:
            self.data = datasets.read_raw_u32(cfg.path)
        self.leaf_a = cfg.param_int("leaf_a", 2048)
        self.leaf_b = cfg.param_int("leaf_b", 32)

    def input_meta(self):
        return {"n": int(self.data.size), "leaf_a": self.leaf_a, "leaf_b": self.leaf_b}

    def run_hybrid(self, platform, spec):
        share = resolve_share(platform, spec, float(self.data.size))
        out, work_a, work_b = sample_sort_hybrid(
            self.data, platform, self.leaf_a, self.leaf_b, share
        )
        timeline = two_sided_timeline(platform, work_a, work_b, self.name)
        self.last_task_graph = TaskGraph(
            [
                Task("bin", work_a + work_b, work_a + work_b, "hybrid histogram binning"),
                Task("sort_a", work_a, work_a, "sort small bins"),
                Task("sort_b", work_b, work_b, "split and sort large bins"),
                Task("concat", 0.0, 0.0, "concatenate bins"),
            ],
            [
                Edge("bin", "sort_a"),
                Edge("bin", "sort_b"),
                Edge("sort_a", "concat"),
                Edge("sort_b", "concat"),
            ],
        )
        return out, timeline, share, {"work_a": work_a, "work_b": work_b}

    def solo_time(self, platform, device):
        return _timed_solo(
            platform, device, lambda: np.sort(self.data, kind="quicksort"), float(self.data.size)
        )

    def verify(self, result):
        if not np.array_equal(result, np.sort(self.data)):
            raise OracleMismatch("sort output differs from comparison-sort oracle")


class HistRunner(_WorkSharedRunner):
    name = "hist"
    unit = "elements"

    def __init__(self, cfg: ExperimentConfig):
        super().__init__(cfg)
        bins = cfg.param_int("bins", 256)
        if cfg.input_kind == "uar":
            data = datasets.gen_hist_data(cfg.n, cfg.seed, bins)
        else:
            data = datasets.read_raw_u32(cfg.path)
        try:
            self.workload = HistogramWorkload(data, bins)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        self.bins = bins

    def input_meta(self):
        return {"n": int(self.workload.data.size), "bins": self.bins}

    def verify(self, result):
        values, counts = np.unique(self.workload.data, return_counts=True)
        expected = np.zeros(self.bins, dtype=np.int64)
        expected[values] = counts
        if not np.array_equal(result.bins, expected):
            raise OracleMismatch("histogram differs from sequential oracle")
        if int(result.bins.sum()) != int(self.workload.data.size):
            raise OracleMismatch("histogram total-count conservation violated")


class SpmvRunner(_WorkSharedRunner):
    name = "spmv"
    unit = "nonzeros"

    def __init__(self, cfg: ExperimentConfig):
        super().__init__(cfg)
        if cfg.input_kind == "uar":
            density = cfg.param_float("density", 8.0 / cfg.n)
            self.matrix = datasets.gen_csr(cfg.n, cfg.n, cfg.seed, density)
        else:
            self.matrix = load_matrix_market(cfg.path)
        seed = cfg.seed if cfg.seed is not None else 0
        self.x = 2.0 * uniform_floats(mix_seed(seed, 0xDEC0), self.matrix.cols) - 1.0
        self.prep = None  # set on run, depends on platform
        self.workload = None

    def _ensure_prep(self, platform):
        if self.prep is None:
            self.prep = spmv_preprocess(self.matrix, platform)
            self.workload = SpmvWorkload(self.prep, self.x)

    def run_hybrid(self, platform, spec):
        self._ensure_prep(platform)
        return super().run_hybrid(platform, spec)

    def solo_time(self, platform, device):
        self._ensure_prep(platform)
        return super().solo_time(platform, device)

    def _extra(self, share):
        split, _ = self.workload.partition(share.fraction_a)
        return {"split_row": int(split[1])}

    def input_meta(self):
        return {"rows": self.matrix.rows, "cols": self.matrix.cols, "nnz": self.matrix.nnz}

    def verify(self, result):
        m = self.matrix
        sp = scipy.sparse.csr_matrix((m.values, m.col_idx, m.row_ptr), shape=(m.rows, m.cols))
        expected = sp @ self.x
        if not np.allclose(result, expected, rtol=1e-6, atol=1e-9):
            raise OracleMismatch("SpMV result differs from sparse mat-vec oracle")


class SpgemmRunner(_WorkSharedRunner):
    name = "spgemm"
    unit = "flops"

    def __init__(self, cfg: ExperimentConfig):
        super().__init__(cfg)
        if cfg.input_kind == "uar":
            density = cfg.param_float("density", 8.0 / cfg.n)
            self.a = datasets.gen_csr(cfg.n, cfg.n, cfg.seed, density)
            self.b = datasets.gen_csr(cfg.n, cfg.n, mix_seed(cfg.seed, 0xB), density)
        else:
            self.a = load_matrix_market(cfg.path)
            path_b = cfg.params.get("path_b")
            self.b = load_matrix_market(path_b) if path_b else self.a
        try:
            self.workload = SpgemmWorkload(self.a, self.b)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def input_meta(self):
        return {
            "rows": self.a.rows,
            "cols": self.b.cols,
            "nnz_a": self.a.nnz,
            "nnz_b": self.b.nnz,
        }

    def verify(self, result: CsrMatrix):
        sp_a = scipy.sparse.csr_matrix(
            (self.a.values, self.a.col_idx, self.a.row_ptr), shape=(self.a.rows, self.a.cols)
        )
        sp_b = scipy.sparse.csr_matrix(
            (self.b.values, self.b.col_idx, self.b.row_ptr), shape=(self.b.rows, self.b.cols)
        )
        expected = sp_a @ sp_b
        mine = scipy.sparse.csr_matrix(
            (result.values, result.col_idx, result.row_ptr), shape=(result.rows, result.cols)
        )
        diff = abs(mine - expected)
        scale = max(1.0, abs(expected).max() if expected.nnz else 1.0)
        if diff.nnz and diff.max() > 1e-6 * scale:
            raise OracleMismatch("SpGEMM result differs from sparse product oracle")


class ConvRunner(_WorkSharedRunner):
    name = "conv"
    unit = "neighbor accumulations"

    def __init__(self, cfg: ExperimentConfig):
        super().__init__(cfg)
        if cfg.input_kind == "uar":
            self.image = datasets.gen_image(cfg.n, cfg.seed)
        else:
            self.image = read_pgm(cfg.path)
        radius = cfg.param_int("radius", 3)
        self.kernel = FilterKernel.gaussian(radius, cfg.param_float("sigma_s", radius / 2.0))
        self.workload = ConvolutionWorkload(self.image, self.kernel)

    def input_meta(self):
        return {
            "width": self.image.width,
            "height": self.image.height,
            "kernel_side": 2 * self.kernel.radius + 1,
        }

    def _extra(self, share):
        split = int(math.floor(share.fraction_a * self.image.height))
        return {"rows_device_a": split, "rows_device_b": self.image.height - split}

    def verify(self, result: Image):
        expected = scipy.ndimage.correlate(
            self.image.pixels.astype(np.float64), self.kernel.weights, mode="nearest"
        )
        if not np.allclose(result.pixels, expected, rtol=1e-6, atol=1e-9):
            raise OracleMismatch("convolution differs from reference correlate oracle")


def _bilateral_direct(pixels: np.ndarray, radius: int, sigma_s: float, sigma_r: float) -> np.ndarray:
    """Gate oracle recomputing the exponentials per pixel (no tables)."""
    height, width = pixels.shape
    rows_idx = np.clip(np.arange(-radius, height + radius), 0, height - 1)
    slab = pixels[rows_idx].astype(np.float64)
    slab = np.pad(slab, ((0, 0), (radius, radius)), mode="edge")
    center = slab[radius : radius + height, radius : radius + width]
    num = np.zeros((height, width))
    den = np.zeros((height, width))
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            nb = slab[dy + radius : dy + radius + height, dx + radius : dx + radius + width]
            w = np.exp(-(dy * dy + dx * dx) / (2.0 * sigma_s**2)) * np.exp(
                -((nb - center) ** 2) / (2.0 * sigma_r**2)
            )
            num += w * nb
            den += w
    return num / den


class BilatRunner(WorkloadRunner):
    name = "bilat"
    unit = "neighbor accumulations"

    def __init__(self, cfg: ExperimentConfig):
        super().__init__(cfg)
        if cfg.input_kind == "uar":
            self.image = datasets.gen_image(cfg.n, cfg.seed)
        else:
            self.image = read_pgm(cfg.path)
        self.radius = cfg.param_int("radius", 5)
        self.sigma_s = cfg.param_float("sigma_s", max(self.radius / 2.0, 0.5))
        self.sigma_r = cfg.param_float("sigma_r", 40.0)

    def input_meta(self):
        return {
            "width": self.image.width,
            "height": self.image.height,
            "radius": self.radius,
        }

    def _apply_units(self, rows: int) -> float:
        return float(rows * self.image.width * (2 * self.radius + 1) ** 2)

    def run_hybrid(self, platform, spec):
        total = self._apply_units(self.image.height)
        share = resolve_share(platform, spec, total)
        split = int(math.floor(share.fraction_a * self.image.height))
        height = self.image.height
        lut_units = float((2 * self.radius + 1) ** 2 + 256)
        units_a = self._apply_units(split)
        units_b = self._apply_units(height - split)
        lut_bytes = ((2 * self.radius + 1) ** 2 + 256) * 8.0

        graph = TaskGraph(
            [
                Task("lut", lut_units, lut_units, "precompute filter tables"),
                Task("apply_a", units_a, units_a, "filter rows on device_a"),
                Task("apply_b", units_b, units_b, "filter rows on device_b"),
                Task("assemble", 0.0, 0.0, "stack strips"),
            ],
            [
                Edge("lut", "apply_a", lut_bytes),
                Edge("lut", "apply_b", lut_bytes),
                Edge("apply_a", "assemble", split * self.image.width * 8.0),
                Edge("apply_b", "assemble", 0.0),
            ],
        )
        assignment = {
            "lut": DeviceId.A,
            "apply_a": DeviceId.A,
            "apply_b": DeviceId.B,
            "assemble": DeviceId.B,
        }
        schedule = schedule_with_assignment(graph, platform, assignment)
        pixels = self.image.pixels
        bodies = {
            "lut": lambda deps: build_bilateral_lut(self.radius, self.sigma_s, self.sigma_r),
            "apply_a": lambda deps: bilateral_rows(pixels, deps["lut"], 0, split),
            "apply_b": lambda deps: bilateral_rows(pixels, deps["lut"], split, height),
            "assemble": lambda deps: Image(np.vstack([deps["apply_a"], deps["apply_b"]])),
        }
        results, timeline = execute_schedule(graph, schedule, bodies, platform)
        self.last_task_graph = graph
        return results["assemble"], timeline, share, {"rows_device_a": split}

    def solo_time(self, platform, device):
        units = self._apply_units(self.image.height) + (2 * self.radius + 1) ** 2 + 256

        def run():
            lut = build_bilateral_lut(self.radius, self.sigma_s, self.sigma_r)
            bilateral_rows(self.image.pixels, lut, 0, self.image.height)

        return _timed_solo(platform, device, run, units)

    def verify(self, result: Image):
        expected = _bilateral_direct(self.image.pixels, self.radius, self.sigma_s, self.sigma_r)
        if not np.allclose(result.pixels, expected, rtol=1e-5, atol=1e-8):
            raise OracleMismatch("bilateral output differs from table-free oracle")


class LrRunner(WorkloadRunner):
    name = "lr"
    unit = "node visits"

    def __init__(self, cfg: ExperimentConfig):
        super().__init__(cfg)
        if cfg.input_kind == "file":
            raise ConfigError("lr has no input file format; use the uar generator")
        self.lst = datasets.gen_list(cfg.n, cfg.seed)
        self.seed = cfg.seed

    def input_meta(self):
        return {"n": int(self.lst.succ.size)}

    def run_hybrid(self, platform, spec):
        if spec.mode == "manual":
            raise ConfigError("lr is task parallel and takes no manual share")
        ranks, stats = list_rank_with_stats(self.lst, platform, self.seed)
        tasks: list[Task] = []
        edges: list[Edge] = []
        assignment: dict[str, DeviceId] = {}
        prev_fis = None
        for r, size in enumerate(stats.round_sizes):
            gen, fis = f"gen{r}", f"fis{r}"
            bits_cost = max(size / 64.0, 1.0)  # one u64 draw yields 64 bits
            tasks.append(Task(gen, bits_cost, bits_cost, "random bits"))
            tasks.append(Task(fis, float(size), float(size), "independent-set splice"))
            assignment[gen] = DeviceId.A
            assignment[fis] = DeviceId.B
            edges.append(Edge(gen, fis, size / 8.0))
            if prev_fis:
                edges.append(Edge(prev_fis, fis))
            prev_fis = fis
        hj_cost = float(max(stats.reduced_size, 1))
        tasks.append(Task("rank", hj_cost, hj_cost, "sublist ranking"))
        assignment["rank"] = DeviceId.B
        if prev_fis:
            edges.append(Edge(prev_fis, "rank"))
        ext_cost = float(stats.removed_total)
        tasks.append(Task("extend", ext_cost, ext_cost, "extend ranks to removed nodes"))
        assignment["extend"] = DeviceId.B
        edges.append(Edge("rank", "extend"))

        graph = TaskGraph(tasks, edges)
        schedule = schedule_with_assignment(graph, platform, assignment)
        timeline = schedule_to_timeline(schedule)
        self.last_task_graph = graph
        extra = {
            "fis_rounds": stats.fis_rounds,
            "reduced_size": stats.reduced_size,
            "sublist_count": stats.sublist_count,
        }
        return ranks, timeline, None, extra

    def solo_time(self, platform, device):
        return _timed_solo(
            platform, device, lambda: _sequential_ranks(self.lst), float(self.lst.succ.size)
        )

    def verify(self, result):
        if not np.array_equal(result, _sequential_ranks(self.lst)):
            raise OracleMismatch("list ranks differ from pointer-chasing oracle")


def _sequential_ranks(lst: LinkedListArr) -> np.ndarray:
    ranks = np.zeros(lst.succ.size, dtype=np.int64)
    cur, r = lst.head, 0
    succ = lst.succ
    while cur != -1:
        ranks[cur] = r
        r += 1
        cur = int(succ[cur])
    return ranks


class CcRunner(WorkloadRunner):
    name = "cc"
    unit = "adjacency entries + vertices"

    def __init__(self, cfg: ExperimentConfig):
        super().__init__(cfg)
        if cfg.input_kind == "uar":
            model = cfg.params.get("model", "rmat")
            if model == "gnp" or "p" in cfg.params:
                self.graph = datasets.gen_graph_gnp(cfg.n, cfg.seed, cfg.param_float("p", 2.0 / cfg.n))
            elif model == "rmat":
                self.graph = datasets.gen_graph_rmat(cfg.n, cfg.seed, cfg.param_int("edge_factor", 8))
            else:
                raise ConfigError(f"unknown cc model {model!r}")
        else:
            self.graph = load_edge_list(cfg.path)

    def input_meta(self):
        return {"n": self.graph.n, "edges": self.graph.edge_count}

    def run_hybrid(self, platform, spec):
        if spec.mode == "manual":
            fraction = spec.fraction_a
            origin_share = WorkShare.manual(fraction)
        else:
            fraction = cc_balanced_fraction(self.graph, platform)
            origin_share = WorkShare(fraction, ShareOrigin.FORMULA)
        labels, stats = cc_hybrid_with_stats(self.graph, platform, fraction)
        bfs_work, sv_work, merge_work = cc_work_units(self.graph, stats.prefix_size)
        graph = TaskGraph(
            [
                Task("bfs", bfs_work, bfs_work, "BFS on vertex prefix"),
                Task("sv", sv_work, sv_work, "hook and jump on suffix"),
                Task("merge", merge_work, merge_work, "union-find over cross edges"),
            ],
            [
                Edge("bfs", "merge", stats.prefix_size * 8.0),
                Edge("sv", "merge", 0.0),
            ],
        )
        assignment = {"bfs": DeviceId.A, "sv": DeviceId.B, "merge": DeviceId.B}
        schedule = schedule_with_assignment(graph, platform, assignment)
        timeline = schedule_to_timeline(schedule)
        self.last_task_graph = graph
        extra = {
            "v1_fraction": fraction,
            "prefix_size": stats.prefix_size,
            "cross_edges": stats.cross_edges,
            "sv_rounds": stats.sv_rounds,
        }
        return labels, timeline, origin_share, extra

    def solo_time(self, platform, device):
        units = float(self.graph.n + 2 * self.graph.edge_count)
        if device.id is DeviceId.A:
            run = lambda: bfs_prefix_components(self.graph, self.graph.n)  # noqa: E731
        else:
            run = lambda: shiloach_vishkin(self.graph)  # noqa: E731
        return _timed_solo(platform, device, run, units)

    def verify(self, result):
        g = self.graph
        data = np.ones(g.col_idx.size, dtype=np.int8)
        adj = scipy.sparse.csr_matrix((data, g.col_idx, g.row_ptr), shape=(g.n, g.n))
        _, expected = scipy.sparse.csgraph.connected_components(adj, directed=False)
        if not _labels_equivalent(result, expected):
            raise OracleMismatch("component labels differ from reference oracle")


class LbmRunner(WorkloadRunner):
    name = "lbm"
    unit = "cell-function updates"

    def __init__(self, cfg: ExperimentConfig):
        super().__init__(cfg)
        if cfg.input_kind == "file":
            raise ConfigError("lbm lattices are generated from config only")
        self.tau = cfg.param_float("tau", 0.8)
        self.steps = cfg.param_int("steps", 4)
        if self.steps < 1:
            raise ConfigError("lbm needs input.steps >= 1")
        self.lattice = datasets.gen_lattice(cfg.n, cfg.seed, self.tau)

    def input_meta(self):
        nx, ny, nz = self.lattice.dims
        return {"dims": [nx, ny, nz], "tau": self.tau, "steps": self.steps}

    def run_hybrid(self, platform, spec):
        if spec.mode == "manual":
            raise ConfigError("lbm is task parallel and takes no manual share")
        cells = float(np.prod(self.lattice.dims))
        moments_cost = 2.0 * cells
        low_cost = float(len(LBM_DEVICE_A_FUNCS)) * cells
        high_cost = float(len(LBM_DEVICE_B_FUNCS)) * cells
        field_bytes = cells * 8.0

        tasks: list[Task] = []
        edges: list[Edge] = []
        assignment: dict[str, DeviceId] = {}
        bodies: dict[str, Any] = {}
        initial = self.lattice
        tau = self.tau
        for s in range(self.steps):
            m, lo, hi, asm = f"moments{s}", f"flow{s}", f"fhigh{s}", f"assemble{s}"
            tasks += [
                Task(m, moments_cost, moments_cost, "density and velocity"),
                Task(lo, low_cost, low_cost, "functions 0..3 collide+stream"),
                Task(hi, high_cost, high_cost, "functions 4..18 collide+stream"),
                Task(asm, 0.0, 0.0, "stack distributions"),
            ]
            assignment.update({m: DeviceId.B, lo: DeviceId.A, hi: DeviceId.B, asm: DeviceId.B})
            edges += [
                Edge(m, lo, 4.0 * field_bytes),
                Edge(m, hi, 0.0),
                Edge(lo, asm, len(LBM_DEVICE_A_FUNCS) * field_bytes),
                Edge(hi, asm, 0.0),
            ]
            if s > 0:
                prev = f"assemble{s - 1}"
                edges += [Edge(prev, m, 0.0), Edge(prev, lo, len(LBM_DEVICE_A_FUNCS) * field_bytes)]

            def moments_body(deps, _s=s):
                lat = initial if _s == 0 else deps[f"assemble{_s - 1}"]
                return lat, lbm_moments(lat.f)

            def low_body(deps, _m=m):
                lat, mom = deps[_m]
                return lbm_collide_stream(lat.f, mom, tau, LBM_DEVICE_A_FUNCS)

            def high_body(deps, _m=m):
                lat, mom = deps[_m]
                return lbm_collide_stream(lat.f, mom, tau, LBM_DEVICE_B_FUNCS)

            def assemble_body(deps, _lo=lo, _hi=hi):
                return lbm_assemble(deps[_lo] + deps[_hi], tau)

            bodies.update({m: moments_body, lo: low_body, hi: high_body, asm: assemble_body})

        graph = TaskGraph(tasks, edges)
        schedule = schedule_with_assignment(graph, platform, assignment)
        results, timeline = execute_schedule(graph, schedule, bodies, platform)
        self.last_task_graph = graph
        return results[f"assemble{self.steps - 1}"], timeline, None, {}

    def solo_time(self, platform, device):
        cells = float(np.prod(self.lattice.dims))
        units = self.steps * (2.0 + 19.0) * cells

        def run():
            lat = self.lattice
            for _ in range(self.steps):
                lat = lbm_step_single(lat)

        return _timed_solo(platform, device, run, units)

    def verify(self, result: Lattice):
        lat = self.lattice
        for _ in range(self.steps):
            lat = lbm_step_single(lat)
        if not np.array_equal(result.f, lat.f):
            raise OracleMismatch("hybrid LBM state differs from single-device steps")
        m0, m1 = lattice_mass(self.lattice), lattice_mass(result)
        if abs(m1 - m0) > 1e-10 * abs(m0) * self.steps:
            raise OracleMismatch("LBM mass not conserved")


REGISTRY: dict[str, type[WorkloadRunner]] = {
    "sort": SortRunner,
    "hist": HistRunner,
    "spmv": SpmvRunner,
    "spgemm": SpgemmRunner,
    "conv": ConvRunner,
    "bilat": BilatRunner,
    "lr": LrRunner,
    "cc": CcRunner,
    "lbm": LbmRunner,
}

# suite defaults: size plus workload-specific input params
SUITE_DEFAULTS: dict[str, dict[str, str]] = {
    "sort": {"n": "100000"},
    "hist": {"n": "1000000"},
    "spmv": {"n": "20000"},
    "spgemm": {"n": "1500"},
    "conv": {"n": "512", "radius": "3"},
    "bilat": {"n": "192", "radius": "5"},
    "lr": {"n": "20000"},
    "cc": {"n": "8192", "edge_factor": "8"},
    "lbm": {"n": "24", "steps": "4"},
}
