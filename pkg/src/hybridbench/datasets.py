"""Seeded uniform-at-random dataset generators, one per workload kind.

Identical (kind, size, seed) always yields identical dataset bytes.
File emission is supported for the kinds with a defined on-disk format:
raw little-endian uint32 for sort/hist, PGM for images, MatrixMarket for
sparse matrices, and edge-list text for graphs; lists and lattices are
generated in memory from config only.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError, DataIOError
from .kernels_irregular import LIST_END, CsrMatrix, Graph, Lattice, LinkedListArr
from .kernels_regular import Image, write_pgm
from .rng import SplitMix64, mix_seed, splitmix64_array, uniform_floats, uniform_ints

UAR_KINDS = ("sort", "hist", "spmv", "spgemm", "conv", "bilat", "lr", "cc", "lbm")

_RMAT_A, _RMAT_B, _RMAT_C = 0.45, 0.15, 0.15


def gen_sort_data(n: int, seed: int) -> np.ndarray:
    """Uniform 32-bit keys (duplicates expected for large n)."""
    return (splitmix64_array(seed, n) >> np.uint64(32)).astype(np.int64)


def gen_hist_data(n: int, seed: int, bins: int = 256) -> np.ndarray:
    return uniform_ints(seed, n, bins)


def gen_csr(rows: int, cols: int, seed: int, density: float) -> CsrMatrix:
    """Random CSR with about density*cols nonzeros per row, at least one."""
    avg = max(1, round(density * cols))
    counts = 1 + uniform_ints(mix_seed(seed, 1), rows, max(1, 2 * avg - 1))
    counts = np.minimum(counts, cols)
    rng = SplitMix64(mix_seed(seed, 2))
    col_chunks: list[np.ndarray] = []
    for k in counts:
        k = int(k)
        chosen = np.unique(uniform_ints(rng.next_u64(), 2 * k + 8, cols))
        while chosen.size < k:
            extra = np.unique(uniform_ints(rng.next_u64(), 2 * k + 8, cols))
            chosen = np.unique(np.concatenate([chosen, extra]))
        col_chunks.append(chosen[:k])
    col_idx = np.concatenate(col_chunks)
    row_ptr = np.zeros(rows + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    values = 2.0 * uniform_floats(mix_seed(seed, 3), col_idx.size) - 1.0
    return CsrMatrix(rows, cols, row_ptr, col_idx, values)


def gen_list(n: int, seed: int) -> LinkedListArr:
    """A single list over n nodes in a random order."""
    order = np.argsort(splitmix64_array(seed, n), kind="stable").astype(np.int64)
    succ = np.full(n, LIST_END, dtype=np.int64)
    succ[order[:-1]] = order[1:]
    return LinkedListArr(succ, int(order[0]))


def gen_graph_rmat(n: int, seed: int, edge_factor: int = 8) -> Graph:
    """Recursive-matrix random graph with skewed degrees; endpoints beyond
    n are folded back with a modulus."""
    levels = max(1, math.ceil(math.log2(max(n, 2))))
    m = edge_factor * n
    u = np.zeros(m, dtype=np.int64)
    v = np.zeros(m, dtype=np.int64)
    for level in range(levels):
        draw = uniform_floats(mix_seed(seed, level), m)
        src_bit = (draw >= _RMAT_A + _RMAT_B).astype(np.int64)
        in_upper = draw < _RMAT_A + _RMAT_B
        dst_bit = np.where(
            in_upper, (draw >= _RMAT_A).astype(np.int64), (draw >= _RMAT_A + _RMAT_B + _RMAT_C).astype(np.int64)
        )
        u |= src_bit << level
        v |= dst_bit << level
    return Graph.from_edges(n, u % n, v % n)


def gen_graph_gnp(n: int, seed: int, p: float) -> Graph:
    """Erdos-Renyi style: each unordered pair kept with probability p."""
    if n > 8192:
        raise ConfigError("gnp generator supports n <= 8192; use the rmat model")
    iu, iv = np.triu_indices(n, k=1)
    keep = uniform_floats(seed, iu.size) < p
    return Graph.from_edges(n, iu[keep], iv[keep])


def gen_lattice(side: int, seed: int, tau: float) -> Lattice:
    """Positive random perturbation around the rest-state weights."""
    cells = side**3
    noise = uniform_floats(seed, 19 * cells).reshape(19, side, side, side)
    from .kernels_irregular import D3Q19_W

    f = D3Q19_W[:, None, None, None] * (1.0 + 0.2 * noise)
    return Lattice(f, tau)


def gen_image(side: int, seed: int) -> Image:
    data = uniform_ints(seed, side * side, 256).astype(np.uint8)
    return Image(data.reshape(side, side))


def generate_uar(kind: str, size: int, seed: int, **params: Any):
    """Dispatch to the workload-appropriate generator."""
    if size < 1:
        raise ConfigError(f"dataset size must be >= 1, got {size}")
    if kind == "sort":
        return gen_sort_data(size, seed)
    if kind == "hist":
        return gen_hist_data(size, seed, int(params.get("bins", 256)))
    if kind in ("spmv", "spgemm"):
        density = float(params.get("density", 0.01))
        return gen_csr(size, size, seed, density)
    if kind == "lr":
        return gen_list(size, seed)
    if kind == "cc":
        if "p" in params and params["p"] is not None:
            return gen_graph_gnp(size, seed, float(params["p"]))
        return gen_graph_rmat(size, seed, int(params.get("edge_factor", 8)))
    if kind == "lbm":
        return gen_lattice(size, seed, float(params.get("tau", 0.8)))
    if kind in ("conv", "bilat"):
        return gen_image(size, seed)
    raise ConfigError(f"unknown dataset kind {kind!r}")


def write_dataset(kind: str, dataset, path: str | Path) -> None:
    """Write a generated dataset in its standard on-disk format."""
    from .kernels_irregular import save_edge_list, save_matrix_market

    if kind in ("sort", "hist"):
        arr = np.asarray(dataset, dtype=np.uint32)
        try:
            arr.astype("<u4").tofile(path)
        except OSError as exc:
            raise DataIOError(f"cannot write {path}: {exc}") from exc
        return
    if kind in ("spmv", "spgemm"):
        save_matrix_market(dataset, path)
        return
    if kind == "cc":
        save_edge_list(dataset, path)
        return
    if kind in ("conv", "bilat"):
        write_pgm(dataset, path)
        return
    raise ConfigError(f"dataset kind {kind!r} has no file format; it is generated from config")


def read_raw_u32(path: str | Path) -> np.ndarray:
    try:
        data = np.fromfile(path, dtype="<u4")
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    if data.size == 0:
        raise DataIOError(f"{path}: empty input")
    return data.astype(np.int64)
