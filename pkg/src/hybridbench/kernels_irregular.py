"""Irregular, memory-bound hybrid kernels: SpMV, SpGEMM, list ranking,
connected components, and D3Q19 lattice Boltzmann.

SpMV reorders rows by nonzero count and sends the sparse prefix to
DeviceA and the dense suffix to DeviceB; SpGEMM splits the row-row
product by a per-row flop estimate. List ranking shrinks the list with
fractional-independent-set rounds, ranks the remainder with random
sublist heads, and extends ranks back. Connected components split the
vertex set: BFS labels the prefix subgraph, hooking plus pointer jumping
labels the suffix, and a union-find over cross edges merges the two.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataIOError, NumericError, StructuralError
from .rng import mix_seed, splitmix64_array
from .platform import Device, Platform
from .worksharing import WorkShare, formula_share, run_workshared

SPGEMM_DROP_TOL = 1e-12
LIST_END = -1


# --------------------------------------------------------------------------
# CSR matrices


@dataclass(frozen=True)
class CsrMatrix:
    rows: int
    cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        rp, ci, v = self.row_ptr, self.col_idx, self.values
        if self.rows < 1 or self.cols < 1:
            raise StructuralError("matrix dimensions must be positive")
        if rp.shape != (self.rows + 1,) or rp[0] != 0 or rp[-1] != ci.size:
            raise StructuralError("row_ptr must run from 0 to nnz with rows+1 entries")
        if np.any(np.diff(rp) < 0):
            raise StructuralError("row_ptr must be non-decreasing")
        if ci.size != v.size:
            raise StructuralError("col_idx and values must have equal length")
        if ci.size and (ci.min() < 0 or ci.max() >= self.cols):
            raise StructuralError("column index out of range")
        if ci.size:
            row_of = np.repeat(np.arange(self.rows), np.diff(rp))
            same_row = row_of[1:] == row_of[:-1]
            if np.any(np.diff(ci)[same_row] <= 0):
                raise StructuralError("column indices must be strictly increasing per row")

    @property
    def nnz(self) -> int:
        return int(self.col_idx.size)

    @property
    def row_nnz(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.rows, self.cols))
        row_of = np.repeat(np.arange(self.rows), self.row_nnz)
        dense[row_of, self.col_idx] = self.values
        return dense

    @classmethod
    def from_coo(
        cls, rows: int, cols: int, r: np.ndarray, c: np.ndarray, v: np.ndarray
    ) -> "CsrMatrix":
        """Build from coordinate triples; duplicates are summed."""
        r = np.asarray(r, dtype=np.int64)
        c = np.asarray(c, dtype=np.int64)
        v = np.asarray(v, dtype=np.float64)
        order = np.lexsort((c, r))
        r, c, v = r[order], c[order], v[order]
        if r.size:
            fresh = np.concatenate([[True], (r[1:] != r[:-1]) | (c[1:] != c[:-1])])
            starts = np.flatnonzero(fresh)
            v = np.add.reduceat(v, starts)
            r, c = r[starts], c[starts]
        row_ptr = np.zeros(rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(r, minlength=rows), out=row_ptr[1:])
        return cls(rows, cols, row_ptr, c, v)

    @classmethod
    def identity(cls, n: int) -> "CsrMatrix":
        idx = np.arange(n, dtype=np.int64)
        return cls(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))


def load_matrix_market(path: str | Path) -> CsrMatrix:
    """Coordinate-format MatrixMarket, real entries, general or symmetric
    (symmetric off-diagonals are expanded on load)."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline().strip().lower().split()
            if header[:4] != ["%%matrixmarket", "matrix", "coordinate", "real"]:
                raise DataIOError(f"{path}: only coordinate real MatrixMarket is supported")
            symmetry = header[4] if len(header) > 4 else "general"
            if symmetry not in ("general", "symmetric"):
                raise DataIOError(f"{path}: unsupported symmetry {symmetry!r}")
            line = fh.readline()
            while line.startswith("%"):
                line = fh.readline()
            rows, cols, nnz = (int(tok) for tok in line.split())
            data = np.loadtxt(fh, dtype=np.float64, ndmin=2) if nnz else np.zeros((0, 3))
    except DataIOError:
        raise
    except (OSError, ValueError, IndexError) as exc:
        raise DataIOError(f"cannot read MatrixMarket file {path}: {exc}") from exc
    if data.shape[0] != nnz:
        raise DataIOError(f"{path}: expected {nnz} entries, found {data.shape[0]}")
    r = data[:, 0].astype(np.int64) - 1
    c = data[:, 1].astype(np.int64) - 1
    v = data[:, 2]
    if symmetry == "symmetric":
        off = r != c
        r = np.concatenate([r, c[off]])
        c = np.concatenate([c, data[:, 0].astype(np.int64)[off] - 1])
        v = np.concatenate([v, v[off]])
    try:
        return CsrMatrix.from_coo(rows, cols, r, c, v)
    except StructuralError as exc:
        raise DataIOError(f"{path}: {exc}") from exc


def save_matrix_market(m: CsrMatrix, path: str | Path) -> None:
    row_of = np.repeat(np.arange(m.rows), m.row_nnz)
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("%%MatrixMarket matrix coordinate real general\n")
            fh.write(f"{m.rows} {m.cols} {m.nnz}\n")
            for r, c, v in zip(row_of, m.col_idx, m.values):
                fh.write(f"{r + 1} {c + 1} {float(v)!r}\n")
    except OSError as exc:
        raise DataIOError(f"cannot write MatrixMarket file {path}: {exc}") from exc


# --------------------------------------------------------------------------
# SpMV


@dataclass(frozen=True)
class SpmvPrep:
    """Rows stably sorted by ascending nonzero count; rows before split_row
    (the sparse ones) belong to DeviceA, the dense remainder to DeviceB."""

    permuted: CsrMatrix
    perm: np.ndarray
    split_row: int

    def __post_init__(self) -> None:
        if sorted(self.perm.tolist()) != list(range(self.permuted.rows)):
            raise StructuralError("perm must be a permutation of the row indices")
        if np.any(np.diff(self.permuted.row_nnz) < 0):
            raise StructuralError("permuted rows must have non-decreasing nnz")
        if not 0 <= self.split_row <= self.permuted.rows:
            raise StructuralError("split_row out of range")


def _permute_rows(m: CsrMatrix, perm: np.ndarray) -> CsrMatrix:
    counts = m.row_nnz[perm]
    row_ptr = np.zeros(m.rows + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    if m.nnz:
        gather = (
            np.arange(m.nnz, dtype=np.int64)
            - np.repeat(row_ptr[:-1], counts)
            + np.repeat(m.row_ptr[perm], counts)
        )
    else:
        gather = np.zeros(0, dtype=np.int64)
    return CsrMatrix(m.rows, m.cols, row_ptr, m.col_idx[gather], m.values[gather])


def spmv_preprocess(
    m: CsrMatrix, platform: Platform, share: WorkShare | None = None
) -> SpmvPrep:
    """Sort rows by nnz and pick split_row so the two sides' modeled times
    balance (nonzeros are the work unit); an explicit share overrides the
    balance point with a target nnz fraction for DeviceA."""
    perm = np.argsort(m.row_nnz, kind="stable")
    permuted = _permute_rows(m, perm)
    cum = np.concatenate([[0], np.cumsum(permuted.row_nnz)]).astype(np.float64)
    total = cum[-1]
    if share is not None:
        split = int(np.searchsorted(cum, share.fraction_a * total, side="left"))
    else:
        thr_a = platform.device_a.throughput
        thr_b = platform.device_b.throughput
        finish = np.maximum(cum / thr_a, (total - cum) / thr_b)
        split = int(np.argmin(finish))
    return SpmvPrep(permuted, perm, split)


def _csr_range_matvec(m: CsrMatrix, x: np.ndarray, row0: int, row1: int) -> np.ndarray:
    lo, hi = m.row_ptr[row0], m.row_ptr[row1]
    counts = m.row_nnz[row0:row1]
    row_of = np.repeat(np.arange(row1 - row0), counts)
    products = m.values[lo:hi] * x[m.col_idx[lo:hi]]
    return np.bincount(row_of, weights=products, minlength=row1 - row0)


def spmv_hybrid(prep: SpmvPrep, x: np.ndarray) -> np.ndarray:
    """y = A x with the prep's row split, returned in original row order."""
    m = prep.permuted
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.cols,):
        raise ValueError(f"x must have length {m.cols}, got {x.shape}")
    split = prep.split_row
    with ThreadPoolExecutor(max_workers=2) as pool:
        fut_a = pool.submit(_csr_range_matvec, m, x, 0, split)
        fut_b = pool.submit(_csr_range_matvec, m, x, split, m.rows)
        y_perm = np.concatenate([fut_a.result(), fut_b.result()])
    y = np.empty_like(y_perm)
    y[prep.perm] = y_perm
    return y


class SpmvWorkload:
    """Row-range split of the nnz-sorted matrix, merged back to original order."""

    name = "spmv"
    unit = "nonzeros"

    def __init__(self, prep: SpmvPrep, x: np.ndarray):
        self.prep = prep
        self.x = np.asarray(x, dtype=np.float64)
        if self.x.shape != (prep.permuted.cols,):
            raise ValueError("x length must match matrix columns")
        self._cum = np.concatenate([[0], np.cumsum(prep.permuted.row_nnz)]).astype(float)

    def partition(self, fraction_a: float):
        split = int(np.searchsorted(self._cum, fraction_a * self._cum[-1], side="left"))
        return (0, split), (split, self.prep.permuted.rows)

    def work_units(self, part) -> float:
        return float(self._cum[part[1]] - self._cum[part[0]])

    def run_part(self, device: Device, part) -> np.ndarray:
        return _csr_range_matvec(self.prep.permuted, self.x, part[0], part[1])

    def merge(self, partials: Sequence[np.ndarray]) -> np.ndarray:
        y_perm = np.concatenate(partials)
        y = np.empty_like(y_perm)
        y[self.prep.perm] = y_perm
        return y


# --------------------------------------------------------------------------
# SpGEMM


def _spgemm_rows(
    a: CsrMatrix, b: CsrMatrix, row0: int, row1: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-row product C(i,:) = sum_j A(i,j) B(j,:) for rows [row0, row1),
    with a dense accumulator per output row. Returns (counts, cols, vals)."""
    counts = np.zeros(row1 - row0, dtype=np.int64)
    cols_out: list[np.ndarray] = []
    vals_out: list[np.ndarray] = []
    acc = np.zeros(b.cols)
    for i in range(row0, row1):
        touched: list[np.ndarray] = []
        for k in range(a.row_ptr[i], a.row_ptr[i + 1]):
            j = a.col_idx[k]
            aij = a.values[k]
            lo, hi = b.row_ptr[j], b.row_ptr[j + 1]
            bcols = b.col_idx[lo:hi]
            acc[bcols] += aij * b.values[lo:hi]
            touched.append(bcols)
        if touched:
            cols = np.unique(np.concatenate(touched))
            keep = cols[np.abs(acc[cols]) >= SPGEMM_DROP_TOL]
            cols_out.append(keep)
            vals_out.append(acc[keep].copy())
            counts[i - row0] = keep.size
            acc[cols] = 0.0
    cols_cat = np.concatenate(cols_out) if cols_out else np.zeros(0, dtype=np.int64)
    vals_cat = np.concatenate(vals_out) if vals_out else np.zeros(0)
    return counts, cols_cat, vals_cat


def _assemble_csr(
    rows: int, cols: int, pieces: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]]
) -> CsrMatrix:
    counts = np.concatenate([p[0] for p in pieces])
    row_ptr = np.zeros(rows + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    col_idx = np.concatenate([p[1] for p in pieces])
    values = np.concatenate([p[2] for p in pieces])
    return CsrMatrix(rows, cols, row_ptr, col_idx, values)


def spgemm_rowrow(a: CsrMatrix, b: CsrMatrix) -> CsrMatrix:
    """C = A B via the row-row formulation; magnitudes below 1e-12 dropped."""
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.rows}x{a.cols} times {b.rows}x{b.cols}")
    return _assemble_csr(a.rows, b.cols, [_spgemm_rows(a, b, 0, a.rows)])


def spgemm_flops(a: CsrMatrix, b: CsrMatrix) -> np.ndarray:
    """Per-A-row work estimate: sum over j in A(i,:) of nnz(B(j,:))."""
    if a.nnz == 0:
        return np.zeros(a.rows)
    row_of = np.repeat(np.arange(a.rows), a.row_nnz)
    return np.bincount(row_of, weights=b.row_nnz[a.col_idx].astype(float), minlength=a.rows)


class SpgemmWorkload:
    """A-row-range split weighted by the flop estimate."""

    name = "spgemm"
    unit = "flops"

    def __init__(self, a: CsrMatrix, b: CsrMatrix):
        if a.cols != b.rows:
            raise ValueError("dimension mismatch")
        self.a = a
        self.b = b
        self._cum = np.concatenate([[0.0], np.cumsum(spgemm_flops(a, b))])

    def partition(self, fraction_a: float):
        split = int(np.searchsorted(self._cum, fraction_a * self._cum[-1], side="left"))
        return (0, split), (split, self.a.rows)

    def work_units(self, part) -> float:
        return float(self._cum[part[1]] - self._cum[part[0]])

    def run_part(self, device: Device, part):
        return _spgemm_rows(self.a, self.b, part[0], part[1])

    def merge(self, partials) -> CsrMatrix:
        return _assemble_csr(self.a.rows, self.b.cols, partials)


def spgemm_hybrid(
    a: CsrMatrix, b: CsrMatrix, platform: Platform, share: WorkShare | None = None
) -> CsrMatrix:
    workload = SpgemmWorkload(a, b)
    share = share or formula_share(platform)
    result, _ = run_workshared(platform, workload, share, baselines=False)
    return result


# --------------------------------------------------------------------------
# list ranking


@dataclass(frozen=True)
class LinkedListArr:
    """Successor-array list: succ[i] is the next node or LIST_END."""

    succ: np.ndarray
    head: int


@dataclass(frozen=True)
class ListRankStats:
    fis_rounds: int
    round_sizes: tuple[int, ...]
    reduced_size: int
    removed_total: int
    sublist_count: int


def validate_list(lst: LinkedListArr) -> None:
    """The successor chain from head must visit every node exactly once."""
    n = lst.succ.size
    if not 0 <= lst.head < n:
        raise StructuralError("head out of range")
    succ = lst.succ
    if succ.size and (succ.min() < LIST_END or succ.max() >= n):
        raise StructuralError("successor index out of range")
    seen = 0
    cur = lst.head
    while cur != LIST_END:
        seen += 1
        if seen > n:
            raise StructuralError("list contains a cycle")
        cur = int(succ[cur])
    if seen != n:
        raise StructuralError(f"chain covers {seen} of {n} nodes (broken list)")


def _fis_reduce(lst: LinkedListArr, seed: int, target: int):
    """Shrink the list by removing, per round, nodes whose random bit is 1
    while their successor's bit is 0. Removed nodes form an independent
    set, so every removal splices between two survivors."""
    n = lst.succ.size
    succ = lst.succ.copy()
    weight = np.ones(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    events: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    round_sizes: list[int] = []
    alive_count = n
    rounds = 0
    while alive_count > target and rounds < 1000:
        round_sizes.append(alive_count)
        bits = (splitmix64_array(mix_seed(seed, rounds), n) & np.uint64(1)).astype(np.int64)
        succ_bits = np.where(succ >= 0, bits[np.clip(succ, 0, n - 1)], 0)
        eligible = alive & (bits == 1) & (succ_bits == 0)
        eligible[lst.head] = False
        pred_mask = alive & (succ >= 0)
        pred_mask[pred_mask] = eligible[succ[pred_mask]]
        preds = np.flatnonzero(pred_mask)
        removed = succ[preds]
        rounds += 1
        if removed.size == 0:
            continue
        events.append((removed, preds, weight[preds].copy()))
        weight[preds] += weight[removed]
        succ[preds] = succ[removed]
        alive[removed] = False
        alive_count -= removed.size
    if alive_count > target:
        raise StructuralError("independent-set reduction failed to converge")
    return succ, weight, alive, events, round_sizes


def _rank_reduced(
    succ: np.ndarray,
    weight: np.ndarray,
    alive: np.ndarray,
    head: int,
    seed: int,
    sublist_count: int,
) -> tuple[np.ndarray, int]:
    """Rank the surviving weighted list: random sublist heads, sequential
    local ranking per sublist, then a prefix pass over the head chain."""
    n = succ.size
    survivors = np.flatnonzero(alive)
    s = max(1, min(sublist_count, survivors.size))
    draws = splitmix64_array(mix_seed(seed, 0x5EED), survivors.size)
    chosen = survivors[np.argsort(draws, kind="stable")[: s - 1]]
    is_head = np.zeros(n, dtype=bool)
    is_head[chosen] = True
    is_head[head] = True

    rank = np.zeros(n, dtype=np.int64)
    sub_of = np.full(n, -1, dtype=np.int64)
    next_head: dict[int, tuple[int, int]] = {}
    for start in np.flatnonzero(is_head):
        start = int(start)
        sub_of[start] = start
        acc = int(weight[start])
        cur = int(succ[start])
        while cur != LIST_END and not is_head[cur]:
            rank[cur] = acc
            sub_of[cur] = start
            acc += int(weight[cur])
            cur = int(succ[cur])
        next_head[start] = (cur, acc)

    prefix = np.zeros(n, dtype=np.int64)
    cur = int(head)
    offset = 0
    hops = 0
    while cur != LIST_END:
        prefix[cur] = offset
        nxt, length = next_head[cur]
        offset += length
        cur = nxt
        hops += 1
        if hops > n:
            raise StructuralError("sublist chain does not terminate")
    rank[alive] += prefix[sub_of[alive]]
    return rank, int(is_head.sum())


def list_rank_with_stats(
    lst: LinkedListArr, platform: Platform, seed: int
) -> tuple[np.ndarray, ListRankStats]:
    validate_list(lst)
    n = lst.succ.size
    if n == 1:
        return np.zeros(1, dtype=np.int64), ListRankStats(0, (), 1, 0, 1)
    target = max(int(n / math.log2(n)), 2) if n > 2 else 2
    succ, weight, alive, events, round_sizes = _fis_reduce(lst, seed, target)
    workers = platform.device_a.worker_count + platform.device_b.worker_count
    rank, used_heads = _rank_reduced(succ, weight, alive, lst.head, seed, 4 * workers)
    # extension: newest removals first, so each predecessor's rank is known
    for removed, preds, pred_weight in reversed(events):
        rank[removed] = rank[preds] + pred_weight
    stats = ListRankStats(
        fis_rounds=len(round_sizes),
        round_sizes=tuple(round_sizes),
        reduced_size=int(alive.sum()),
        removed_total=int(n - alive.sum()),
        sublist_count=used_heads,
    )
    return rank, stats


def list_rank_hybrid(lst: LinkedListArr, platform: Platform, seed: int) -> np.ndarray:
    """rank[i] = distance of node i from the head of the list."""
    rank, _ = list_rank_with_stats(lst, platform, seed)
    return rank


# --------------------------------------------------------------------------
# graphs and connected components


@dataclass(frozen=True)
class Graph:
    """Undirected graph: CSR adjacency storing each edge both ways, plus
    the unique edge list it was built from."""

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray

    @property
    def edge_count(self) -> int:
        return int(self.edge_u.size)

    def neighbors(self, v: int) -> np.ndarray:
        return self.col_idx[self.row_ptr[v] : self.row_ptr[v + 1]]

    @classmethod
    def from_edges(cls, n: int, u: np.ndarray, v: np.ndarray) -> "Graph":
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise StructuralError("edge endpoint out of range")
        eu, ev = np.minimum(u, v), np.maximum(u, v)
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        row_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=row_ptr[1:])
        return cls(n, row_ptr, dst, eu, ev)


def load_edge_list(path: str | Path, n: int | None = None) -> Graph:
    """Whitespace-separated `u v` pairs, 0-based; lines starting with #
    are ignored."""
    try:
        rows: list[tuple[int, int]] = []
        with open(path, "r", encoding="ascii") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise DataIOError(f"{path}: bad edge line {line!r}")
                rows.append((int(parts[0]), int(parts[1])))
    except DataIOError:
        raise
    except (OSError, ValueError) as exc:
        raise DataIOError(f"cannot read edge list {path}: {exc}") from exc
    if rows:
        arr = np.array(rows, dtype=np.int64)
        u, v = arr[:, 0], arr[:, 1]
    else:
        u = v = np.zeros(0, dtype=np.int64)
    if n is None:
        n = int(max(u.max(initial=-1), v.max(initial=-1)) + 1) if u.size else 0
    if n < 1:
        raise DataIOError(f"{path}: empty graph")
    try:
        return Graph.from_edges(n, u, v)
    except StructuralError as exc:
        raise DataIOError(f"{path}: {exc}") from exc


def save_edge_list(g: Graph, path: str | Path) -> None:
    try:
        with open(path, "w", encoding="ascii") as fh:
            for u, v in zip(g.edge_u, g.edge_v):
                fh.write(f"{u} {v}\n")
    except OSError as exc:
        raise DataIOError(f"cannot write edge list {path}: {exc}") from exc


def bfs_prefix_components(g: Graph, limit: int) -> np.ndarray:
    """Level-synchronous BFS labels for the subgraph induced by vertices
    [0, limit); labels are the minimum vertex id of each component there.
    Vertices outside the prefix get label -1."""
    labels = np.full(g.n, -1, dtype=np.int64)
    for root in range(limit):
        if labels[root] != -1:
            continue
        labels[root] = root
        frontier = np.array([root], dtype=np.int64)
        while frontier.size:
            chunks = [g.neighbors(int(v)) for v in frontier]
            nbrs = np.unique(np.concatenate(chunks)) if chunks else np.zeros(0, np.int64)
            nbrs = nbrs[(nbrs < limit) & (labels[nbrs] == -1)]
            labels[nbrs] = root
            frontier = nbrs
    return labels


def _sv_rounds(n: int, eu: np.ndarray, ev: np.ndarray) -> tuple[np.ndarray, int]:
    """Hooking to the smaller neighboring root plus pointer jumping until
    stable. Hook proposals are computed in one pass and applied in a
    second, so rounds are deterministic."""
    parent = np.arange(n, dtype=np.int64)
    rounds = 0
    while True:
        ru, rv = parent[eu], parent[ev]
        lo = np.minimum(ru, rv)
        hi = np.maximum(ru, rv)
        diff = lo != hi
        if not diff.any():
            break
        proposal = parent.copy()
        np.minimum.at(proposal, hi[diff], lo[diff])
        if np.array_equal(proposal, parent):
            break
        parent = proposal
        while True:
            grand = parent[parent]
            if np.array_equal(grand, parent):
                break
            parent = grand
        rounds += 1
    return parent, rounds


def shiloach_vishkin(g: Graph) -> np.ndarray:
    """Component labels by iterated hooking and pointer jumping."""
    labels, _ = _sv_rounds(g.n, g.edge_u, g.edge_v)
    return labels


def shiloach_vishkin_rounds(g: Graph) -> tuple[np.ndarray, int]:
    return _sv_rounds(g.n, g.edge_u, g.edge_v)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return int(x)

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx


@dataclass(frozen=True)
class CcStats:
    prefix_size: int
    prefix_edges: int
    suffix_edges: int
    cross_edges: int
    sv_rounds: int


def cc_partition_counts(g: Graph, limit: int) -> tuple[int, int, int]:
    """(edges inside the prefix, edges inside the suffix, cross edges)."""
    inside = int(np.count_nonzero((g.edge_u < limit) & (g.edge_v < limit)))
    outside = int(np.count_nonzero((g.edge_u >= limit) & (g.edge_v >= limit)))
    return inside, outside, g.edge_count - inside - outside


def cc_work_units(g: Graph, limit: int) -> tuple[float, float, float]:
    """(BFS work, hooking/jumping work, merge work) for a prefix of size
    `limit`: adjacency entries scanned plus vertices touched."""
    inside, outside, cross = cc_partition_counts(g, limit)
    return float(limit + 2 * inside), float((g.n - limit) + 2 * outside), float(cross)


def cc_balanced_fraction(g: Graph, platform: Platform) -> float:
    """Vertex-prefix fraction minimizing the modeled hybrid time
    max(t_bfs, t_sv) + t_merge, where work counts adjacency entries
    scanned plus vertices touched."""
    thr_a = platform.device_a.throughput
    thr_b = platform.device_b.throughput
    hi_sorted = np.sort(np.maximum(g.edge_u, g.edge_v))
    lo_sorted = np.sort(np.minimum(g.edge_u, g.edge_v))
    ks = np.arange(g.n + 1)
    inside = np.searchsorted(hi_sorted, ks, side="left")
    outside = g.edge_count - np.searchsorted(lo_sorted, ks, side="left")
    cross = g.edge_count - inside - outside
    t = (
        np.maximum((ks + 2.0 * inside) / thr_a, ((g.n - ks) + 2.0 * outside) / thr_b)
        + cross / thr_b
    )
    best_k = int(np.argmin(t))
    return best_k / g.n if g.n else 0.0


def cc_hybrid_with_stats(
    g: Graph, platform: Platform, v1_fraction: float
) -> tuple[np.ndarray, CcStats]:
    if not 0.0 <= v1_fraction <= 1.0:
        raise ValueError("v1_fraction must lie in [0, 1]")
    limit = int(math.floor(v1_fraction * g.n))
    suffix_mask = (g.edge_u >= limit) & (g.edge_v >= limit)
    cross_mask = (g.edge_u < limit) != (g.edge_v < limit)

    def run_bfs() -> np.ndarray:
        return bfs_prefix_components(g, limit)

    def run_sv() -> tuple[np.ndarray, int]:
        return _sv_rounds(g.n, g.edge_u[suffix_mask], g.edge_v[suffix_mask])

    with ThreadPoolExecutor(max_workers=2) as pool:
        fut_a = pool.submit(run_bfs)
        fut_b = pool.submit(run_sv)
        labels_a = fut_a.result()
        sv_parent, rounds = fut_b.result()

    side_label = np.where(np.arange(g.n) < limit, labels_a, sv_parent)
    uf = _UnionFind(g.n)
    for u, v in zip(g.edge_u[cross_mask], g.edge_v[cross_mask]):
        uf.union(int(side_label[u]), int(side_label[v]))
    labels = np.array([uf.find(int(side_label[v])) for v in range(g.n)], dtype=np.int64)
    inside, outside, cross = cc_partition_counts(g, limit)
    return labels, CcStats(limit, inside, outside, cross, rounds)


def cc_hybrid(g: Graph, platform: Platform, v1_fraction: float) -> np.ndarray:
    """Component labels from BFS on the vertex prefix, hooking plus pointer
    jumping on the suffix, and a cross-edge union-find merge."""
    labels, _ = cc_hybrid_with_stats(g, platform, v1_fraction)
    return labels


# --------------------------------------------------------------------------
# lattice Boltzmann, D3Q19 BGK

D3Q19_C = np.array(
    [
        (0, 0, 0),
        (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
        (1, 1, 0), (-1, -1, 0), (1, -1, 0), (-1, 1, 0),
        (1, 0, 1), (-1, 0, -1), (1, 0, -1), (-1, 0, 1),
        (0, 1, 1), (0, -1, -1), (0, 1, -1), (0, -1, 1),
    ],
    dtype=np.int64,
)
D3Q19_W = np.array([1.0 / 3.0] + [1.0 / 18.0] * 6 + [1.0 / 36.0] * 12)
LBM_DEVICE_A_FUNCS = tuple(range(0, 4))
LBM_DEVICE_B_FUNCS = tuple(range(4, 19))

_PLUS_X = (1, 7, 9, 11, 13)
_MINUS_X = (2, 8, 10, 12, 14)
_PLUS_Y = (3, 7, 10, 15, 17)
_MINUS_Y = (4, 8, 9, 16, 18)
_PLUS_Z = (5, 11, 14, 15, 18)
_MINUS_Z = (6, 12, 13, 16, 17)


@dataclass(frozen=True)
class Lattice:
    """19 distribution fields over an (nx, ny, nz) periodic box."""

    f: np.ndarray
    tau: float

    def __post_init__(self) -> None:
        if self.f.ndim != 4 or self.f.shape[0] != 19:
            raise StructuralError("f must have shape (19, nx, ny, nz)")
        if not self.tau > 0.5:
            raise ValueError("tau must be > 0.5")
        if not np.isfinite(self.f).all():
            raise NumericError("lattice contains non-finite values")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.f.shape[1:]

    @classmethod
    def equilibrium(cls, dims: tuple[int, int, int], tau: float, rho: float = 1.0) -> "Lattice":
        f = np.broadcast_to(
            D3Q19_W[:, None, None, None] * rho, (19, *dims)
        ).copy()
        return cls(f, tau)


def lattice_mass(lat: Lattice) -> float:
    return float(lat.f.sum())


def lattice_momentum(lat: Lattice) -> np.ndarray:
    f = lat.f
    return np.array(
        [
            sum(f[i].sum() for i in plus) - sum(f[i].sum() for i in minus)
            for plus, minus in (
                (_PLUS_X, _MINUS_X), (_PLUS_Y, _MINUS_Y), (_PLUS_Z, _MINUS_Z)
            )
        ]
    )


def lbm_moments(f: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Density and velocity fields. Opposite directions are summed in
    matching order so a zero-velocity state yields exactly zero u.
    Zero-density cells yield non-finite u, reported by the step as a
    numeric error with the cell location."""
    rho = f.sum(axis=0)

    def axis_sum(plus, minus):
        pos = f[plus[0]].copy()
        for i in plus[1:]:
            pos += f[i]
        neg = f[minus[0]].copy()
        for i in minus[1:]:
            neg += f[i]
        return pos - neg

    with np.errstate(divide="ignore", invalid="ignore"):
        ux = axis_sum(_PLUS_X, _MINUS_X) / rho
        uy = axis_sum(_PLUS_Y, _MINUS_Y) / rho
        uz = axis_sum(_PLUS_Z, _MINUS_Z) / rho
    return rho, ux, uy, uz


def lbm_collide_stream(
    f: np.ndarray, moments, tau: float, indices: Sequence[int]
) -> list[np.ndarray]:
    """BGK collision and periodic streaming for the given distribution
    indices: f_i' = f_i + (feq_i - f_i)/tau rolled along c_i."""
    rho, ux, uy, uz = moments
    usq = ux * ux + uy * uy + uz * uz
    out = []
    for i in indices:
        cx, cy, cz = (int(c) for c in D3Q19_C[i])
        cu = cx * ux + cy * uy + cz * uz
        feq = D3Q19_W[i] * rho * (1.0 + 3.0 * cu + 4.5 * cu * cu - 1.5 * usq)
        post = f[i] + (feq - f[i]) / tau
        out.append(np.roll(post, shift=(cx, cy, cz), axis=(0, 1, 2)))
    return out


def lbm_step_single(lat: Lattice) -> Lattice:
    """One collide-and-stream step computed as a single sequence."""
    moments = lbm_moments(lat.f)
    parts = lbm_collide_stream(lat.f, moments, lat.tau, range(19))
    return lbm_assemble(parts, lat.tau)


def lbm_step_hybrid(lat: Lattice, platform: Platform) -> Lattice:
    """One step with distribution functions 0..3 computed on DeviceA and
    4..18 on DeviceB as parallel tasks over shared moments; the split is
    exact, so the state matches lbm_step_single bit for bit."""
    moments = lbm_moments(lat.f)
    with ThreadPoolExecutor(max_workers=2) as pool:
        fut_a = pool.submit(lbm_collide_stream, lat.f, moments, lat.tau, LBM_DEVICE_A_FUNCS)
        fut_b = pool.submit(lbm_collide_stream, lat.f, moments, lat.tau, LBM_DEVICE_B_FUNCS)
        parts = fut_a.result() + fut_b.result()
    return lbm_assemble(parts, lat.tau)


def lbm_assemble(parts: list[np.ndarray], tau: float) -> Lattice:
    f_new = np.stack(parts)
    if not np.isfinite(f_new).all():
        bad = np.argwhere(~np.isfinite(f_new))[0]
        raise NumericError(
            f"non-finite value in distribution {bad[0]} at cell {tuple(int(x) for x in bad[1:])}"
        )
    return Lattice(f_new, tau)
