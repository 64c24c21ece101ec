import math

import numpy as np
import pytest

from oracles import (
    chase_ranks,
    dense_matmul,
    dense_matvec,
    labels_equivalent,
    union_find_labels,
)
from hybridbench.datasets import gen_csr, gen_graph_gnp, gen_graph_rmat, gen_lattice, gen_list
from hybridbench.errors import NumericError, StructuralError
from hybridbench.kernels_irregular import (
    CsrMatrix,
    Graph,
    Lattice,
    LinkedListArr,
    SpmvPrep,
    _fis_reduce,
    cc_hybrid,
    lattice_mass,
    lattice_momentum,
    lbm_step_hybrid,
    lbm_step_single,
    list_rank_hybrid,
    list_rank_with_stats,
    load_edge_list,
    load_matrix_market,
    save_edge_list,
    save_matrix_market,
    shiloach_vishkin,
    shiloach_vishkin_rounds,
    spgemm_hybrid,
    spgemm_rowrow,
    spmv_hybrid,
    spmv_preprocess,
    validate_list,
)
from hybridbench.platform import Platform
from hybridbench.worksharing import WorkShare

SHARES = [i / 10 for i in range(11)]


# ---------------------------------------------------------------- CSR


def test_csr_validation():
    with pytest.raises(StructuralError):
        CsrMatrix(2, 2, np.array([0, 1]), np.array([0]), np.array([1.0]))
    with pytest.raises(StructuralError):  # decreasing row_ptr
        CsrMatrix(2, 2, np.array([0, 2, 1]), np.array([0, 1]), np.array([1.0, 1.0]))
    with pytest.raises(StructuralError):  # column out of range
        CsrMatrix(1, 2, np.array([0, 1]), np.array([5]), np.array([1.0]))
    with pytest.raises(StructuralError):  # unsorted columns within a row
        CsrMatrix(1, 3, np.array([0, 2]), np.array([2, 1]), np.array([1.0, 1.0]))


def test_csr_from_coo_sums_duplicates():
    m = CsrMatrix.from_coo(2, 2, [0, 0, 1], [1, 1, 0], [2.0, 3.0, 4.0])
    assert m.nnz == 2
    assert m.to_dense().tolist() == [[0.0, 5.0], [4.0, 0.0]]


# ---------------------------------------------------------------- SpMV


def test_spmv_preprocess_stable_sort(platform13):
    # rows with nnz (3, 1, 2) -> permutation (1, 2, 0)
    m = CsrMatrix.from_coo(
        3, 3, [0, 0, 0, 1, 2, 2], [0, 1, 2, 0, 0, 1], [1.0] * 6
    )
    prep = spmv_preprocess(m, platform13)
    assert prep.perm.tolist() == [1, 2, 0]


def test_spmv_preprocess_equal_split():
    p = Platform.build(1.0, 1.0)
    m = CsrMatrix.identity(4)
    prep = spmv_preprocess(m, p)
    assert prep.split_row == 2


def test_spmv_preprocess_diagonal_balance(platform13):
    m = CsrMatrix.identity(100)
    prep = spmv_preprocess(m, platform13)
    assert prep.split_row == 25


def test_spmv_identity(platform13):
    prep = spmv_preprocess(CsrMatrix.identity(3), platform13)
    assert np.allclose(spmv_hybrid(prep, np.array([1.0, 2.0, 3.0])), [1, 2, 3])


def test_spmv_zero_matrix(platform13):
    m = CsrMatrix(3, 3, np.zeros(4, dtype=np.int64), np.zeros(0, np.int64), np.zeros(0))
    prep = spmv_preprocess(m, platform13)
    assert np.allclose(spmv_hybrid(prep, np.ones(3)), 0.0)


def test_spmv_dimension_mismatch(platform13):
    prep = spmv_preprocess(CsrMatrix.identity(3), platform13)
    with pytest.raises(ValueError):
        spmv_hybrid(prep, np.ones(4))


def test_spmv_matches_dense_oracle(platform13):
    from hybridbench.rng import uniform_floats

    m = gen_csr(50, 50, seed=3, density=0.1)
    x = uniform_floats(77, 50) * 2 - 1
    prep = spmv_preprocess(m, platform13)
    expected = dense_matvec(m, x)
    assert np.allclose(spmv_hybrid(prep, x), expected, rtol=1e-6, atol=1e-12)


def test_spmv_every_split_row_sound(platform13):
    from hybridbench.rng import uniform_floats

    m = gen_csr(30, 30, seed=5, density=0.15)
    x = uniform_floats(99, 30)
    expected = dense_matvec(m, x)
    base = spmv_preprocess(m, platform13)
    for split in range(0, m.rows + 1, 3):
        prep = SpmvPrep(base.permuted, base.perm, split)
        assert np.allclose(spmv_hybrid(prep, x), expected, rtol=1e-6, atol=1e-12)


# ---------------------------------------------------------------- SpGEMM


def test_spgemm_identity(platform13):
    b = gen_csr(10, 10, seed=1, density=0.2)
    c = spgemm_rowrow(CsrMatrix.identity(10), b)
    assert c.row_ptr.tolist() == b.row_ptr.tolist()
    assert c.col_idx.tolist() == b.col_idx.tolist()
    assert np.allclose(c.values, b.values)


def test_spgemm_empty_row():
    a = CsrMatrix(2, 2, np.array([0, 0, 1]), np.array([0]), np.array([2.0]))
    b = CsrMatrix.identity(2)
    c = spgemm_rowrow(a, b)
    assert c.row_nnz.tolist() == [0, 1]


def test_spgemm_dimension_mismatch():
    with pytest.raises(ValueError):
        spgemm_rowrow(CsrMatrix.identity(3), CsrMatrix.identity(4))


def test_spgemm_matches_dense_oracle():
    a = gen_csr(20, 20, seed=2, density=0.2)
    b = gen_csr(20, 20, seed=3, density=0.2)
    expected = dense_matmul(a, b)
    c = spgemm_rowrow(a, b)
    assert np.allclose(c.to_dense(), expected, rtol=1e-6, atol=1e-9)
    # valid CSR: strictly increasing columns per row is enforced on build
    assert isinstance(c, CsrMatrix)


def test_spgemm_hybrid_split_invariance(platform13):
    a = gen_csr(24, 24, seed=4, density=0.15)
    b = gen_csr(24, 24, seed=5, density=0.15)
    ref = spgemm_rowrow(a, b)
    for share in SHARES:
        c = spgemm_hybrid(a, b, platform13, WorkShare.manual(share))
        assert c.row_ptr.tolist() == ref.row_ptr.tolist()
        assert c.col_idx.tolist() == ref.col_idx.tolist()
        assert np.array_equal(c.values, ref.values)


# ---------------------------------------------------------------- MatrixMarket


def test_matrix_market_roundtrip(tmp_path):
    m = gen_csr(12, 12, seed=6, density=0.2)
    path = tmp_path / "m.mtx"
    save_matrix_market(m, path)
    back = load_matrix_market(path)
    assert back.rows == m.rows and back.cols == m.cols
    assert np.allclose(back.to_dense(), m.to_dense())


def test_matrix_market_symmetric_expansion(tmp_path):
    path = tmp_path / "s.mtx"
    path.write_text(
        "%%MatrixMarket matrix coordinate real symmetric\n"
        "% comment\n"
        "3 3 2\n"
        "2 1 5.0\n"
        "3 3 7.0\n"
    )
    m = load_matrix_market(path)
    dense = m.to_dense()
    assert dense[1, 0] == 5.0 and dense[0, 1] == 5.0
    assert dense[2, 2] == 7.0


def test_matrix_market_rejects_garbage(tmp_path):
    from hybridbench.errors import DataIOError

    path = tmp_path / "bad.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n1 1\n1.0\n")
    with pytest.raises(DataIOError):
        load_matrix_market(path)


# ---------------------------------------------------------------- list ranking


def test_list_rank_singleton(platform13):
    lst = LinkedListArr(np.array([-1]), 0)
    assert list_rank_hybrid(lst, platform13, seed=1).tolist() == [0]


def test_list_rank_ordered_chain(platform13):
    succ = np.array([1, 2, 3, -1])
    ranks = list_rank_hybrid(LinkedListArr(succ, 0), platform13, seed=1)
    assert ranks.tolist() == [0, 1, 2, 3]


def test_list_rank_permuted_matches_oracle(platform13):
    lst = gen_list(10_000, seed=42)
    ranks = list_rank_hybrid(lst, platform13, seed=7)
    assert np.array_equal(ranks, chase_ranks(lst.succ, lst.head))


def test_list_rank_structural_invariants(platform13):
    for seed in range(5):
        n = 500 + 97 * seed
        lst = gen_list(n, seed=seed)
        ranks, stats = list_rank_with_stats(lst, platform13, seed=seed)
        assert np.array_equal(np.sort(ranks), np.arange(n))  # permutation of 0..n-1
        assert ranks[lst.head] == 0
        interior = lst.succ >= 0
        assert np.array_equal(ranks[lst.succ[interior]], ranks[interior] + 1)
        assert stats.reduced_size <= max(n / math.log2(n), 2)


def test_fis_rounds_remove_independent_sets():
    n = 2000
    lst = gen_list(n, seed=3)
    target = max(int(n / math.log2(n)), 2)
    _, _, _, events, _ = _fis_reduce(lst, seed=3, target=target)
    succ = lst.succ.copy()
    for removed, preds, _w in events:
        removed_set = set(removed.tolist())
        for node in removed.tolist():
            nxt = int(succ[node])
            assert nxt not in removed_set  # no two adjacent removals
        # apply the same splice to track the live list
        succ[preds] = succ[removed]


def test_broken_lists_rejected(platform13):
    with pytest.raises(StructuralError):  # cycle
        validate_list(LinkedListArr(np.array([1, 0]), 0))
    with pytest.raises(StructuralError):  # two chains, head covers one
        validate_list(LinkedListArr(np.array([-1, -1]), 0))
    with pytest.raises(StructuralError):  # successor out of range
        validate_list(LinkedListArr(np.array([5]), 0))
    with pytest.raises(StructuralError):
        list_rank_hybrid(LinkedListArr(np.array([1, 0]), 0), platform13, seed=1)


# ---------------------------------------------------------------- connected components


def test_cc_path_graph_one_component(platform13):
    g = Graph.from_edges(5, np.arange(4), np.arange(1, 5))
    for fraction in (0.0, 0.3, 0.6, 1.0):
        labels = cc_hybrid(g, platform13, fraction)
        assert len(set(labels.tolist())) == 1


def test_cc_two_triangles_cut_by_partition(platform13):
    u = np.array([0, 1, 2, 3, 4, 5])
    v = np.array([1, 2, 0, 4, 5, 3])
    g = Graph.from_edges(6, u, v)
    labels = cc_hybrid(g, platform13, 0.5)  # cuts the second triangle
    assert labels_equivalent(labels, union_find_labels(6, u, v))
    assert len(set(labels.tolist())) == 2


def test_cc_rmat_fraction_grid(platform13):
    g = gen_graph_rmat(2**12, seed=3, edge_factor=4)
    expected = union_find_labels(g.n, g.edge_u, g.edge_v)
    for fraction in (0.0, 0.25, 0.5, 1.0):
        labels = cc_hybrid(g, platform13, fraction)
        assert labels_equivalent(labels, expected)


def test_cc_fraction_validation(platform13):
    g = Graph.from_edges(4, [0], [1])
    with pytest.raises(ValueError):
        cc_hybrid(g, platform13, 1.5)


def test_sv_edgeless():
    g = Graph.from_edges(5, [], [])
    assert shiloach_vishkin(g).tolist() == [0, 1, 2, 3, 4]


def test_sv_complete_graph_single_round():
    iu, iv = np.triu_indices(4, k=1)
    g = Graph.from_edges(4, iu, iv)
    labels, rounds = shiloach_vishkin_rounds(g)
    assert set(labels.tolist()) == {0}
    assert rounds == 1


def test_sv_random_matches_oracle_with_round_bound():
    g = gen_graph_gnp(1024, seed=11, p=2.5 / 1024)
    labels, rounds = shiloach_vishkin_rounds(g)
    assert labels_equivalent(labels, union_find_labels(g.n, g.edge_u, g.edge_v))
    assert rounds <= 2 * math.ceil(math.log2(g.n))


def test_edge_list_roundtrip(tmp_path):
    g = gen_graph_rmat(64, seed=1, edge_factor=2)
    path = tmp_path / "g.txt"
    save_edge_list(g, path)
    back = load_edge_list(path, n=64)
    assert back.n == g.n
    assert np.array_equal(back.edge_u, np.sort(g.edge_u)[np.argsort(np.argsort(g.edge_u))])
    expected = union_find_labels(g.n, g.edge_u, g.edge_v)
    assert labels_equivalent(shiloach_vishkin(back), expected)


# ---------------------------------------------------------------- LBM


def test_lbm_equilibrium_fixed_point(platform13):
    lat = Lattice.equilibrium((8, 8, 8), tau=0.8)
    stepped = lbm_step_hybrid(lat, platform13)
    assert np.allclose(stepped.f, lat.f, rtol=1e-12, atol=1e-15)


def test_lbm_mass_conservation(platform13):
    lat = gen_lattice(8, seed=5, tau=0.7)
    m0 = lattice_mass(lat)
    for _ in range(20):
        lat = lbm_step_hybrid(lat, platform13)
        assert abs(lattice_mass(lat) - m0) <= 1e-10 * abs(m0)


def test_lbm_momentum_conservation(platform13):
    lat = gen_lattice(6, seed=9, tau=0.9)
    p0 = lattice_momentum(lat)
    mass = lattice_mass(lat)
    for _ in range(10):
        lat = lbm_step_hybrid(lat, platform13)
    drift = np.abs(lattice_momentum(lat) - p0)
    assert np.all(drift <= 1e-8 * mass)


def test_lbm_hybrid_split_bit_identical(platform13):
    lat = gen_lattice(8, seed=2, tau=0.8)
    hybrid = lbm_step_hybrid(lat, platform13)
    single = lbm_step_single(lat)
    assert np.array_equal(hybrid.f, single.f)


def test_lbm_nonfinite_reports_location(platform13):
    f = Lattice.equilibrium((4, 4, 4), tau=0.8).f.copy()
    f[:, 1, 2, 3] = 0.0  # zero-density cell makes u non-finite there
    lat = Lattice(f, 0.8)
    with pytest.raises(NumericError) as err:
        lbm_step_hybrid(lat, platform13)
    assert "cell" in str(err.value)


def test_lattice_validation():
    with pytest.raises(ValueError):
        Lattice(np.ones((19, 2, 2, 2)), tau=0.5)
    with pytest.raises(StructuralError):
        Lattice(np.ones((18, 2, 2, 2)), tau=0.8)
    with pytest.raises(NumericError):
        Lattice(np.full((19, 1, 1, 1), np.nan), tau=0.8)
