import numpy as np
import pytest

from bcs import linalg
from bcs.errors import DimensionMismatch, SingularSupportWarning, ZeroColumn
from bcs.omp import KSparseMatrix, SparseVector, omp, omp_batch, omp_coefficients
from oracles import naive_omp


def unit_gaussian(rows, cols, seed):
    D = np.random.default_rng(seed).standard_normal((rows, cols))
    return D / np.linalg.norm(D, axis=0)


def test_zero_signal():
    D = unit_gaussian(8, 16, 0)
    assert len(omp(D, np.zeros(8), 3)) == 0
    S = omp_batch(D, np.zeros((8, 5)), 3)
    assert np.all(S.support_sizes() == 0)


def test_exact_atom():
    D = unit_gaussian(8, 16, 1)
    s = omp(D, D[:, 3], 1)
    assert s.support == (3,)
    assert s.values[0] == pytest.approx(1.0)


def test_coefficients_in_original_scale():
    D = unit_gaussian(8, 16, 2) * np.arange(1, 17)
    s = omp(D, 2.0 * D[:, 5], 1)
    assert s.support == (5,) and s.values[0] == pytest.approx(2.0)


def test_two_sparse_recovery_gaussian():
    # a 16x32 Gaussian dictionary has mu near 0.75, so the coherence bound
    # (1 + 1/mu) / 2 only covers k = 1; recovery at k = 2 is checked empirically
    D = unit_gaussian(16, 32, 6)
    assert (1 + 1 / linalg.mutual_coherence(D)) / 2 < 2
    x = np.zeros(32)
    x[[4, 19]] = [1.5, -0.7]
    s = omp(D, D @ x, 2)
    assert s.support == (4, 19)
    assert np.allclose(s.to_dense(), x, atol=1e-8)


def test_recovery_guarantee_many_instances():
    # well-conditioned dictionary: orthonormal basis pair, mu = 1/sqrt(n)
    n = 16
    rng = np.random.default_rng(11)
    from bcs.bases import dct_basis

    D = np.hstack([np.eye(n), dct_basis(n)])
    mu = linalg.mutual_coherence(D)
    kmax = int((1 + 1 / mu) / 2)
    for _ in range(100):
        k = int(rng.integers(1, kmax + 1))
        x = np.zeros(2 * n)
        sup = rng.choice(2 * n, k, replace=False)
        x[sup] = rng.standard_normal(k) + np.sign(rng.standard_normal(k))
        assert set(omp(D, D @ x, k).support) == set(sup.tolist())


def test_matches_naive_oracle():
    rng = np.random.default_rng(12)
    D = rng.standard_normal((20, 45)) * rng.uniform(0.5, 2.0, 45)
    B = rng.standard_normal((20, 30))
    for k in (1, 3, 7):
        C = omp_coefficients(D, B, k)
        for j in range(B.shape[1]):
            ref = naive_omp(D, B[:, j], k, 1e-10 * np.linalg.norm(B[:, j]))
            assert np.allclose(C[:, j], ref, atol=1e-10)


def test_matches_sklearn():
    sk = pytest.importorskip("sklearn.linear_model")
    rng = np.random.default_rng(13)
    D = unit_gaussian(30, 40, 13)
    B = rng.standard_normal((30, 10))
    ref = sk.orthogonal_mp(D, B, n_nonzero_coefs=5)
    assert np.allclose(omp_coefficients(D, B, 5), ref, atol=1e-8)


def test_batch_equals_single():
    rng = np.random.default_rng(14)
    D = rng.standard_normal((10, 20))
    B = rng.standard_normal((10, 6))
    S = omp_batch(D, B, 4)
    for j in range(6):
        assert S.columns[j] == omp(D, B[:, j], 4)
    assert omp_batch(D, B[:, :1], 4).columns[0] == omp(D, B[:, 0], 4)


def test_planted_one_sparse_batch():
    D = np.eye(8)
    rng = np.random.default_rng(15)
    S = np.zeros((8, 12))
    S[rng.integers(0, 8, 12), np.arange(12)] = rng.standard_normal(12)
    assert np.allclose(omp_batch(D, D @ S, 1).to_dense(), S)


def test_residual_non_increasing_in_k():
    rng = np.random.default_rng(16)
    D = rng.standard_normal((12, 30))
    B = rng.standard_normal((12, 8))
    prev = np.linalg.norm(B, axis=0)
    for k in range(1, 13):
        r = np.linalg.norm(B - D @ omp_coefficients(D, B, k), axis=0)
        assert np.all(r <= prev + 1e-12)
        prev = r


def test_support_bounded_and_deterministic():
    rng = np.random.default_rng(17)
    D = rng.standard_normal((10, 25))
    B = rng.standard_normal((10, 9))
    S1 = omp_batch(D, B, 3)
    S2 = omp_batch(D, B, 3)
    assert np.all(S1.support_sizes() <= 3)
    assert S1 == S2


def test_tie_goes_to_lowest_index():
    D = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    s = omp(D, np.array([1.0, 0.0]), 1)
    assert s.support == (0,)


def test_residual_tol_stops_early():
    D = np.eye(4)
    b = np.array([3.0, 2.0, 0.1, 0.0])
    assert omp(D, b, 4, residual_tol=0.5).support == (0, 1)


def test_singular_support_flagged():
    # the second atom differs from the first by 1e-11: once one is chosen the
    # other still correlates with the residual but adds no usable direction
    D = np.array([[1.0, 1.0], [0.0, 1e-11]])
    b = np.array([1.0, 1.0])
    with pytest.warns(SingularSupportWarning):
        C = omp_coefficients(D, b, 2)
    assert np.all(np.isfinite(C))
    S = omp_batch(D, np.column_stack([b, [1.0, 0.0]]), 2)
    assert S.singular_columns == (0,)


def test_errors():
    with pytest.raises(ZeroColumn):
        omp(np.array([[1.0, 0.0], [0.0, 0.0]]), np.ones(2), 1)
    with pytest.raises(DimensionMismatch):
        omp(np.eye(3), np.ones(2), 1)
    with pytest.raises(ValueError):
        omp(np.eye(3), np.ones(3), 4)


def test_sparse_types():
    v = SparseVector.from_dense([0.0, 2.0, 0.0, -1.0])
    assert v.support == (1, 3) and v.values == (2.0, -1.0) and v.dim == 4
    assert np.array_equal(v.to_dense(), [0, 2, 0, -1])
    with pytest.raises(ValueError):
        SparseVector(3, (2, 1), (1.0, 1.0))
    with pytest.raises(ValueError):
        SparseVector(3, (0,), (0.0,))
    with pytest.raises(ValueError):
        KSparseMatrix.from_dense(np.ones((3, 2)), k_max=2)
