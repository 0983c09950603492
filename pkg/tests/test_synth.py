import math

import numpy as np
import pytest

from bcs import linalg, synth
from bcs.errors import DimensionMismatch, ZeroColumn, ZeroSignal


def test_sparse_matrix_edges():
    assert np.array_equal(synth.gen_sparse_matrix(5, 4, 0, seed=0), np.zeros((5, 4)))
    S = synth.gen_sparse_matrix(5, 4, 5, seed=0)
    assert np.all(S != 0)
    with pytest.raises(ValueError):
        synth.gen_sparse_matrix(3, 2, 4, seed=0)


def test_sparse_matrix_statistics():
    S = synth.gen_sparse_matrix(64, 100, 6, seed=3)
    sizes = np.count_nonzero(S, axis=0)
    assert np.all(sizes == 6)
    vals = S[S != 0]
    n = vals.size
    # mean and variance of 600 standard normals, 3-sigma bands
    assert abs(vals.mean()) < 3 / math.sqrt(n)
    assert abs(vals.var() - 1) < 3 * math.sqrt(2 / n)


def test_sparse_matrix_up_to_k():
    S = synth.gen_sparse_matrix(64, 500, 6, seed=4, exact=False)
    sizes = np.count_nonzero(S, axis=0)
    assert sizes.min() == 1 and sizes.max() == 6
    K = synth.gen_sparse_matrix_k(64, 10, 6, seed=4)
    assert K.k_max == 6 and np.all(K.support_sizes() == 6)


def test_determinism_and_independence():
    a = synth.gen_sparse_matrix(16, 8, 3, seed=11)
    b = synth.gen_sparse_matrix(16, 8, 3, seed=11)
    c = synth.gen_sparse_matrix(16, 8, 3, seed=12)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    assert synth.trial_seed(0, 1, 2) == synth.trial_seed(0, 1, 2)
    assert len({synth.trial_seed(0, t) for t in range(50)}) == 50
    assert synth.trial_seed(0, 1) != synth.trial_seed(1, 1)


def test_union_ortho():
    U = synth.gen_union_ortho(8, 1, 0)
    assert U.L == 1 and np.allclose(U.blocks[0].T @ U.blocks[0], np.eye(8))
    U = synth.gen_union_ortho(8, 3, 1)
    assert U.matrix.shape == (8, 24)
    for blk in U.blocks:
        assert np.max(np.abs(blk.T @ blk - np.eye(8))) < 1e-8
    with pytest.raises(DimensionMismatch):
        synth.gen_union_ortho(7, 2, 0)


def test_block_diag_basis():
    P = synth.gen_block_diag_basis(32, 2, seed=0)
    assert P.n_blocks == 4 and P.block_size == 16
    for blk in P.blocks:
        assert np.max(np.abs(blk.T @ blk - np.eye(16))) < 1e-8
    M = P.matrix
    assert np.count_nonzero(M[:16, 16:]) == 0
    assert np.array_equal(synth.gen_block_diag_basis(8, 2, seed=5, identity=True).matrix, np.eye(16))


def test_fixed_tiled_basis():
    P = synth.fixed_tiled_basis(64, 2).matrix
    assert P.shape == (128, 128)
    expected = np.kron(np.eye(64), np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2))
    assert np.array_equal(P, expected)


def test_sparse_basis_matrix():
    Z = synth.gen_sparse_basis_matrix(256, 6, seed=0)
    assert linalg.numerical_rank(Z) == 256
    assert np.count_nonzero(Z, axis=0).max() <= 6
    Z = synth.gen_sparse_basis_matrix(32, 3, seed=1, exact=True)
    assert np.all(np.count_nonzero(Z, axis=0) == 3)


def test_noise_exact_snr():
    rng = np.random.default_rng(0)
    B = rng.standard_normal((10, 20))
    for snr in (30.0, 20.0, 5.0, -3.0):
        noisy = synth.add_noise_snr(B, snr, seed=1)
        assert synth.measured_snr_db(B, noisy) == pytest.approx(snr, abs=1e-9)
    noisy = synth.add_noise_snr(B, 20.0, seed=1, scope="column")
    per = 10 * np.log10(np.sum(B**2, axis=0) / np.sum((noisy - B) ** 2, axis=0))
    assert np.allclose(per, 20.0)


def test_noise_edges():
    B = np.ones((3, 2))
    assert np.array_equal(synth.add_noise_snr(B, math.inf, seed=0), B)
    assert np.array_equal(synth.add_noise_snr(B, 10, seed=4), synth.add_noise_snr(B, 10, seed=4))
    with pytest.raises(ZeroSignal):
        synth.add_noise_snr(np.zeros((3, 2)), 10, seed=0)
    with pytest.raises(ZeroSignal):
        synth.add_noise_snr(np.array([[1.0, 0.0]]), 10, seed=0, scope="column")
    with pytest.raises(ValueError):
        synth.add_noise_snr(B, 10, seed=0, scope="rows")


def test_noise_norm_estimate():
    rng = np.random.default_rng(2)
    B = rng.standard_normal((400, 50))
    noisy = synth.add_noise_snr(B, 10.0, seed=3, scope="column")
    est = synth.noise_norm_estimate(noisy, 10.0)
    true = np.linalg.norm(noisy - B, axis=0)
    assert np.all(np.abs(est / true - 1) < 0.15)
    assert np.allclose(synth.noise_norm_estimate(B, math.inf), 1e-10 * np.linalg.norm(B, axis=0))


def test_recon_error():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((6, 4))
    assert synth.recon_error(X, X).mean == 0
    err = synth.recon_error(X, 2 * X)
    assert np.allclose(err.per_signal, 1.0)
    Xhat = X.copy()
    Xhat[0, 2] += 0.3
    err = synth.recon_error(X, Xhat)
    assert err.per_signal[2] == pytest.approx(0.3 / np.linalg.norm(X[:, 2]))
    assert err.mean == pytest.approx(err.per_signal[2] / 4)
    with pytest.raises(ZeroColumn):
        synth.recon_error(np.zeros((2, 1)), np.zeros((2, 1)))
    with pytest.raises(DimensionMismatch):
        synth.recon_error(X, X[:, :2])
