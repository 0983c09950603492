import itertools
import math

import numpy as np
import pytest
from scipy.linalg import expm

from bcs.blocks import BlockDiagOrthoBasis
from bcs.errors import DimensionMismatch, DivisibilityError
from bcs.obd import (
    admissible_permutation_count,
    basis_update_block,
    hard_threshold,
    match_signed_permutation,
    obd_bcs,
    orthogonal_dl,
)
from bcs.synth import gen_block_diag_basis, gen_sparse_matrix, gen_union_ortho, random_orthogonal, recon_error
from oracles import is_block_diagonal


def ortho_err(Q):
    return np.max(np.abs(Q.T @ Q - np.eye(Q.shape[0])))


# ------------------------------------------------------------ Procrustes step

def test_basis_update_trivial_cases():
    n = 4
    # R = S B^T A = I when B = A S with S = A = I
    assert np.allclose(basis_update_block(np.eye(n), np.eye(n), np.eye(n)), np.eye(n))
    D = np.diag([3.0, 2.0, 1.0, 0.5])
    assert np.allclose(basis_update_block(D, np.eye(n), np.eye(n)), np.eye(n))


def test_basis_update_recovers_planted_block():
    rng = np.random.default_rng(0)
    A_h = random_orthogonal(8, rng)[:, :4]
    P = random_orthogonal(4, rng)
    S = rng.standard_normal((4, 50))
    assert np.allclose(basis_update_block(S, A_h @ P @ S, A_h), P)


def test_basis_update_rank_deficient_still_orthogonal():
    S = np.zeros((4, 6))
    S[0] = 1.0
    Q = basis_update_block(S, np.ones((4, 6)), np.eye(4))
    assert ortho_err(Q) < 1e-12


def test_basis_update_monte_carlo_maximality():
    # Tr[R P] over orthogonal P is maximized by the returned V U^T
    rng = np.random.default_rng(7)
    R = rng.standard_normal((4, 4))
    S, B, A = R, np.eye(4), np.eye(4)
    P = basis_update_block(S, B, A)
    best = np.trace(R @ P)
    cands = np.linalg.qr(rng.standard_normal((100_000, 4, 4)))[0]
    values = np.einsum("ij,bji->b", R, cands)
    assert values.max() <= best + 1e-12
    assert best == pytest.approx(np.linalg.svd(R, compute_uv=False).sum())
    # local check: small rotations of the answer never improve it
    for _ in range(200):
        K = rng.standard_normal((4, 4)) * 1e-3
        Q = P @ expm(K - K.T)
        assert np.trace(R @ Q) <= best + 1e-12


def test_basis_update_dimension_check():
    with pytest.raises(DimensionMismatch):
        basis_update_block(np.ones((3, 5)), np.ones((4, 5)), np.ones((4, 4)))


# ------------------------------------------------------------ OBD-BCS

def test_obd_zero_input():
    A = gen_union_ortho(8, 2, 0)
    res = obd_bcs(np.zeros((8, 5)), A, 2)
    assert res.converged and res.iterations == 1
    assert np.all(res.X == 0)


def test_obd_planted_one_sparse_exact():
    for seed in range(5):
        A = gen_union_ortho(16, 2, seed)
        P = gen_block_diag_basis(16, 2, seed + 50)
        X = P.matrix @ gen_sparse_matrix(32, 300, 1, seed + 99)
        res = obd_bcs(A.matrix @ X, A, 1)
        assert recon_error(X, res.X).mean < 1e-10
        assert res.converged


def test_obd_objective_and_orthogonality_trace():
    A = gen_union_ortho(8, 2, 3)
    X = gen_block_diag_basis(8, 2, 4).matrix @ gen_sparse_matrix(16, 200, 2, 5)
    B = A.matrix @ X
    res = obd_bcs(B, A, 2, X_true=X)
    objs = [e.objective for e in res.trace]
    assert all(b <= a + 1e-9 * max(a, 1) for a, b in zip(objs, objs[1:]))
    for e in res.trace:
        assert e.objective <= e.objective_coded + 1e-9
        assert e.ortho_error < 1e-8
        assert not math.isnan(e.error)
    state = res.state(2)
    recomputed = np.sum((B - A.matrix @ state.P.matrix @ state.S.to_dense()) ** 2)
    assert recomputed == pytest.approx(state.objective, rel=1e-9, abs=1e-12)


def test_obd_init_and_errors():
    A = gen_union_ortho(8, 2, 0)
    P = gen_block_diag_basis(8, 2, 1)
    X = P.matrix @ gen_sparse_matrix(16, 100, 1, 2)
    res = obd_bcs(A.matrix @ X, A, 1, init=P)
    assert recon_error(X, res.X).mean < 1e-10
    with pytest.raises(DimensionMismatch):
        obd_bcs(np.ones((6, 3)), A, 1)
    with pytest.raises(DimensionMismatch):
        obd_bcs(A.matrix @ X, A, 1, init=[np.eye(4)])
    with pytest.raises(TypeError):
        obd_bcs(np.ones((8, 3)), A.matrix, 1)


def test_obd_multiplicity_four():
    A = gen_union_ortho(8, 2, 0)
    P = gen_block_diag_basis(8, 2, 1, multiplicity=4)
    X = P.matrix @ gen_sparse_matrix(16, 200, 1, 2)
    res = obd_bcs(A.matrix @ X, A, 1, multiplicity=4)
    assert res.P.n_blocks == 8
    assert recon_error(X, res.X).mean < 1e-8


# ------------------------------------------------------------ orthogonal DL

def test_hard_threshold():
    S = np.array([[3.0, 1.0], [-5.0, 1.0], [1.0, 1.0]])
    assert np.array_equal(hard_threshold(S, 1), [[0, 1], [-5, 0], [0, 0]])
    assert np.array_equal(hard_threshold(S, 3), S)


def test_dl_plant_and_recover():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        P = random_orthogonal(8, rng)
        X = P @ gen_sparse_matrix(8, 400, 2, seed=seed + 100)
        res = orthogonal_dl(X, 2, max_iter=200)
        assert ortho_err(res.P) < 1e-8
        assert match_signed_permutation(P, res.P)[2] < 1e-6


def test_dl_full_sparsity():
    X = np.random.default_rng(1).standard_normal((6, 20))
    res = orthogonal_dl(X, 6)
    assert np.allclose(res.P @ res.S.to_dense(), X)


def test_dl_identity_input():
    res = orthogonal_dl(np.eye(5), 1)
    perm, signs, dist = match_signed_permutation(np.eye(5), res.P)
    assert dist < 1e-12


def test_dl_blocks():
    P = gen_block_diag_basis(8, 1, 3).matrix
    X = P @ gen_sparse_matrix(8, 500, 1, seed=4)
    res = orthogonal_dl(X, 1, blocks=2)
    assert is_block_diagonal(res.P, 4)
    assert match_signed_permutation(P, res.P)[2] < 1e-6
    with pytest.raises(DivisibilityError):
        orthogonal_dl(X, 1, blocks=3)


def test_signed_permutation_matching():
    rng = np.random.default_rng(5)
    P = random_orthogonal(6, rng)
    perm = rng.permutation(6)
    signs = rng.choice([-1.0, 1.0], 6)
    Q = np.empty_like(P)
    Q[:, perm] = P * signs
    got_perm, got_signs, dist = match_signed_permutation(P, Q)
    assert np.array_equal(got_perm, perm)
    assert np.array_equal(got_signs, signs)
    assert dist < 1e-12


# ------------------------------------------------------------ permutation count

def brute_force_admissible(m, L):
    size = m // (2 * L)
    P = BlockDiagOrthoBasis([random_orthogonal(size, np.random.default_rng(i)) for i in range(2 * L)]).matrix
    count = 0
    for perm in itertools.permutations(range(m)):
        if is_block_diagonal(P[:, list(perm)], size):
            count += 1
    return count


def test_admissible_count():
    assert admissible_permutation_count(16, 2) == 331776 == 24**4
    assert admissible_permutation_count(4, 1) == 4 == brute_force_admissible(4, 1)
    assert admissible_permutation_count(6, 1) == brute_force_admissible(6, 1) == 36
    assert admissible_permutation_count(8, 4) == 1
    pct = 100 * admissible_permutation_count(16, 2) / math.factorial(16)
    # 1.5857e-6 %: the three leading digits are 1.58
    assert math.floor(pct * 1e8) == 158
    with pytest.raises(DivisibilityError):
        admissible_permutation_count(10, 2)
