"""Randomized property checks (hypothesis)."""

import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bcs import linalg
from bcs.matrix_io import emit_matrix_csv, load_matrix_csv
from bcs.obd import admissible_permutation_count, basis_update_block, hard_threshold
from bcs.omp import omp_coefficients
from bcs.synth import add_noise_snr, measured_snr_db

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
seeds = st.integers(0, 2**32 - 1)
common = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def gaussian(seed, shape):
    return np.random.default_rng(seed).standard_normal(shape)


@common
@given(seeds, st.integers(1, 8), st.integers(0, 4))
def test_gram_schmidt_orthonormal(seed, cols, extra):
    Q = linalg.gram_schmidt(gaussian(seed, (cols + extra, cols)))
    assert np.max(np.abs(Q.T @ Q - np.eye(cols))) < 1e-10


@common
@given(seeds, st.integers(1, 6), st.integers(1, 8), st.integers(1, 6))
def test_rank_permutation_sign_invariant(seed, rows, cols, rank):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))
    perm = rng.permutation(cols)
    signs = rng.choice([-1.0, 1.0], cols)
    assert linalg.numerical_rank(M) == linalg.numerical_rank(M[:, perm] * signs) == min(rows, cols, rank)


@common
@given(seeds, st.integers(2, 5), st.integers(2, 7), st.booleans())
def test_spark_at_least_coherence_bound(seed, rows, cols, plant):
    D = gaussian(seed, (rows, cols))
    if plant and cols >= 3:
        D[:, -1] = D[:, 0] + D[:, 1]
    spark = linalg.spark_exact(D)
    assert spark >= linalg.spark_lower_bound(D) - 1e-9


@common
@given(seeds, st.integers(2, 12), st.integers(2, 20), st.integers(0, 12))
def test_omp_support_and_residual(seed, rows, cols, k):
    k = min(k, rows)
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((rows, cols))
    B = rng.standard_normal((rows, 3))
    C = omp_coefficients(D, B, k)
    assert np.all(np.count_nonzero(C, axis=0) <= k)
    assert np.all(np.linalg.norm(B - D @ C, axis=0) <= np.linalg.norm(B, axis=0) + 1e-12)


@common
@given(arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 10)), elements=finite),
       arrays(float, (6, 6), elements=finite))
def test_procrustes_always_orthogonal(S, A):
    h = S.shape[0]
    B = np.resize(A, (h, S.shape[1]))
    Q = basis_update_block(S, B, np.eye(h))
    assert np.max(np.abs(Q.T @ Q - np.eye(h))) < 1e-8


@common
@given(seeds, st.floats(-10, 60), st.sampled_from(["global", "column"]))
def test_noise_hits_requested_snr(seed, snr, scope):
    B = gaussian(seed, (8, 5))
    noisy = add_noise_snr(B, snr, seed + 1, scope=scope)
    if scope == "global":
        assert abs(measured_snr_db(B, noisy) - snr) < 1e-8
    else:
        W = noisy - B
        per = 10 * np.log10(np.sum(B**2, axis=0) / np.sum(W**2, axis=0))
        assert np.allclose(per, snr, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 5), st.integers(1, 5)),
              elements=st.floats(allow_nan=False, allow_infinity=False, width=64)))
def test_matrix_csv_round_trip(tmp_path_factory, M):
    path = tmp_path_factory.mktemp("csv") / "m.csv"
    emit_matrix_csv(M, path)
    back = load_matrix_csv(path)
    # repr keeps every bit, including the sign of zero
    assert back.tobytes() == M.tobytes()


@common
@given(st.integers(1, 4), st.integers(1, 5))
def test_permutation_count_formula(L, size):
    m = 2 * L * size
    assert admissible_permutation_count(m, L) == math.factorial(size) ** (2 * L)


@common
@given(arrays(float, st.tuples(st.integers(1, 8), st.integers(1, 6)), elements=finite), st.integers(0, 8))
def test_hard_threshold_keeps_largest(S, k):
    T = hard_threshold(S, k)
    assert np.all(np.count_nonzero(T, axis=0) <= k)
    kept = T != 0
    for j in range(S.shape[1]):
        dropped = np.abs(S[~kept[:, j], j])
        if kept[:, j].any() and dropped.size:
            assert dropped.max() <= np.abs(S[kept[:, j], j]).min()
