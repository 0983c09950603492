"""Seeded synthetic data, noise injection and reconstruction error.

Every generator takes an integer seed (or an existing ``numpy`` Generator)
and is bit-reproducible under identical seed and parameters. Per-trial
streams come from :func:`trial_seed`, which mixes a base seed with a
trial index through ``numpy.random.SeedSequence``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .blocks import BlockDiagOrthoBasis, UnionOrthoMatrix
from .errors import DimensionMismatch, ZeroColumn, ZeroSignal
from .linalg import gram_schmidt, numerical_rank
from .omp import KSparseMatrix

__all__ = [
    "add_noise_snr",
    "fixed_tiled_basis",
    "gen_block_diag_basis",
    "gen_sparse_basis_matrix",
    "gen_sparse_matrix",
    "gen_sparse_matrix_k",
    "gen_union_ortho",
    "measured_snr_db",
    "noise_norm_estimate",
    "random_orthogonal",
    "ReconError",
    "recon_error",
    "rng_from",
    "trial_seed",
]


def rng_from(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_seed(seed, *keys):
    """Derive an independent 64-bit seed from a base seed and integer keys."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def gen_sparse_matrix(m, N, k, seed, exact=True):
    """Dense ``m x N`` matrix with k-sparse columns and standard normal values.

    With ``exact=False`` each column's support size is drawn uniformly from
    ``1..k`` ("up to k" nonzeros).
    """
    if not 0 <= k <= m:
        raise ValueError(f"k={k} must lie in [0, {m}]")
    rng = rng_from(seed)
    S = np.zeros((m, N))
    if k == 0:
        return S
    sizes = np.full(N, k) if exact else rng.integers(1, k + 1, size=N)
    for j in range(N):
        rows = rng.choice(m, size=sizes[j], replace=False)
        S[rows, j] = rng.standard_normal(sizes[j])
    return S


def gen_sparse_matrix_k(m, N, k, seed, exact=True):
    """:func:`gen_sparse_matrix` wrapped as a :class:`KSparseMatrix`."""
    return KSparseMatrix.from_dense(gen_sparse_matrix(m, N, k, seed, exact), k_max=k)


def random_orthogonal(n, rng):
    """Gaussian matrix followed by Gram-Schmidt."""
    return gram_schmidt(rng.standard_normal((n, n)))


def gen_union_ortho(n, L, seed):
    if n % 2:
        raise DimensionMismatch(f"n must be even, got {n}")
    rng = rng_from(seed)
    return UnionOrthoMatrix([random_orthogonal(n, rng) for _ in range(L)])


def gen_block_diag_basis(n, L, seed, identity=False, multiplicity=2):
    """Orthogonal basis with ``multiplicity * L`` random blocks of size ``n / multiplicity``."""
    if n % multiplicity:
        raise DimensionMismatch(f"n={n} is not divisible by {multiplicity}")
    size = n // multiplicity
    count = multiplicity * L
    if identity:
        return BlockDiagOrthoBasis.identity(count, size)
    rng = rng_from(seed)
    return BlockDiagOrthoBasis([random_orthogonal(size, rng) for _ in range(count)])


def fixed_tiled_basis(n, L, multiplicity=2):
    """Block-diagonal basis tiled with ``[[1, -1], [1, 1]] / sqrt(2)`` rotations,
    grouped into ``multiplicity * L`` blocks of size ``n / multiplicity``."""
    size = n // multiplicity
    if size % 2:
        raise DimensionMismatch("block size must be even to tile 2x2 rotations")
    tile = np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2)
    block = np.kron(np.eye(size // 2), tile)
    return BlockDiagOrthoBasis([block.copy() for _ in range(multiplicity * L)])


def gen_sparse_basis_matrix(m, k_p, seed, exact=False, max_tries=100):
    """Full-rank ``m x m`` matrix with at most `k_p` normal nonzeros per column.

    Independent random supports leave empty rows at these sizes, so every
    column's support contains a distinct row drawn from a random
    permutation, plus further uniformly random rows. Redraws until the
    matrix is numerically full rank.
    """
    if not 1 <= k_p <= m:
        raise ValueError(f"k_p={k_p} must lie in [1, {m}]")
    rng = rng_from(seed)
    for _ in range(max_tries):
        anchor = rng.permutation(m)
        sizes = np.full(m, k_p) if exact else rng.integers(1, k_p + 1, size=m)
        Z = np.zeros((m, m))
        for j in range(m):
            others = rng.choice(np.delete(np.arange(m), anchor[j]), size=sizes[j] - 1, replace=False)
            rows = np.concatenate(([anchor[j]], others))
            Z[rows, j] = rng.standard_normal(sizes[j])
        if numerical_rank(Z) == m:
            return Z
    raise RuntimeError(f"no full-rank {k_p}-sparse {m}x{m} matrix in {max_tries} draws")


def measured_snr_db(B, noisy):
    W = noisy - B
    return 10 * math.log10(np.sum(B**2) / np.sum(W**2))


def add_noise_snr(B, snr_db, seed, scope="global"):
    """Add white Gaussian noise rescaled so ``10 log10(||B||^2 / ||W||^2) == snr_db``.

    With ``scope="global"`` the ratio holds over the whole matrix; with
    ``scope="column"`` it holds for every column separately. ``snr_db = inf``
    returns an unchanged copy.
    """
    B = np.asarray(B, dtype=float)
    if scope not in ("global", "column"):
        raise ValueError(f"unknown noise scope {scope!r}")
    if math.isinf(snr_db) and snr_db > 0:
        return B.copy()
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite or +inf, got {snr_db}")
    W = rng_from(seed).standard_normal(B.shape)
    gain = 10 ** (snr_db / 10)
    if scope == "global":
        energy = np.sum(B**2)
        if energy == 0:
            raise ZeroSignal("cannot set a finite SNR on an all-zero signal")
        W *= math.sqrt(energy / (np.sum(W**2) * gain))
    else:
        energy = np.sum(B**2, axis=0)
        if np.any(energy == 0):
            raise ZeroSignal(f"column {int(np.flatnonzero(energy == 0)[0])} is all zero")
        W *= np.sqrt(energy / (np.sum(W**2, axis=0) * gain))
    return B + W


def noise_norm_estimate(B_noisy, snr_db):
    """Per-column noise norm implied by a per-column SNR, from the noisy data alone.

    Uses ``E||b||^2 = ||b0||^2 (1 + 10^(-snr/10))``. The result is floored
    at ``1e-10 * ||b||`` (the default OMP stop), which is also what
    ``snr_db = inf`` returns.
    """
    B_noisy = np.asarray(B_noisy, dtype=float)
    norms = np.linalg.norm(B_noisy, axis=0)
    if math.isinf(snr_db):
        return 1e-10 * norms
    r = 10 ** (-snr_db / 20)
    return np.maximum(norms * r / math.sqrt(1 + r * r), 1e-10 * norms)


class ReconError(NamedTuple):
    per_signal: np.ndarray
    mean: float


def recon_error(X, Xhat):
    """Per-column relative errors ``||x_i - xhat_i|| / ||x_i||`` and their mean."""
    X = np.asarray(X, dtype=float)
    Xhat = np.asarray(Xhat, dtype=float)
    if X.shape != Xhat.shape:
        raise DimensionMismatch(f"shape {X.shape} vs {Xhat.shape}")
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0):
        raise ZeroColumn(f"column {int(np.flatnonzero(norms == 0)[0])} of X is zero")
    per = np.linalg.norm(X - Xhat, axis=0) / norms
    return ReconError(per, float(per.mean()))
