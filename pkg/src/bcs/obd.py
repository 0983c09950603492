"""Blind recovery under an orthogonal block-diagonal basis, and the
orthogonal dictionary-learning baseline.

The measurement matrix is a union of L orthogonal ``n x n`` blocks, the
basis has ``M * L`` orthogonal diagonal blocks (M = 2 by default), so the
effective dictionary ``A @ P`` is itself a union of orthogonal bases.
The solver alternates OMP sparse coding with one orthogonal Procrustes
update per basis block.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .blocks import BlockDiagOrthoBasis, UnionOrthoMatrix
from .errors import BlockOrthogonalityLost, DimensionMismatch, DivisibilityError, SingularSupportWarning
from .linalg import as_matrix, svd
from .omp import KSparseMatrix, omp_coefficients

__all__ = [
    "ObdResult",
    "ObdState",
    "ObdTraceEntry",
    "OrthoDlResult",
    "admissible_permutation_count",
    "basis_update_block",
    "hard_threshold",
    "match_signed_permutation",
    "obd_bcs",
    "orthogonal_dl",
]

DRIFT_TOL = 1e-6


@dataclass
class ObdState:
    P: BlockDiagOrthoBasis
    S: KSparseMatrix
    objective: float
    iteration: int


@dataclass(frozen=True)
class ObdTraceEntry:
    """Summary of one iteration.

    `objective_coded` is ``||B - A P S||_F^2`` right after sparse coding,
    `objective` the value after the basis sweep. `error` is the mean
    relative error against the planted signals, or NaN if none were given.
    """

    iteration: int
    objective_coded: float
    objective: float
    delta_P: float
    delta_S: float
    ortho_error: float
    error: float


@dataclass
class ObdResult:
    X: np.ndarray
    P: BlockDiagOrthoBasis
    S: np.ndarray
    trace: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        return len(self.trace)

    def state(self, k):
        return ObdState(self.P, KSparseMatrix.from_dense(self.S, k_max=k), self.trace[-1].objective if self.trace else 0.0, self.iterations)


def basis_update_block(S_i, B_i, A_i):
    """Orthogonal ``P`` minimizing ``||B_i - A_i P S_i||_F`` for ``A_i`` with orthonormal columns.

    With ``R = S_i B_i^T A_i = U diag(s) V^T`` the minimizer is ``V U^T``.
    `S_i` may be dense or a :class:`KSparseMatrix`.
    """
    if isinstance(S_i, KSparseMatrix):
        S_i = S_i.to_dense()
    S_i, B_i, A_i = (np.asarray(a, dtype=float) for a in (S_i, B_i, A_i))
    if A_i.shape[1] != S_i.shape[0] or A_i.shape[0] != B_i.shape[0] or S_i.shape[1] != B_i.shape[1]:
        raise DimensionMismatch(f"S_i {S_i.shape}, B_i {B_i.shape}, A_i {A_i.shape} are inconsistent")
    R = S_i @ (B_i.T @ A_i)
    U, _, V = svd(R)
    return V @ U.T


def _ortho_error(Q):
    return float(np.max(np.abs(Q.T @ Q - np.eye(Q.shape[0]))))


def _split(A, multiplicity):
    if isinstance(A, UnionOrthoMatrix):
        return A.half_blocks(multiplicity)
    raise TypeError("A must be a UnionOrthoMatrix")


def obd_bcs(
    B,
    A,
    k,
    max_iter=100,
    delta_tol=1e-6,
    keep_best=True,
    init=None,
    multiplicity=2,
    X_true=None,
):
    """Alternate OMP sparse coding and block-wise Procrustes basis updates.

    Starts from ``P = I`` unless `init` (a :class:`BlockDiagOrthoBasis` or a
    list of blocks) is given. With `keep_best`, a column keeps its previous
    coefficients whenever the new code has a larger residual, which makes
    the objective non-increasing across iterations. Stops after `max_iter`
    iterations or when both ``P`` and ``S`` move less than `delta_tol` in
    Frobenius norm.
    """
    if not isinstance(A, UnionOrthoMatrix):
        raise TypeError("A must be a UnionOrthoMatrix")
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if B.shape[0] != A.n:
        raise DimensionMismatch(f"B has {B.shape[0]} rows, A blocks are {A.n}x{A.n}")
    if A.n % multiplicity:
        raise DivisibilityError(f"n={A.n} is not divisible by {multiplicity}")
    halves = _split(A, multiplicity)
    size = A.n // multiplicity
    count = len(halves)
    if init is None:
        blocks = [np.eye(size) for _ in range(count)]
    else:
        blocks = [np.array(b, dtype=float) for b in (init.blocks if isinstance(init, BlockDiagOrthoBasis) else init)]
        if len(blocks) != count or any(b.shape != (size, size) for b in blocks):
            raise DimensionMismatch(f"init must hold {count} blocks of size {size}")
    if X_true is not None:
        X_true = np.asarray(X_true, dtype=float)
        true_norms = np.linalg.norm(X_true, axis=0)

    def dictionary():
        return np.hstack([Ah @ Pb for Ah, Pb in zip(halves, blocks)])

    def rows(i):
        return slice(i * size, (i + 1) * size)

    N = B.shape[1]
    S = np.zeros((A.n * A.L, N))
    trace = []
    converged = False
    for it in range(1, max_iter + 1):
        D = dictionary()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SingularSupportWarning)
            S_new = omp_coefficients(D, B, k)
        R_new = B - D @ S_new
        if keep_best and it > 1:
            R_old = B - D @ S
            worse = np.sum(R_new**2, axis=0) > np.sum(R_old**2, axis=0)
            S_new[:, worse] = S[:, worse]
            R_new[:, worse] = R_old[:, worse]
        objective_coded = float(np.sum(R_new**2))
        delta_S = float(np.linalg.norm(S_new - S))
        S = S_new

        # Gauss-Seidel sweep: the residual is kept current as blocks change
        residual = R_new
        delta_P2 = 0.0
        worst = 0.0
        for i in range(count):
            Ah, S_i = halves[i], S[rows(i)]
            contrib = Ah @ (blocks[i] @ S_i)
            B_i = residual + contrib
            R = S_i @ (B_i.T @ Ah)
            if np.any(R):
                U, _, V = svd(R)
                new = V @ U.T
            else:
                new = blocks[i]
            err = _ortho_error(new)
            if err > DRIFT_TOL:
                raise BlockOrthogonalityLost(f"block {i} drifted from orthogonality by {err:.3g}")
            worst = max(worst, err)
            delta_P2 += float(np.sum((new - blocks[i]) ** 2))
            residual = B_i - Ah @ (new @ S_i)
            blocks[i] = new
        objective = float(np.sum(residual**2))
        delta_P = math.sqrt(delta_P2)

        error = float("nan")
        if X_true is not None:
            Xhat = np.vstack([blocks[i] @ S[rows(i)] for i in range(count)])
            error = float(np.mean(np.linalg.norm(X_true - Xhat, axis=0) / true_norms))
        trace.append(ObdTraceEntry(it, objective_coded, objective, delta_P, delta_S, worst, error))
        if delta_P < delta_tol and delta_S < delta_tol:
            converged = True
            break

    P = BlockDiagOrthoBasis(blocks)
    X = np.vstack([blocks[i] @ S[rows(i)] for i in range(count)])
    return ObdResult(X, P, S, trace, converged)


def hard_threshold(S, k):
    """Keep the `k` largest-magnitude entries of every column (ties to the lowest index)."""
    S = np.asarray(S, dtype=float)
    if k >= S.shape[0]:
        return S.copy()
    order = np.argsort(-np.abs(S), axis=0, kind="stable")[:k]
    out = np.zeros_like(S)
    cols = np.arange(S.shape[1])
    out[order, cols] = S[order, cols]
    return out


@dataclass
class OrthoDlResult:
    P: np.ndarray
    S: KSparseMatrix
    iterations: int
    converged: bool


def orthogonal_dl(X, k, max_iter=100, delta_tol=1e-6, init=None, blocks=1):
    """Learn an orthogonal dictionary: threshold ``P^T X`` to k entries per column,
    then set ``P = V U^T`` from the SVD ``S X^T = U diag(s) V^T``; repeat.

    With ``blocks > 1`` the dictionary is constrained to that many equal
    diagonal blocks. Thresholding still acts on whole columns, and each
    block is updated from its own rows: ``S^i (X^i)^T = U diag(s) V^T``.
    Stops when ``P`` and ``S`` together move less than `delta_tol`.
    """
    X = as_matrix(X, "X")
    n = X.shape[0]
    if blocks < 1 or n % blocks:
        raise DivisibilityError(f"{blocks} blocks do not divide {n} rows")
    size = n // blocks
    P = np.eye(n) if init is None else np.array(init, dtype=float)
    if P.shape != (n, n):
        raise DimensionMismatch(f"init has shape {P.shape}, expected ({n}, {n})")
    S = hard_threshold(P.T @ X, k)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        P_new = np.zeros_like(P)
        for b in range(blocks):
            r = slice(b * size, (b + 1) * size)
            U, _, V = svd(S[r] @ X[r].T)
            P_new[r, r] = V @ U.T
        S_new = hard_threshold(P_new.T @ X, k)
        delta = math.hypot(np.linalg.norm(P_new - P), np.linalg.norm(S_new - S))
        P, S = P_new, S_new
        if delta < delta_tol:
            converged = True
            break
    return OrthoDlResult(P, KSparseMatrix.from_dense(S, k_max=k), it, converged)


def match_signed_permutation(P_ref, P_est):
    """Greedy signed-permutation matching of the columns of `P_est` to `P_ref`.

    Pairs are assigned in order of decreasing ``|<ref_i, est_j>|`` between
    unit-normalized columns. Returns ``(perm, signs, max_dist)`` where column
    ``i`` of `P_ref` matches ``signs[i] * P_est[:, perm[i]]`` and `max_dist`
    is the largest column distance after matching.
    """
    P_ref = as_matrix(P_ref, "P_ref")
    P_est = as_matrix(P_est, "P_est")
    if P_ref.shape != P_est.shape:
        raise DimensionMismatch(f"shape {P_ref.shape} vs {P_est.shape}")
    Rn = P_ref / np.linalg.norm(P_ref, axis=0)
    En = P_est / np.linalg.norm(P_est, axis=0)
    G = Rn.T @ En
    cols = P_ref.shape[1]
    perm = np.full(cols, -1)
    signs = np.ones(cols)
    used_r = np.zeros(cols, dtype=bool)
    used_e = np.zeros(cols, dtype=bool)
    for flat in np.argsort(-np.abs(G), axis=None, kind="stable"):
        i, j = divmod(int(flat), cols)
        if used_r[i] or used_e[j]:
            continue
        perm[i], signs[i] = j, 1.0 if G[i, j] >= 0 else -1.0
        used_r[i] = used_e[j] = True
        if used_r.all():
            break
    matched = P_est[:, perm] * signs
    return perm, signs, float(np.max(np.linalg.norm(P_ref - matched, axis=0)))


def admissible_permutation_count(m, L):
    """Number of column permutations that keep a ``2L``-block diagonal matrix block diagonal."""
    if m < 1 or L < 1 or m % (2 * L):
        raise DivisibilityError(f"2L={2 * L} does not divide m={m}")
    return math.factorial(m // (2 * L)) ** (2 * L)
