"""Blind recovery when the basis is sparse under a known dictionary.

If ``P = Phi @ Z`` with `k_p`-sparse columns in `Z` and the signal code
is k-sparse, then ``c = Z s`` is ``k_p * k``-sparse and ``x = Phi c``:
the problem is ordinary sparse recovery over ``A @ Phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg import DEFAULT_BUDGET, DEFAULT_TOL, EXCEEDED, as_matrix, numerical_rank, spark_exact, spark_lower_bound
from .omp import KSparseMatrix, omp_coefficients

__all__ = ["SparseBcsResult", "sparse_bcs_direct", "uniqueness_condition_sparse"]


@dataclass
class SparseBcsResult:
    X: np.ndarray
    C: KSparseMatrix


def sparse_bcs_direct(B, A, Phi, k, k_p, residual_tol=None, check_rank=True):
    """Recover ``X = Phi @ C`` with ``C`` the column-wise ``k_p * k``-sparse OMP code of `B`."""
    A = as_matrix(A, "A")
    Phi = as_matrix(Phi, "Phi")
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if A.shape[1] != Phi.shape[0]:
        raise DimensionMismatch(f"A has {A.shape[1]} columns, Phi has {Phi.shape[0]} rows")
    if B.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"B has {B.shape[0]} rows, A has {A.shape[0]}")
    sparsity = k_p * k
    if sparsity > A.shape[0]:
        raise ValueError(f"k_p * k = {sparsity} exceeds the {A.shape[0]} measurements")
    if check_rank and numerical_rank(Phi) != Phi.shape[0]:
        raise ValueError("Phi must have full row rank")
    C = omp_coefficients(A @ Phi, B, sparsity, residual_tol)
    return SparseBcsResult(Phi @ C, KSparseMatrix.from_dense(C, k_max=sparsity))


def uniqueness_condition_sparse(A, Phi, k, k_p, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET, generic=False):
    """Check ``spark(A @ Phi) >= 2 * k_p * k``.

    The exact spark is used when it fits in `budget`; otherwise the
    coherence lower bound. With ``generic=True`` an out-of-budget spark is
    instead taken as ``rows + 1`` whenever ``A @ Phi`` has full row rank,
    which holds with probability one for Gaussian `A` and orthogonal `Phi`
    but is not verified.
    """
    need = 2 * k_p * k
    if need == 0:
        return True
    D = as_matrix(A, "A") @ as_matrix(Phi, "Phi")
    spark = spark_exact(D, tol, budget)
    if spark is EXCEEDED:
        if generic and numerical_rank(D, tol) == min(D.shape):
            spark = D.shape[0] + 1 if D.shape[1] > D.shape[0] else math.inf
        else:
            spark = spark_lower_bound(D)
    return spark >= need
