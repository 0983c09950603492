"""Blind recovery when the sparsity basis belongs to a known finite catalog.

Each signal is sparse-coded under every candidate basis; the signal votes
for the basis giving the sparsest code (or the smallest residual at fixed
sparsity) and the ensemble adopts the plurality vote.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BCSError, DimensionMismatch, NoCandidate, SingularSupportWarning
from .linalg import as_matrix
from .omp import SparseVector, omp_coefficients

__all__ = ["FbcsResult", "FbcsSingle", "Mode", "fbcs_ensemble", "fbcs_single"]


class Mode(enum.Enum):
    """Per-signal selection rule.

    SPARSEST searches every basis and picks the fewest nonzeros.
    SPARSEST_FIRST stops at the first basis (catalog order) whose code has
    at most k nonzeros, which is only equivalent when no other basis admits
    a k-sparse code. MIN_RESIDUAL codes with exactly k atoms and picks the
    smallest residual.
    """

    SPARSEST = "sparsest"
    SPARSEST_FIRST = "sparsest-first"
    MIN_RESIDUAL = "min-residual"


@dataclass(frozen=True)
class SignalVote:
    basis_vote: str
    coeffs: SparseVector
    residual: float


@dataclass(frozen=True)
class FbcsSingle:
    basis: str
    s: SparseVector
    x: np.ndarray


@dataclass
class FbcsResult:
    """Outcome of an ensemble run.

    `X` holds every signal reconstructed under `chosen_basis`, including the
    ones that voted for another basis.
    """

    chosen_basis: str
    per_signal: list
    votes: np.ndarray
    X: np.ndarray
    S: np.ndarray

    @property
    def miss_detected_fraction(self):
        if len(self.per_signal) == 0:
            return 0.0
        return float(np.mean([v.basis_vote != self.chosen_basis for v in self.per_signal]))

    def correct_mask(self, basis=None):
        """Signals whose vote matches `basis` (default: the chosen one)."""
        name = self.chosen_basis if basis is None else basis
        return np.array([v.basis_vote == name for v in self.per_signal], dtype=bool)


def _code_all(B, A, catalog, k, mode, residual_tol=None):
    """Sparse-code every column under every basis.

    Returns coefficient arrays, residual norms and support sizes, each
    indexed by basis; None entries mark bases whose solve failed.
    """
    n = A.shape[0]
    coeffs, residuals, sizes = [], [], []
    for _, P in catalog.items():
        D = A @ P
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SingularSupportWarning)
                if mode is not Mode.MIN_RESIDUAL:
                    C = omp_coefficients(D, B, n, residual_tol)
                else:
                    C = omp_coefficients(D, B, k, residual_tol)
        except BCSError:
            coeffs.append(None)
            residuals.append(None)
            sizes.append(None)
            continue
        coeffs.append(C)
        residuals.append(np.linalg.norm(B - D @ C, axis=0))
        sizes.append(np.count_nonzero(C, axis=0))
    if all(c is None for c in coeffs):
        raise NoCandidate("sparse coding failed under every basis")
    return coeffs, residuals, sizes


def _vote(residuals, sizes, k, mode):
    """Index of the winning basis for every column (ties to the lowest index)."""
    valid = [i for i, r in enumerate(residuals) if r is not None]
    if mode is Mode.MIN_RESIDUAL:
        R = np.vstack([residuals[i] for i in valid])
        return np.asarray(valid)[np.argmin(R, axis=0)]
    Z = np.vstack([sizes[i] for i in valid])
    if mode is Mode.SPARSEST:
        return np.asarray(valid)[np.argmin(Z, axis=0)]
    # stop at the first basis sparse enough; otherwise the sparsest overall
    sparse_enough = Z <= k
    first_ok = np.argmax(sparse_enough, axis=0)
    pick = np.where(sparse_enough.any(axis=0), first_ok, np.argmin(Z, axis=0))
    return np.asarray(valid)[pick]


def _check_dims(A, catalog, k):
    if A.shape[1] != catalog.dim:
        raise DimensionMismatch(f"A has {A.shape[1]} columns, catalog dim is {catalog.dim}")
    if k < 1:
        raise ValueError("k must be at least 1")


def fbcs_single(b, A, catalog, k, mode=Mode.SPARSEST, residual_tol=None):
    """Recover one signal `b`; returns the winning basis name, code and signal.

    In the sparsest modes OMP runs until the residual drops to
    `residual_tol` (default ``1e-10 * ||b||``); with noisy data pass the
    expected noise norm.
    """
    A = as_matrix(A, "A")
    _check_dims(A, catalog, k)
    b = np.asarray(b, dtype=float).ravel()
    coeffs, residuals, sizes = _code_all(b[:, None], A, catalog, k, mode, residual_tol)
    win = int(_vote(residuals, sizes, k, mode)[0])
    c = coeffs[win][:, 0]
    return FbcsSingle(catalog.names[win], SparseVector.from_dense(c), catalog.matrices[win] @ c)


def fbcs_ensemble(B, A, catalog, k, mode=Mode.SPARSEST, residual_tol=None):
    """Recover the columns of `B`, all assumed sparse under one catalog basis.

    `residual_tol` (scalar or per column) is the OMP stopping residual; see
    :func:`fbcs_single`.
    """
    A = as_matrix(A, "A")
    _check_dims(A, catalog, k)
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    coeffs, residuals, sizes = _code_all(B, A, catalog, k, mode, residual_tol)
    votes = _vote(residuals, sizes, k, mode)
    counts = np.bincount(votes, minlength=len(catalog))
    chosen = int(np.argmax(counts))
    per_signal = [
        SignalVote(catalog.names[v], SparseVector.from_dense(coeffs[v][:, j]), float(residuals[v][j]))
        for j, v in enumerate(votes)
    ]
    S = coeffs[chosen]
    X = catalog.matrices[chosen] @ S
    return FbcsResult(catalog.names[chosen], per_signal, votes, X, S)
