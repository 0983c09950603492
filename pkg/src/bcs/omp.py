"""Orthogonal matching pursuit for single vectors and signal ensembles."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SingularSupportWarning, ZeroColumn
from .linalg import DEFAULT_TOL, as_matrix

__all__ = ["KSparseMatrix", "SparseVector", "omp", "omp_batch", "omp_coefficients"]


@dataclass(frozen=True)
class SparseVector:
    dim: int
    support: tuple
    values: tuple

    def __post_init__(self):
        sup = tuple(int(i) for i in self.support)
        vals = tuple(float(v) for v in self.values)
        if len(sup) != len(vals):
            raise ValueError("support and values differ in length")
        if any(b <= a for a, b in zip(sup, sup[1:])):
            raise ValueError("support must be strictly increasing")
        if sup and not (0 <= sup[0] and sup[-1] < self.dim):
            raise ValueError(f"support index out of range [0, {self.dim})")
        if any(v == 0.0 for v in vals):
            raise ValueError("explicit zero in values")
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_dense(cls, x, zero_tol=DEFAULT_TOL.zero_tol):
        x = np.asarray(x, dtype=float).ravel()
        sup = np.flatnonzero(np.abs(x) > zero_tol)
        return cls(x.size, tuple(sup), tuple(x[sup]))

    def to_dense(self):
        x = np.zeros(self.dim)
        x[list(self.support)] = self.values
        return x

    def __len__(self):
        return len(self.support)


@dataclass
class KSparseMatrix:
    """Column-wise sparse matrix; every column has at most `k_max` nonzeros.

    ``singular_columns`` lists columns whose OMP re-fit was rank-deficient.
    """

    rows: int
    cols: int
    columns: list
    k_max: int
    singular_columns: tuple = field(default=())

    def __post_init__(self):
        if len(self.columns) != self.cols:
            raise ValueError("column count mismatch")
        for j, c in enumerate(self.columns):
            if c.dim != self.rows:
                raise ValueError(f"column {j} has dim {c.dim}, expected {self.rows}")
            if len(c) > self.k_max:
                raise ValueError(f"column {j} has {len(c)} nonzeros > k_max={self.k_max}")

    @classmethod
    def from_dense(cls, S, k_max=None, zero_tol=DEFAULT_TOL.zero_tol, singular_columns=()):
        S = np.asarray(S, dtype=float)
        cols = [SparseVector.from_dense(S[:, j], zero_tol) for j in range(S.shape[1])]
        if k_max is None:
            k_max = max((len(c) for c in cols), default=0)
        return cls(S.shape[0], S.shape[1], cols, k_max, tuple(singular_columns))

    def to_dense(self):
        S = np.zeros((self.rows, self.cols))
        for j, c in enumerate(self.columns):
            S[list(c.support), j] = c.values
        return S

    def support_sizes(self):
        return np.array([len(c) for c in self.columns], dtype=int)


def _unit_columns(D):
    norms = np.linalg.norm(D, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroColumn(f"dictionary column {zero[0]} is zero")
    return D / norms


def _orthogonalize(Q, a):
    """Two passes of Gram-Schmidt of the columns of `a` against stacked bases `Q`.

    `Q` has shape ``(batch, n, t)``, `a` shape ``(batch, n)``; returns the
    orthogonal remainder and the accumulated projection coefficients.
    """
    v = a.copy()
    proj = np.zeros(Q.shape[::2])
    for _ in range(2):
        c = np.einsum("bnt,bn->bt", Q, v)
        v -= np.einsum("bnt,bt->bn", Q, c)
        proj += c
    return v, proj


def omp_coefficients(D, B, k, residual_tol=None, return_singular=False):
    """Batched OMP returning a dense ``(cols(D), N)`` coefficient array.

    Each column of `B` is coded independently: at most `k` atoms are chosen
    greedily by largest absolute correlation with the residual (atoms
    compared after unit normalization, ties to the lowest index), the
    coefficients are the least-squares fit on the chosen support, and
    coding stops early once the residual norm is ``<= residual_tol``.
    `residual_tol` is a scalar or per-column array; by default
    ``1e-10 * ||b||``. The fit is maintained by an incremental QR
    factorization; a support whose new atom is numerically dependent on the
    previous ones is flagged singular and solved by minimum-norm least
    squares.
    """
    D = as_matrix(D, "D")
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    n, m = D.shape
    if B.shape[0] != n:
        raise DimensionMismatch(f"B has {B.shape[0]} rows, D has {n}")
    if not 0 <= k <= n:
        raise ValueError(f"k={k} must lie in [0, {n}]")
    N = B.shape[1]
    Dn = _unit_columns(D)
    atom_norm = np.linalg.norm(D, axis=0)
    if residual_tol is None:
        tol = 1e-10 * np.linalg.norm(B, axis=0)
    else:
        tol = np.broadcast_to(np.asarray(residual_tol, dtype=float), (N,)).copy()

    singular = np.zeros(N, dtype=bool)
    length = np.zeros(N, dtype=int)
    support = np.zeros((N, k), dtype=int)
    Q = np.zeros((N, n, k))
    R = np.zeros((N, k, k))
    qtb = np.zeros((N, k))
    scale = np.zeros(N)
    residual = B.copy()
    active = np.flatnonzero(np.linalg.norm(residual, axis=0) > tol)
    for t in range(k):
        if active.size == 0:
            break
        corr = np.abs(Dn.T @ residual[:, active])
        if t:
            np.put_along_axis(corr, support[active, :t].T, -1.0, axis=0)
        best = np.argmax(corr, axis=0)
        # residual already orthogonal to every atom: nothing left to explain
        stalled = corr[best, np.arange(active.size)] <= 1e-13 * np.linalg.norm(residual[:, active], axis=0)
        if np.any(stalled):
            keep = ~stalled
            active, best = active[keep], best[keep]
            if active.size == 0:
                break
        support[active, t] = best
        length[active] = t + 1
        scale[active] = np.maximum(scale[active], atom_norm[best])
        a = D[:, best].T
        v, proj = _orthogonalize(Q[active, :, :t], a)
        nu = np.linalg.norm(v, axis=1)
        dep = nu <= 1e-10 * scale[active]
        singular[active[dep]] = True
        nu_safe = np.where(dep, 1.0, nu)
        q = np.where(dep[:, None], 0.0, v / nu_safe[:, None])
        Q[active, :, t] = q
        R[active, :t, t] = proj
        R[active, t, t] = np.where(dep, 0.0, nu)
        qtb[active, t] = np.einsum("bn,bn->b", q, B[:, active].T)
        r = residual[:, active]
        r -= q.T * np.einsum("bn,nb->b", q, r)
        residual[:, active] = r
        done = np.linalg.norm(r, axis=0) <= tol[active]
        active = active[~done]

    C = np.zeros((m, N))
    regular = ~singular
    for t in np.unique(length[regular]):
        if t == 0:
            continue
        cols = np.flatnonzero(regular & (length == t))
        coef = np.linalg.solve(R[cols, :t, :t], qtb[cols, :t, None])[..., 0]
        C[support[cols, :t].T, cols[None, :]] = coef.T
    for j in np.flatnonzero(singular):
        sup = support[j, : length[j]]
        C[sup, j] = np.linalg.lstsq(D[:, sup], B[:, j], rcond=None)[0]

    if np.any(singular):
        warnings.warn(
            f"{int(singular.sum())} column(s) hit a rank-deficient support; "
            "minimum-norm least squares used",
            SingularSupportWarning,
            stacklevel=2,
        )
    if return_singular:
        return C, np.flatnonzero(singular)
    return C


def omp(D, b, k, residual_tol=None):
    """Sparse code of a single vector `b` over dictionary `D` (see :func:`omp_coefficients`)."""
    b = np.asarray(b, dtype=float).ravel()
    c = omp_coefficients(D, b[:, None], k, residual_tol)[:, 0]
    return SparseVector.from_dense(c)


def omp_batch(D, B, k, residual_tol=None):
    """Column-wise OMP of `B`; returns a :class:`KSparseMatrix`."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingularSupportWarning)
        C, singular = omp_coefficients(D, B, k, residual_tol, return_singular=True)
    return KSparseMatrix.from_dense(C, k_max=k, singular_columns=tuple(singular.tolist()))
