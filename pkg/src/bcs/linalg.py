"""Dense linear-algebra primitives and matrix-conditioning diagnostics.

Matrices are plain 2-D ``numpy`` float arrays throughout. The diagnostics
here (spark, coherence, rank preservation, inter-block diagonality,
richness of a sparse coefficient matrix) are the checks that decide
whether a blind recovery problem has a unique answer.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NotOrthogonalBlock,
    RankDeficient,
    ZeroColumn,
)

__all__ = [
    "EXCEEDED",
    "RichnessReport",
    "Tolerance",
    "as_matrix",
    "check_richness",
    "flip_null_component",
    "gram_schmidt",
    "is_inter_block_diagonal",
    "is_k_rank_preserving",
    "mutual_coherence",
    "numerical_rank",
    "spark_exact",
    "spark_lower_bound",
    "svd",
]

DEFAULT_BUDGET = 2_000_000
_BATCH = 4096


class _Exceeded:
    """Marker returned by combinatorial searches that ran out of budget."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EXCEEDED"

    def __bool__(self):
        raise TypeError("EXCEEDED has no truth value; compare with `is EXCEEDED`")


EXCEEDED = _Exceeded()


@dataclass(frozen=True)
class Tolerance:
    """Numerical cutoffs.

    ``rank_tol`` is relative to the largest singular value; ``zero_tol`` is
    an absolute entry-level (or residual-norm) zero test.
    """

    rank_tol: float = 1e-10
    zero_tol: float = 1e-12

    def __post_init__(self):
        if not (self.rank_tol > 0 and self.zero_tol > 0):
            raise ValueError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()


def as_matrix(M, name="matrix"):
    """Return `M` as a finite 2-D float array."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {M.shape}")
    if M.size == 0:
        raise DimensionMismatch(f"{name} must be non-empty")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains NaN or Inf")
    return M


def gram_schmidt(M, tol=DEFAULT_TOL):
    """Orthonormalize the columns of `M` (modified Gram-Schmidt, two passes).

    Raises RankDeficient when a column's residual after projection falls
    below ``tol.zero_tol`` (absolute) or ``tol.rank_tol`` times its
    original norm.
    """
    M = as_matrix(M)
    rows, cols = M.shape
    if cols > rows:
        raise RankDeficient(f"{cols} columns cannot be independent in R^{rows}")
    Q = np.zeros_like(M)
    for j in range(cols):
        v = M[:, j].copy()
        norm0 = np.linalg.norm(v)
        # second pass restores orthogonality lost to cancellation
        for _ in range(2):
            for i in range(j):
                v -= (Q[:, i] @ v) * Q[:, i]
        r = np.linalg.norm(v)
        if r <= tol.zero_tol or r <= tol.rank_tol * norm0:
            raise RankDeficient(f"column {j} is linearly dependent on earlier columns")
        Q[:, j] = v / r
    return Q


def svd(M):
    """Thin SVD ``M = U @ diag(s) @ V.T`` with non-increasing `s`."""
    M = as_matrix(M)
    try:
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return U, s, Vt.T


def _rank_from_singvals(s, tol, reference=None):
    """Rank along the last axis of stacked singular values."""
    s = np.asarray(s)
    top = s[..., :1] if reference is None else reference
    return np.sum(s > tol.rank_tol * top, axis=-1)


def numerical_rank(M, tol=DEFAULT_TOL, reference=None):
    """Number of singular values above ``tol.rank_tol * reference``.

    `reference` defaults to the largest singular value of `M`, so the zero
    matrix has rank 0. Passing an external reference lets sub-blocks be
    judged on the scale of the matrix they were cut from.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if reference is None:
        reference = s[0]
    if reference == 0:
        return 0
    return int(np.sum(s > tol.rank_tol * reference))


def _column_norms(D):
    norms = np.linalg.norm(D, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroColumn(f"column {zero[0]} is zero")
    return norms


def mutual_coherence(D):
    """Largest normalized absolute inner product between distinct columns."""
    D = as_matrix(D)
    if D.shape[1] < 2:
        raise DimensionMismatch("coherence needs at least two columns")
    Dn = D / _column_norms(D)
    G = np.abs(Dn.T @ Dn)
    np.fill_diagonal(G, 0.0)
    return float(min(G.max(), 1.0))


def spark_lower_bound(D):
    """Coherence bound ``1 + 1/mu(D)`` on the spark; ``inf`` for mu = 0."""
    mu = mutual_coherence(D)
    return math.inf if mu == 0 else 1.0 + 1.0 / mu


def _batched_ranks(D, subsets, tol):
    idx = np.asarray(subsets)
    s = np.linalg.svd(D[:, idx].transpose(1, 0, 2), compute_uv=False)
    return _rank_from_singvals(s, tol)


def spark_exact(D, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Smallest number of linearly dependent columns of `D`.

    Subset sizes are searched in increasing order. A wide matrix with no
    dependent subset of size ``<= rows`` has spark ``rows + 1`` (any
    ``rows + 1`` columns are dependent); a matrix of full column rank has
    no dependent subset at all and gets ``math.inf``, which keeps the
    coherence bound ``spark >= 1 + 1/mu`` valid. Returns EXCEEDED once the
    number of subsets to inspect would pass `budget`.
    """
    D = as_matrix(D)
    rows, cols = D.shape
    inspected = 0
    for size in range(1, min(rows, cols) + 1):
        count = math.comb(cols, size)
        if inspected + count > budget:
            return EXCEEDED
        inspected += count
        combos = itertools.combinations(range(cols), size)
        while True:
            chunk = list(itertools.islice(combos, _BATCH))
            if not chunk:
                break
            if size == 1:
                dependent = np.linalg.norm(D[:, [c[0] for c in chunk]], axis=0) <= tol.zero_tol
            else:
                dependent = _batched_ranks(D, chunk, tol) < size
            if np.any(dependent):
                return size
    return rows + 1 if cols > rows else math.inf


def is_k_rank_preserving(A, bases, k, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Whether ``rank(A [P_T, Q_J]) == rank([P_T, Q_J])`` for all k-subsets T, J
    and all basis pairs P, Q drawn from `bases`.

    Returns False at the first violation, EXCEEDED when the number of
    (pair, T, J) triples passes `budget`.
    """
    A = as_matrix(A, "A")
    bases = [as_matrix(P, "basis") for P in bases]
    m = A.shape[1]
    for P in bases:
        if P.shape != (m, m):
            raise DimensionMismatch(f"basis shape {P.shape} does not match A with {m} columns")
    pairs = list(itertools.combinations_with_replacement(range(len(bases)), 2))
    n_subsets = math.comb(m, k)
    if len(pairs) * n_subsets**2 > budget:
        return EXCEEDED
    subsets = np.array(list(itertools.combinations(range(m), k)))
    for i, j in pairs:
        P, Q = bases[i], bases[j]
        AP, AQ = A @ P, A @ Q
        for T in subsets:
            # all J at once: stack (len(subsets), rows, 2k)
            left = np.broadcast_to(P[:, T], (len(subsets), m, k))
            full = np.concatenate([left, Q[:, subsets].transpose(1, 0, 2)], axis=2)
            left_a = np.broadcast_to(AP[:, T], (len(subsets), A.shape[0], k))
            meas = np.concatenate([left_a, AQ[:, subsets].transpose(1, 0, 2)], axis=2)
            r_full = _rank_from_singvals(np.linalg.svd(full, compute_uv=False), tol)
            r_meas = _rank_from_singvals(np.linalg.svd(meas, compute_uv=False), tol)
            if np.any(r_full != r_meas):
                return False
    return True


def _blocks_of(A):
    blocks = getattr(A, "blocks", None)
    if blocks is None:
        raise TypeError("expected a UnionOrthoMatrix or an object with `.blocks`")
    return [as_matrix(b, "block") for b in blocks]


def is_inter_block_diagonal(A, tol=DEFAULT_TOL):
    """Whether some cross product ``A_i.T @ A_j`` (i != j) has the quadrant
    rank pattern ``rank R1 == rank R4`` and ``rank R2 == rank R3 == n/2 - rank R1``.

    Quadrant ranks are cut off relative to the largest singular value of the
    full product, so exactly-zero quadrants read as rank 0.
    """
    blocks = _blocks_of(A)
    n = blocks[0].shape[0]
    if n % 2:
        raise DimensionMismatch("block size must be even")
    for i, Ai in enumerate(blocks):
        if Ai.shape != (n, n) or np.max(np.abs(Ai.T @ Ai - np.eye(n))) > 1e-8:
            raise NotOrthogonalBlock(f"block {i} is not an orthogonal {n}x{n} matrix")
    h = n // 2
    for i, j in itertools.combinations(range(len(blocks)), 2):
        G = blocks[i].T @ blocks[j]
        ref = np.linalg.svd(G, compute_uv=False)[0]
        r1, r2, r3, r4 = (
            numerical_rank(R, tol, reference=ref)
            for R in (G[:h, :h], G[:h, h:], G[h:, :h], G[h:, h:])
        )
        if r1 == r4 and r2 == r3 == h - r1:
            return True
    return False


@dataclass(frozen=True)
class RichnessReport:
    """Verdicts for the four richness conditions on a sparse coefficient matrix.

    ``cond2`` is EXCEEDED when the support enumeration passes the budget.
    ``cond3_sampled`` / ``cond4_sampled`` mark verdicts reached on a random
    sample of column subsets rather than all of them; a sampled True is
    not a proof.
    """

    cond1: bool
    cond2: object
    cond3: bool
    cond4: bool
    cond3_sampled: bool = False
    cond4_sampled: bool = False


def _supports(S, zero_tol):
    return [tuple(np.flatnonzero(np.abs(S[:, j]) > zero_tol)) for j in range(S.shape[1])]


def _random_subsets(rng, pool, size, count, accept=None):
    """Draw `count` distinct-index subsets of `pool` (with replacement across draws)."""
    out = []
    tries = 0
    while len(out) < count and tries < 20 * count:
        tries += 1
        pick = tuple(sorted(rng.choice(pool, size=size, replace=False).tolist()))
        if accept is None or accept(pick):
            out.append(pick)
    return out


def check_richness(S, k, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET, seed=0):
    """Evaluate the richness conditions for `S` at sparsity `k`.

    1. every column has exactly k nonzeros;
    2. every k-subset of rows is the support of at least k+1 columns;
    3. any k+1 columns sharing a support span a k-dimensional space;
    4. any k+1 columns with differing supports span a (k+1)-dimensional space.

    Conditions 3 and 4 enumerate subsets up to `budget` and fall back to
    `budget` uniformly sampled subsets (seeded by `seed`) beyond it.
    """
    S = S.to_dense() if hasattr(S, "to_dense") else np.asarray(S, dtype=float)
    m, N = S.shape
    supports = _supports(S, tol.zero_tol)
    cond1 = all(len(sup) == k for sup in supports)

    if math.comb(m, k) * (k + 1) > budget:
        cond2 = EXCEEDED
    else:
        counts = Counter(sup for sup in supports if len(sup) == k)
        cond2 = len(counts) == math.comb(m, k) and all(c >= k + 1 for c in counts.values())

    rng = np.random.default_rng(seed)
    groups = defaultdict(list)
    for j, sup in enumerate(supports):
        groups[sup].append(j)

    # condition 3: within each support group
    same_total = sum(math.comb(len(g), k + 1) for g in groups.values())
    cond3_sampled = same_total > budget
    if cond3_sampled:
        big = [g for g in groups.values() if len(g) > k]
        weights = np.array([math.comb(len(g), k + 1) for g in big], dtype=float)
        picks = []
        if big:
            for gi in rng.choice(len(big), size=budget, p=weights / weights.sum()):
                picks.append(tuple(rng.choice(big[gi], size=k + 1, replace=False)))
        same_subsets = picks
    else:
        same_subsets = [c for g in groups.values() for c in itertools.combinations(g, k + 1)]
    cond3 = _all_ranks_equal(S, same_subsets, k, tol)

    # condition 4: subsets not confined to a single support
    def mixed(c):
        return len({supports[j] for j in c}) > 1

    mixed_total = math.comb(N, k + 1) - same_total
    cond4_sampled = mixed_total > budget
    if cond4_sampled:
        mixed_subsets = _random_subsets(rng, N, k + 1, budget, accept=mixed)
    else:
        mixed_subsets = (c for c in itertools.combinations(range(N), k + 1) if mixed(c))
    cond4 = _all_ranks_equal(S, mixed_subsets, k + 1, tol)

    return RichnessReport(cond1, cond2, cond3, cond4, cond3_sampled, cond4_sampled)


def _all_ranks_equal(S, subsets, target, tol):
    it = iter(subsets)
    while True:
        chunk = list(itertools.islice(it, _BATCH))
        if not chunk:
            return True
        if np.any(_batched_ranks(S, chunk, tol) != target):
            return False


def flip_null_component(A, P):
    """Return ``P_perp - P_null`` where ``P = P_perp + P_null`` splits each
    column of `P` into its parts orthogonal to and inside the null space of `A`.

    ``A @ result == A @ P`` and ``result.T @ result == P.T @ P``, so a
    full-rank `P` yields a different full-rank basis that `A` cannot tell
    apart from it.
    """
    A = as_matrix(A, "A")
    P = as_matrix(P, "P")
    if P.shape[0] != A.shape[1]:
        raise DimensionMismatch("P rows must equal A columns")
    _, s, V = np.linalg.svd(A, full_matrices=True)
    r = int(np.sum(s > DEFAULT_TOL.rank_tol * s[0])) if s.size else 0
    null_basis = V[r:].T
    P_null = null_basis @ (null_basis.T @ P)
    return (P - P_null) - P_null
