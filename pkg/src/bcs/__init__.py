"""Blind compressed sensing: recover signals from compressed measurements
when the sparsity basis is unknown but constrained.

Three constraints are supported: the basis belongs to a known finite
catalog (:mod:`bcs.fbcs`), the basis is sparse under a known dictionary
(:mod:`bcs.sparse_bcs`), or the basis is orthogonal block diagonal
(:mod:`bcs.obd`). :mod:`bcs.linalg` holds the matrix diagnostics used to
check uniqueness at small scale.
"""

from .bases import BasisCatalog, WaveletFilter, dct_basis, default_catalog, haar_basis, identity_basis, load_filter, wavelet_basis
from .blocks import BlockDiagOrthoBasis, UnionOrthoMatrix
from .errors import (
    BCSError,
    BadFilter,
    BlockOrthogonalityLost,
    ConfigInvalid,
    ConvergenceFailure,
    DimensionMismatch,
    DivisibilityError,
    NoCandidate,
    NotOrthogonalBlock,
    NotPowerOfTwo,
    ParseError,
    RankDeficient,
    SingularSupportWarning,
    ZeroColumn,
    ZeroSignal,
)
from .fbcs import FbcsResult, FbcsSingle, Mode, fbcs_ensemble, fbcs_single
from .linalg import (
    EXCEEDED,
    RichnessReport,
    Tolerance,
    check_richness,
    flip_null_component,
    gram_schmidt,
    is_inter_block_diagonal,
    is_k_rank_preserving,
    mutual_coherence,
    numerical_rank,
    spark_exact,
    spark_lower_bound,
    svd,
)
from .matrix_io import emit_matrix_csv, load_matrix_csv
from .obd import (
    ObdResult,
    ObdState,
    admissible_permutation_count,
    basis_update_block,
    match_signed_permutation,
    obd_bcs,
    orthogonal_dl,
)
from .omp import KSparseMatrix, SparseVector, omp, omp_batch, omp_coefficients
from .sparse_bcs import sparse_bcs_direct, uniqueness_condition_sparse
from .synth import (
    add_noise_snr,
    fixed_tiled_basis,
    gen_block_diag_basis,
    gen_sparse_basis_matrix,
    gen_sparse_matrix,
    gen_union_ortho,
    noise_norm_estimate,
    recon_error,
    trial_seed,
)

__version__ = "0.1.0"
