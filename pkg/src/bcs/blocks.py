"""Block-structured orthogonal matrices: unions of bases and block-diagonal bases."""

from __future__ import annotations

import numpy as np
from scipy.linalg import block_diag

from .errors import DimensionMismatch, NotOrthogonalBlock

__all__ = ["BlockDiagOrthoBasis", "UnionOrthoMatrix"]

ORTHO_TOL = 1e-8


def _check_orthogonal(block, index, size):
    block = np.asarray(block, dtype=float)
    if block.shape != (size, size):
        raise DimensionMismatch(f"block {index} has shape {block.shape}, expected ({size}, {size})")
    err = np.max(np.abs(block.T @ block - np.eye(size)))
    if err > ORTHO_TOL:
        raise NotOrthogonalBlock(f"block {index} deviates from orthogonality by {err:.2e}")
    return block


class UnionOrthoMatrix:
    """Measurement matrix ``A = [A_1, ..., A_L]`` of `L` orthogonal ``n x n`` blocks.

    ``half_blocks`` splits every block column-wise in two, giving the
    ``2L`` matrices of shape ``n x n/2`` that pair with the blocks of a
    :class:`BlockDiagOrthoBasis`.
    """

    def __init__(self, blocks):
        blocks = [np.asarray(b, dtype=float) for b in blocks]
        if not blocks:
            raise DimensionMismatch("need at least one block")
        n = blocks[0].shape[0]
        if n % 2:
            raise DimensionMismatch(f"block size must be even, got {n}")
        self.blocks = [_check_orthogonal(b, i, n) for i, b in enumerate(blocks)]
        self.n = n
        self.L = len(blocks)
        self.matrix = np.hstack(self.blocks)

    @property
    def shape(self):
        return self.matrix.shape

    def half_blocks(self, multiplicity=2):
        size = self.n // multiplicity
        return [self.matrix[:, i * size:(i + 1) * size] for i in range(self.L * multiplicity)]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"UnionOrthoMatrix(n={self.n}, L={self.L})"


class BlockDiagOrthoBasis:
    """Orthogonal block-diagonal basis with equal square blocks.

    With `n` the block size of the paired measurement matrix and
    multiplicity 2, there are ``2L`` blocks of size ``n/2``.
    """

    def __init__(self, blocks):
        blocks = [np.asarray(b, dtype=float) for b in blocks]
        if not blocks:
            raise DimensionMismatch("need at least one block")
        size = blocks[0].shape[0]
        self.blocks = [_check_orthogonal(b, i, size) for i, b in enumerate(blocks)]
        self.block_size = size

    @classmethod
    def identity(cls, n_blocks, block_size):
        return cls([np.eye(block_size) for _ in range(n_blocks)])

    @property
    def matrix(self):
        return block_diag(*self.blocks)

    @property
    def n_blocks(self):
        return len(self.blocks)

    def __array__(self, dtype=None, copy=None):
        M = self.matrix
        return M if dtype is None else M.astype(dtype)

    def __repr__(self):
        return f"BlockDiagOrthoBasis(n_blocks={self.n_blocks}, block_size={self.block_size})"
