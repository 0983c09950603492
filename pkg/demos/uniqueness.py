"""Small-scale checks of when blind recovery can be unique.

Exhaustive spark, the coherence bound it must respect, the block structure
that rules out ambiguity in the block-diagonal setting, and a concrete
pair of different bases that no measurement can tell apart.
"""

import math

import numpy as np

from bcs import (
    admissible_permutation_count,
    flip_null_component,
    UnionOrthoMatrix,
    gen_union_ortho,
    is_inter_block_diagonal,
    mutual_coherence,
    numerical_rank,
    spark_exact,
    spark_lower_bound,
)

rng = np.random.default_rng(0)
D = rng.standard_normal((4, 8))
print(f"4x8 Gaussian: spark {spark_exact(D)}, coherence {mutual_coherence(D):.3f}, bound {spark_lower_bound(D):.2f}")

D[:, 7] = D[:, 0] - 2 * D[:, 3]
print(f"with a planted dependency: spark {spark_exact(D)}")

A = gen_union_ortho(8, 2, seed=1)
print("random union of orthogonal blocks is inter-block diagonal:", is_inter_block_diagonal(A))
I = np.eye(8)
print("union of I with a block permutation:", is_inter_block_diagonal(UnionOrthoMatrix([I, I[:, [4, 5, 6, 7, 0, 1, 2, 3]]])))

count = admissible_permutation_count(16, 2)
print(f"column permutations keeping a 16x16 basis block diagonal: {count} ({100 * count / math.factorial(16):.2e}% of all)")

# Without structure on P the problem is hopeless: move P along the null space of A.
A = rng.standard_normal((16, 32))
P1 = rng.standard_normal((32, 32))
P2 = flip_null_component(A, P1)
print(f"|A P1 - A P2| = {np.abs(A @ P1 - A @ P2).max():.1e}, |P1 - P2| = {np.abs(P1 - P2).max():.2f}, ranks {numerical_rank(P1)} {numerical_rank(P2)}")
