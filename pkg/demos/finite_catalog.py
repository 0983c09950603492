"""Blind recovery when the basis is one of a handful of known candidates.

We hide 100 signals in the Haar basis, compress each to half its length
with a Gaussian matrix, and hand the solver five candidate bases. Each
signal votes for the basis giving the sparsest code; the majority wins.
"""

import numpy as np

from bcs import add_noise_snr, default_catalog, fbcs_ensemble, gen_sparse_matrix, noise_norm_estimate, recon_error

m, n, k, N = 64, 32, 4, 100
rng = np.random.default_rng(0)
catalog = default_catalog(m)
A = rng.standard_normal((n, m))

X = catalog["haar"] @ gen_sparse_matrix(m, N, k, seed=1)
B = A @ X

res = fbcs_ensemble(B, A, catalog, k)
print(f"noiseless: chose {res.chosen_basis}, {100 * res.miss_detected_fraction:.0f}% of signals voted otherwise")
print(f"           mean error {100 * recon_error(X, res.X).mean:.2e}%")

# With noise, stop OMP at the expected noise level instead of at zero residual.
for snr in (30.0, 20.0, 10.0):
    noisy = add_noise_snr(B, snr, seed=2, scope="column")
    res = fbcs_ensemble(noisy, A, catalog, k, residual_tol=noise_norm_estimate(noisy, snr))
    ok = res.correct_mask("haar")
    err = recon_error(X[:, ok], res.X[:, ok]).mean
    print(f"{snr:4.0f} dB: chose {res.chosen_basis}, miss {100 * (1 - ok.mean()):.0f}%, error {100 * err:.2f}%")
