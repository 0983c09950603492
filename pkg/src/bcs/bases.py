"""Candidate sparsity bases: identity, DCT, Haar and filter-defined wavelets.

All wavelet bases are synthesis matrices for a full-depth periodic
discrete wavelet transform. Column order is the scaling coefficient
first, then detail bands from coarse to fine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.fft import idct

from .errors import BadFilter, NotPowerOfTwo
from .linalg import numerical_rank

__all__ = [
    "BasisCatalog",
    "WaveletFilter",
    "dct_basis",
    "default_catalog",
    "haar_basis",
    "identity_basis",
    "load_filter",
    "wavelet_basis",
]


def identity_basis(m):
    return np.eye(m)


def dct_basis(m):
    """Orthonormal DCT-II synthesis matrix; column j is the j-th cosine atom."""
    return idct(np.eye(m), type=2, norm="ortho", axis=0)


def _check_pow2(m):
    if m < 1 or m & (m - 1):
        raise NotPowerOfTwo(f"signal length {m} is not a power of two")
    return int(math.log2(m))


@dataclass(frozen=True)
class WaveletFilter:
    """Synthesis lowpass filter of a wavelet family.

    `dual_lowpass` is the analysis lowpass filter; for orthogonal families
    it is the time reverse of `lowpass` and may be omitted. `levels` of
    ``None`` means full depth.
    """

    name: str
    lowpass: tuple
    orthogonal_flag: bool = True
    dual_lowpass: tuple | None = None
    levels: int | None = None

    def __post_init__(self):
        lo = tuple(float(c) for c in self.lowpass)
        object.__setattr__(self, "lowpass", lo)
        if len(lo) == 0 or len(lo) % 2:
            raise BadFilter(f"{self.name}: filter length must be even and non-zero")
        if self.dual_lowpass is None:
            if not self.orthogonal_flag:
                raise BadFilter(f"{self.name}: biorthogonal filter needs dual_lowpass")
            object.__setattr__(self, "dual_lowpass", lo[::-1])
        else:
            dual = tuple(float(c) for c in self.dual_lowpass)
            if len(dual) != len(lo):
                raise BadFilter(f"{self.name}: dual filter length differs")
            object.__setattr__(self, "dual_lowpass", dual)
        if self.orthogonal_flag:
            self._check_qmf()

    def _check_qmf(self):
        # orthonormal scaling filter: sum = sqrt(2), even-shift autocorrelation = delta
        h = np.asarray(self.lowpass)
        if abs(h.sum() - math.sqrt(2)) > 1e-8:
            raise BadFilter(f"{self.name}: lowpass sum {h.sum():.6g} != sqrt(2)")
        for shift in range(0, len(h), 2):
            acc = float(h[shift:] @ h[: len(h) - shift])
            want = 1.0 if shift == 0 else 0.0
            if abs(acc - want) > 1e-8:
                raise BadFilter(f"{self.name}: not orthogonal under shift {shift}")

    @property
    def highpass(self):
        """Synthesis highpass: ``g[t] = (-1)^t * dual_lowpass[t]``."""
        d = np.asarray(self.dual_lowpass)
        return tuple(d * (-1.0) ** np.arange(d.size))


def _filter_dir():
    return resources.files("bcs") / "filters"


def _read_coefficients(path):
    coeffs = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            coeffs.append(float(line))
    return coeffs


def load_filter(name, directory=None):
    """Load ``<name>.txt`` (and ``<name>.dual.txt`` if present) from the filter directory."""
    base = Path(directory) if directory is not None else Path(str(_filter_dir()))
    lowpass = _read_coefficients(base / f"{name}.txt")
    dual_path = base / f"{name}.dual.txt"
    if dual_path.exists():
        return WaveletFilter(name, lowpass, orthogonal_flag=False, dual_lowpass=_read_coefficients(dual_path))
    return WaveletFilter(name, lowpass, orthogonal_flag=True)


def _synthesis_step(approx, detail, lo, hi):
    """One periodic inverse DWT level: upsample by two and circularly convolve."""
    n = 2 * approx.shape[0]
    taps = len(lo)
    shift = taps // 2 - 1
    out = np.zeros((n,) + approx.shape[1:])
    base = 2 * np.arange(approx.shape[0])
    for t in range(taps):
        idx = (base + t - shift) % n
        np.add.at(out, idx, lo[t] * approx + hi[t] * detail)
    return out


def wavelet_basis(filt, m):
    """Synthesis matrix: inverse periodic DWT applied to every unit coefficient vector."""
    depth = _check_pow2(m)
    levels = depth if filt.levels is None else filt.levels
    if not 1 <= levels <= depth and m > 1:
        raise ValueError(f"levels={levels} outside [1, {depth}]")
    if m == 1:
        return np.eye(1)
    lo, hi = np.asarray(filt.lowpass), np.asarray(filt.highpass)
    coeffs = np.eye(m)
    # coefficient layout: [approx_L, detail_L, detail_{L-1}, ..., detail_1]
    size = m >> levels
    signal = coeffs[:size]
    for _ in range(levels):
        detail = coeffs[size:2 * size]
        signal = _synthesis_step(signal, detail, lo, hi)
        size *= 2
    return signal


def haar_basis(m):
    """Orthonormal full-depth Haar synthesis matrix."""
    _check_pow2(m)
    return wavelet_basis(load_filter("haar"), m)


class BasisCatalog:
    """Named, ordered collection of invertible ``dim x dim`` bases."""

    def __init__(self, dim, entries, orthogonal=None):
        names = [name for name, _ in entries]
        if len(set(names)) != len(names):
            raise ValueError("basis names must be unique")
        self.dim = dim
        self.names = names
        self.matrices = []
        for name, P in entries:
            P = np.asarray(P, dtype=float)
            if P.shape != (dim, dim):
                raise ValueError(f"basis {name!r} has shape {P.shape}, expected ({dim}, {dim})")
            if numerical_rank(P) != dim:
                raise ValueError(f"basis {name!r} is not invertible")
            self.matrices.append(P)
        self.orthogonal = dict(orthogonal or {})

    def __len__(self):
        return len(self.names)

    def __getitem__(self, name):
        return self.matrices[self.names.index(name)]

    def items(self):
        return zip(self.names, self.matrices)

    def index(self, name):
        return self.names.index(name)


def default_catalog(m):
    """Identity, DCT, Haar, Symlet-4 and Biorthogonal-2.2 bases of size `m`."""
    sym4, bior = load_filter("sym4"), load_filter("bior2.2")
    entries = [
        ("identity", identity_basis(m)),
        ("dct", dct_basis(m)),
        ("haar", haar_basis(m)),
        ("sym4", wavelet_basis(sym4, m)),
        ("bior2.2", wavelet_basis(bior, m)),
    ]
    flags = {"identity": True, "dct": True, "haar": True, "sym4": True, "bior2.2": False}
    return BasisCatalog(m, entries, orthogonal=flags)
