"""
Discrete Fourier transform and cyclic convolution over Z/M for any M.

M = q-1 is often prime or otherwise unfriendly, so lengths above a small
threshold go through Bluestein's chirp-z factorisation on top of numpy's
power-of-two FFT; short lengths use the O(M^2) definition directly.
Convention: X[j] = sum_k x[k] exp(-2 pi i jk / M).
"""

import logging
from functools import lru_cache

import numpy as np

from .errors import LengthMismatch, PrecisionCapExceeded

logger = logging.getLogger(__name__)

DFT_SETTINGS = {
    "naive_max_length": 64,
    # Kloosterman inversion multiplies errors by |G|^n = q^(n/2)
    "kloosterman_max_n": 6,
    "max_length": 10 ** 5,
}

ComplexSeq = np.ndarray


def _as_seq(x) -> np.ndarray:
    arr = np.asarray(x, dtype=complex)
    if arr.shape[-1] < 1:
        raise ValueError("sequence must have length >= 1")
    return arr


@lru_cache(maxsize=64)
def _dft_matrix(m: int) -> np.ndarray:
    jk = np.outer(np.arange(m), np.arange(m)) % m
    w = np.exp(-2j * np.pi * jk / m)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=64)
def _bluestein_plan(m: int) -> tuple:
    """Chirp and transformed chirp filter for length m (cached, read-only)."""
    n = np.arange(m, dtype=np.int64)
    # k^2 mod 2m keeps the chirp phase exact for large k
    chirp = np.exp(-1j * np.pi * ((n * n) % (2 * m)) / m)
    nfft = 1 << int(2 * m - 2).bit_length()
    filt = np.zeros(nfft, dtype=complex)
    filt[:m] = np.conj(chirp)
    filt[nfft - m + 1:] = np.conj(chirp[1:])[::-1]
    filt_hat = np.fft.fft(filt)
    chirp.setflags(write=False)
    filt_hat.setflags(write=False)
    return chirp, filt_hat, nfft


def naive_dft(x, axis: int = -1) -> ComplexSeq:
    """O(M^2) evaluation of the definition; also the reference oracle."""
    arr = np.moveaxis(_as_seq(x), axis, -1)
    out = arr @ _dft_matrix(arr.shape[-1]).T
    return np.moveaxis(out, -1, axis)


def _bluestein(arr: np.ndarray) -> np.ndarray:
    m = arr.shape[-1]
    chirp, filt_hat, nfft = _bluestein_plan(m)
    padded = np.zeros(arr.shape[:-1] + (nfft,), dtype=complex)
    padded[..., :m] = arr * chirp
    conv = np.fft.ifft(np.fft.fft(padded, axis=-1) * filt_hat, axis=-1)
    return conv[..., :m] * chirp


def dft(x, axis: int = -1) -> ComplexSeq:
    arr = np.moveaxis(_as_seq(x), axis, -1)
    if arr.shape[-1] <= DFT_SETTINGS["naive_max_length"]:
        out = arr @ _dft_matrix(arr.shape[-1]).T
    else:
        out = _bluestein(arr)
    return np.moveaxis(out, -1, axis)


def idft(x, axis: int = -1) -> ComplexSeq:
    arr = _as_seq(x)
    m = arr.shape[axis]
    return np.conj(dft(np.conj(arr), axis=axis)) / m


def naive_idft(x) -> ComplexSeq:
    arr = _as_seq(x)
    return np.conj(naive_dft(np.conj(arr))) / arr.shape[-1]


def cyclic_convolve(x, y) -> ComplexSeq:
    """z[k] = sum_j x[j] y[k-j mod M], through the transform."""
    a, b = _as_seq(x), _as_seq(y)
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths {a.shape[-1]} and {b.shape[-1]} differ")
    return idft(dft(a) * dft(b))


def cyclic_convolve_many(seqs) -> ComplexSeq:
    """Cyclic convolution of several sequences with one inverse transform."""
    seqs = [_as_seq(s) for s in seqs]
    if not seqs:
        raise ValueError("nothing to convolve")
    if any(s.shape != seqs[0].shape for s in seqs):
        raise LengthMismatch("sequences must have equal lengths")
    spectrum = np.ones(seqs[0].shape, dtype=complex)
    for s in seqs:
        spectrum = spectrum * dft(s)
    return idft(spectrum)


def cyclic_convolve_direct(x, y) -> ComplexSeq:
    """Exact O(M^2) convolution, used as oracle and as the fallback path."""
    a, b = _as_seq(x), _as_seq(y)
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths {a.shape[-1]} and {b.shape[-1]} differ")
    out = np.zeros_like(a)
    for j in range(a.shape[-1]):
        out = out + a[j] * np.roll(b, j)
    return out


def check_kloosterman_cap(q: int, n: int):
    if n > DFT_SETTINGS["kloosterman_max_n"] or q > DFT_SETTINGS["max_length"]:
        raise PrecisionCapExceeded(
            f"DFT Kloosterman path limited to n <= {DFT_SETTINGS['kloosterman_max_n']}, "
            f"q <= {DFT_SETTINGS['max_length']} (got n={n}, q={q})"
        )


def check_length_cap(m: int):
    if m > DFT_SETTINGS["max_length"]:
        raise PrecisionCapExceeded(f"transform length {m} exceeds {DFT_SETTINGS['max_length']}")
