"""Numeric kernels over ranges of Goedel codes.

Two interchangeable back ends: numba ``@njit`` loops and a pure-numpy
path.  ``REALIZABILITY_DISABLE_NUMBA=1`` (or numba being absent) selects
numpy.  Both must return identical arrays; ``benchmarks/bench_kernels.py``
times them against each other.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("REALIZABILITY_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
except ImportError:  # pragma: no cover - exercised via the env flag in CI
    njit = None

HAVE_NUMBA = njit is not None

def _unpair_np(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = ((np.sqrt(8.0 * z.astype(np.float64) + 1.0) - 1.0) // 2).astype(np.int64)
    # float rounding can be off by one either way
    w = np.where(w * (w + 1) // 2 > z, w - 1, w)
    w = np.where((w + 1) * (w + 2) // 2 <= z, w + 1, w)
    t = w * (w + 1) // 2
    y = z - t
    return w - y, y


def unpair_batch_numpy(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return _unpair_np(np.asarray(z, dtype=np.int64))


def prooflike_sieve_numpy(n: int) -> np.ndarray:
    """Boolean mask over codes ``0..n-1``: is the decoded term proof-like?

    Codes in ``[L, 2L)`` only depend on codes below ``L`` (children of an
    application code ``c`` are at most ``(c - 8) / 2``), so the table can
    be filled in doubling blocks with vectorised lookups.
    """
    mask = np.zeros(n, dtype=np.bool_)
    mask[: min(n, 8)] = True
    lo = 8
    while lo < n:
        hi = min(n, 2 * lo)
        codes = np.arange(lo, hi, dtype=np.int64)
        m = codes - 8
        is_app = (m % 2) == 0
        a, b = _unpair_np(m // 2)
        a = np.where(is_app, a, 0)
        b = np.where(is_app, b, 0)
        mask[lo:hi] = is_app & mask[a] & mask[b]
        lo = hi
    return mask


if HAVE_NUMBA:

    @njit(cache=True)
    def _isqrt_floor(z):
        w = np.int64(np.sqrt(np.float64(z)))
        while w * w > z:
            w -= 1
        while (w + 1) * (w + 1) <= z:
            w += 1
        return w

    @njit(cache=True)
    def _unpair_nb(z):
        w = (_isqrt_floor(8 * z + 1) - 1) // 2
        y = z - w * (w + 1) // 2
        return w - y, y

    @njit(cache=True)
    def _sieve_nb(n):
        mask = np.zeros(n, dtype=np.bool_)
        for c in range(min(n, 8)):
            mask[c] = True
        for c in range(8, n):
            m = c - 8
            if m % 2 == 0:
                a, b = _unpair_nb(m // 2)
                mask[c] = mask[a] and mask[b]
        return mask

    @njit(cache=True)
    def _unpair_batch_nb(z):
        a = np.empty(z.shape[0], dtype=np.int64)
        b = np.empty(z.shape[0], dtype=np.int64)
        for i in range(z.shape[0]):
            a[i], b[i] = _unpair_nb(z[i])
        return a, b

    def prooflike_sieve_numba(n: int) -> np.ndarray:
        return _sieve_nb(np.int64(n))

    def unpair_batch_numba(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unpair_batch_nb(np.asarray(z, dtype=np.int64))

    prooflike_sieve = prooflike_sieve_numba
    unpair_batch = unpair_batch_numba
else:
    prooflike_sieve_numba = None
    unpair_batch_numba = None
    prooflike_sieve = prooflike_sieve_numpy
    unpair_batch = unpair_batch_numpy


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
