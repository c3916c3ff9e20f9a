"""Brute-force O(N^2) DFT used as ground truth for the fast transforms."""

import numpy as np

from ._validation import as_signal

# Rows of the (k, n) exponent matrix evaluated per block; bounds peak memory.
_BLOCK_ELEMENTS = 1 << 22


def _roots(n, sign):
    # Exact angle reduction: exponent n*k is taken mod N before the exp, so
    # large N does not lose accuracy to huge arguments.
    j = np.arange(n, dtype=np.float64)
    return np.exp(sign * 2j * np.pi * j / n)


def _direct_sum(x, sign):
    n = x.size
    roots = _roots(n, sign)
    idx = np.arange(n, dtype=np.int64)
    out = np.empty(n, dtype=np.complex128)
    block = max(1, _BLOCK_ELEMENTS // n)
    for start in range(0, n, block):
        k = idx[start:start + block]
        exponents = np.outer(k, idx) % n
        out[start:start + block] = roots[exponents] @ x
    return out


def dft_reference(x):
    """Unnormalized forward DFT, ``X[k] = sum_n x[n] exp(-2j*pi*n*k/N)``.

    Accepts any length ``N >= 1``. Always evaluated in double precision.
    """
    x = as_signal(x)
    return _direct_sum(x, -1.0)


def idft_reference(X):
    """Inverse DFT with the ``1/N`` factor, ``x[n] = sum_k X[k] exp(+2j*pi*n*k/N) / N``."""
    X = as_signal(X, name="X")
    return _direct_sum(X, 1.0) / X.size


def max_abs_error(a, b):
    """Largest complex modulus of ``a - b``; lengths must match."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))
