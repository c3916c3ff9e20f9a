"""Input validation helpers shared by the transforms and estimators."""

import numpy as np


def is_power_of_two(n):
    n = int(n)
    return n >= 1 and (n & (n - 1)) == 0


def check_power_of_two(n, name="N", minimum=1):
    """Return ``n`` as an int, raising ``ValueError`` unless it is a power of two >= minimum."""
    if isinstance(n, (bool, np.bool_)) or not isinstance(n, (int, np.integer)):
        raise ValueError(f"{name} must be an integer, got {n!r}")
    n = int(n)
    if not is_power_of_two(n) or n < minimum:
        raise ValueError(f"{name} must be a power of two >= {minimum}, got {n}")
    return n


def as_signal(x, *, power_of_two=False, minimum=1, dtype=np.complex128, name="x"):
    """Validate a 1-D signal and return it as a contiguous complex array.

    Raises ``ValueError`` for empty, non-1-D or non-finite input, and for
    lengths that are not a power of two when ``power_of_two`` is set.
    """
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must not be empty")
    if not np.issubdtype(arr.dtype, np.number):
        raise ValueError(f"{name} must be numeric, got dtype {arr.dtype}")
    arr = np.ascontiguousarray(arr, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite samples")
    if power_of_two:
        check_power_of_two(arr.size, name=f"len({name})", minimum=minimum)
    elif arr.size < minimum:
        raise ValueError(f"len({name}) must be >= {minimum}, got {arr.size}")
    return arr


def as_signal_batch(X, *, dtype=np.complex128):
    """Validate a 2-D ``(n_samples, n_points)`` batch of signals."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array of signals, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"empty signal batch, shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.number):
        raise ValueError(f"signals must be numeric, got dtype {arr.dtype}")
    arr = np.ascontiguousarray(arr, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise ValueError("signals contain NaN or infinite samples")
    return arr
