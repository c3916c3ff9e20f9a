"""Level-by-level radix-2 FFT, the comparison baseline.

Every one of the ``log2(N)`` levels reads the whole array from slow memory,
applies its butterflies and writes the whole array back, with a barrier
between levels. Operands are moved with explicit gather/scatter index maps,
the same address streams the recorder counts.
"""

import functools

import numpy as np

from ._validation import as_signal, check_power_of_two
from .memsim import pack_streams
from .twiddle import default_table


def butterfly(a, b, w):
    """Radix-2 butterfly: ``(a + w*b, a - w*b)``. Works on scalars or arrays."""
    t = w * b
    return a + t, a - t


@functools.lru_cache(maxsize=64)
def _bit_reverse(n):
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    rev.setflags(write=False)
    return rev


def bit_reverse_permutation(n):
    """Index ``j`` maps to the ``log2(n)``-bit reversal of ``j``."""
    n = check_power_of_two(n)
    return _bit_reverse(n).copy()


@functools.lru_cache(maxsize=32)
def _level_maps(n):
    maps = []
    half = n // 2
    b = np.arange(half, dtype=np.int64)
    span = 1
    while span < n:
        blocks = n // (2 * span)
        top = (np.arange(blocks, dtype=np.int64)[:, np.newaxis] * (2 * span)
               + np.arange(span, dtype=np.int64)).ravel()
        tw = b % span
        for a in (top, tw):
            a.setflags(write=False)
        maps.append((span, top, top + span, tw))
        span *= 2
    return maps


def fft_levelwise(x, table=None, trace=None):
    """Forward FFT executed level by level through slow memory.

    Decimation in time: a bit-reversal sweep, then ``log2(N)`` levels of
    butterflies, natural-order output. When ``trace`` (an
    :class:`~tilefft.memsim.AccessRecorder`) is given, each level is recorded
    as one stage; the bit-reversal sweep goes to ``trace.side``.
    """
    x = as_signal(x, power_of_two=True, minimum=2, dtype=np.result_type(np.asarray(x).dtype, np.complex64))
    table = default_table() if table is None else table
    n = x.size
    table.step(n)
    values = table.values.astype(x.dtype, copy=False)
    warp = None if trace is None else trace.config.warp_size

    rev = _bit_reverse(n)
    data = x[rev]
    if trace is not None:
        trace.slow_read(pack_streams(rev, warp), target=trace.side)
        trace.slow_write(pack_streams(np.arange(n), warp), target=trace.side)

    step_full = table.resolution // n
    for level, (span, top, bottom, tw) in enumerate(_level_maps(n)):
        w = values[tw * (step_full * (n // (2 * span)))]
        a = data[top]
        b = data[bottom]
        out = np.empty_like(data)
        out[top], out[bottom] = butterfly(a, b, w)
        data = out
        if trace is not None:
            trace.begin_stage(f"level {level + 1}")
            top_w = pack_streams(top, warp)
            bottom_w = pack_streams(bottom, warp)
            trace.slow_read(top_w)
            trace.slow_read(bottom_w)
            trace.twiddles(top.size)
            trace.slow_write(top_w)
            trace.slow_write(bottom_w)
            trace.barrier()
    return data


def ifft_levelwise(X, table=None):
    """Inverse FFT via conjugation: ``conj(fft(conj(X))) / N``."""
    X = as_signal(X, power_of_two=True, minimum=2, name="X",
                  dtype=np.result_type(np.asarray(X).dtype, np.complex64))
    return np.conj(fft_levelwise(np.conj(X), table)) / X.size
