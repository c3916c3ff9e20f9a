"""Precomputed twiddle-factor lookup table.

The table samples the unit circle at ``R`` evenly spaced angles, entry ``j``
holding ``exp(-2j*pi*j/R)``. Any power-of-two transform length ``N`` that
divides ``R`` resolves its twiddles to exact table entries, so there is no
interpolation and the periodicity, conjugate-symmetry and reducibility
identities of the twiddle factors hold bit for bit.
"""

import functools
from dataclasses import dataclass

import numpy as np

from ._validation import check_power_of_two

DEFAULT_RESOLUTION = 1 << 20


@dataclass(frozen=True, eq=False)
class TwiddleTable:
    resolution: int
    values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)

    def __len__(self):
        return self.resolution

    def step(self, n):
        """Table stride for transforms of length ``n``."""
        n = check_power_of_two(n, name="N")
        if self.resolution % n:
            raise ValueError(
                f"N={n} does not divide the table resolution {self.resolution}; "
                "interpolated lookups are not supported"
            )
        return self.resolution // n

    def astype(self, dtype):
        return TwiddleTable(self.resolution, self.values.astype(dtype))


def build_twiddle_table(resolution):
    """Build a table of ``resolution`` unit-circle samples.

    Only the first quadrant is evaluated with ``cos``; the rest of the circle is
    filled by reflection so that ``entry[R - j] == conj(entry[j])`` exactly and
    the axis points are exact.
    """
    r = check_power_of_two(resolution, name="resolution", minimum=2)
    re = np.empty(r, dtype=np.float64)
    im = np.empty(r, dtype=np.float64)
    if r == 2:
        re[:] = [1.0, -1.0]
        im[:] = 0.0
    else:
        q = r // 4
        c = np.cos(2.0 * np.pi * np.arange(q + 1) / r)
        c[q] = 0.0
        j = np.arange(q + 1)
        # first quadrant: angle in [0, pi/2]
        re[: q + 1] = c[j]
        im[: q + 1] = 0.0 - c[q - j]
        # second quadrant: angle in (pi/2, pi]
        j = np.arange(1, q + 1)
        re[q + j] = 0.0 - c[q - j]
        im[q + j] = 0.0 - c[j]
        # lower half mirrors the upper half
        j = np.arange(1, 2 * q)
        re[r - j] = re[j]
        im[r - j] = -im[j]
    return TwiddleTable(r, re + 1j * im)


@functools.lru_cache(maxsize=4)
def default_table(resolution=DEFAULT_RESOLUTION):
    """Shared, immutable table instance (built once per resolution)."""
    return build_twiddle_table(resolution)


def twiddle_lookup(table, n, exponent):
    """Return ``W_n ** exponent`` as the exact table entry ``(exponent mod n) * R/n``.

    ``exponent`` may be a scalar or an integer array, negative or larger than ``n``.
    """
    step = table.step(n)
    e = np.mod(np.asarray(exponent, dtype=np.int64), n)
    result = table.values[e * step]
    return result[()] if result.ndim == 0 else result


def level_twiddles(table, span):
    """Twiddles ``W_{2*span}^j`` for ``j < span``, the factors of one radix-2 level."""
    step = table.step(2 * span)
    return table.values[: span * step: step]
