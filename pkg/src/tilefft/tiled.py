"""Multi-pass tiled FFT.

``N`` is factored into ``p`` tile-sized lengths ``N_1 ... N_p``. Each pass
gathers tiles of whole length-``N_s`` transforms from slow memory into padded
fast-memory buffers, runs every butterfly of those transforms there, applies
the inter-pass twiddles and scatters the tile back through the exchange
permutation, which lays the data out so the next pass's transforms are
contiguous. Slow memory is touched once for reading and once for writing per
pass instead of once per radix-2 level.

Index conventions for pass ``s`` (``L = N_1...N_{s-1}``, ``R = N_{s+1}...N_p``):
a transform is identified by ``T = Q*R + r`` where ``Q < L`` is the partial
output index ``k_1 + N_1 k_2 + ...`` already produced and ``r < R`` the
not-yet-transformed input digits. Element ``(T, k)`` of the pass output is
multiplied by ``W_{N_s R}^{r k}`` before the exchange.
"""

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_signal, check_power_of_two
from .baseline import _bit_reverse, butterfly
from .memsim import IDLE, ExecConfig, block_warps
from .twiddle import default_table, level_twiddles, twiddle_lookup


@dataclass(frozen=True)
class TileGeometry:
    """Fast-memory layout of one pass's tiles.

    A tile of ``tile_elems`` elements holds ``batch`` transforms of ``length``
    and is stored as a ``rows x cols`` grid with row stride ``padded_stride``.
    Transform ``b``'s element ``n`` sits at row ``(n // cols) * batch + b``,
    column ``n % cols``.
    """

    stage: int
    length: int
    tile_elems: int
    batch: int
    rows: int
    cols: int
    padded_stride: int

    @property
    def chunks(self):
        return self.length // self.cols

    @property
    def cells(self):
        return self.rows * self.padded_stride

    def cell_of(self, b, n):
        chunk, col = np.divmod(n, self.cols)
        return chunk * self.batch + b, col


def _geometry(stage, length, tile_elems, config):
    batch = tile_elems // length
    cols = min(length, max(config.half_warp, tile_elems // config.half_warp))
    rows = tile_elems // cols
    # an odd stride walks every bank; multiples of the bank count always get padded
    pad = cols % config.bank_count == 0 or (rows > 1 and cols % 2 == 0)
    return TileGeometry(stage, length, tile_elems, batch, rows, cols, cols + 1 if pad else cols)


@dataclass(frozen=True)
class StagePlan:
    n_total: int
    tile_capacity: int
    factors: tuple
    config: ExecConfig = field(default_factory=ExecConfig)

    def __post_init__(self):
        check_power_of_two(self.n_total, name="N", minimum=2)
        check_power_of_two(self.tile_capacity, name="tile_capacity", minimum=2)
        object.__setattr__(self, "factors", tuple(int(f) for f in self.factors))
        if not self.factors:
            raise ValueError("a plan needs at least one factor")
        for f in self.factors:
            check_power_of_two(f, name="factor", minimum=2)
            if f > self.tile_capacity:
                raise ValueError(f"factor {f} exceeds tile capacity {self.tile_capacity}")
        if int(np.prod(self.factors, dtype=np.int64)) != self.n_total:
            raise ValueError(f"factors {self.factors} do not multiply to N={self.n_total}")

    @classmethod
    def from_factors(cls, factors, tile_capacity=None, config=None):
        factors = tuple(int(f) for f in factors)
        n = int(np.prod(factors, dtype=np.int64))
        cap = max(factors) if tile_capacity is None else tile_capacity
        return cls(n, cap, factors, ExecConfig() if config is None else config)

    def with_config(self, config):
        return StagePlan(self.n_total, self.tile_capacity, self.factors, config)

    @property
    def pass_count(self):
        return len(self.factors)

    @property
    def tile_elems(self):
        return min(self.tile_capacity, self.n_total)

    def geometry(self, stage):
        if not 1 <= stage <= self.pass_count:
            raise ValueError(f"stage must be in [1, {self.pass_count}], got {stage}")
        return _geometry(stage, self.factors[stage - 1], self.tile_elems, self.config)

    @property
    def padded_strides(self):
        return [self.geometry(s).padded_stride for s in range(1, self.pass_count + 1)]


def make_plan(n, tile_capacity=1024, config=None):
    """Minimal-pass plan with balanced factors (larger factors first).

    ``p`` is the smallest count with ``tile_capacity**p >= n``; the ``log2``
    sizes of the factors differ by at most one.
    """
    n = check_power_of_two(n, minimum=2)
    cap = check_power_of_two(tile_capacity, name="tile_capacity", minimum=2)
    bits, cap_bits = n.bit_length() - 1, cap.bit_length() - 1
    p = -(-bits // cap_bits)
    base, extra = divmod(bits, p)
    factors = [1 << (base + 1)] * extra + [1 << base] * (p - extra)
    return StagePlan(n, cap, tuple(factors), ExecConfig() if config is None else config)


# ---------------------------------------------------------------------------
# permutations between tile order and slow-memory addresses


def _check_stage(stage, plan, upper):
    if isinstance(stage, bool) or not isinstance(stage, (int, np.integer)) or not 1 <= stage <= upper:
        raise ValueError(f"stage must be an integer in [1, {upper}], got {stage!r}")


@functools.lru_cache(maxsize=64)
def _load_perm(plan, stage):
    # tile-order position T*N_s + n  ->  slow address holding that input
    n = plan.n_total
    if stage == 1:
        perm = np.arange(n, dtype=np.int64).reshape(plan.factors[0], -1).T.ravel()
    else:
        perm = np.arange(n, dtype=np.int64)
    perm.setflags(write=False)
    return perm


@functools.lru_cache(maxsize=64)
def _exchange_perm(plan, stage):
    f = plan.factors
    n_s = f[stage - 1]
    before = int(np.prod(f[: stage - 1], dtype=np.int64))
    idx = np.arange(plan.n_total, dtype=np.int64)
    if stage == plan.pass_count:
        # (Q, k) -> Q + L*k
        perm = idx.reshape(n_s, before).T.ravel()
    else:
        nxt = f[stage]
        rest = plan.n_total // (before * n_s * nxt)
        # destination digits (k, Q, r', n') -> source order (Q, n', r', k)
        perm = idx.reshape(n_s, before, rest, nxt).transpose(1, 3, 2, 0).ravel()
    perm.setflags(write=False)
    return perm


def exchange_permutation(stage, plan):
    """Slow-memory address receiving each tile-order output position of ``stage``."""
    _check_stage(stage, plan, plan.pass_count)
    return _exchange_perm(plan, stage).copy()


@functools.lru_cache(maxsize=64)
def _thread_cells(geo, half_warp, warp_size):
    # Lanes walk each tile column top to bottom in half-warp segments; the
    # returned arrays give each lane's fast-memory cell and tile position.
    seg = -(-geo.rows // half_warp)
    col, block, lane = np.meshgrid(np.arange(geo.cols), np.arange(seg), np.arange(half_warp), indexing="ij")
    row = (block * half_warp + lane).ravel()
    col = col.ravel()
    live = row < geo.rows
    chunk, b = np.divmod(row, geo.batch)
    pos = np.where(live, b * geo.length + chunk * geo.cols + col, IDLE)
    cell = np.where(live, row * geo.padded_stride + col, IDLE)
    return pos, cell


def exchange_transpose(data, stage, plan, stats=None):
    """Regroup pass-``stage`` output (tile order) into the next pass's layout.

    Stand-alone slow-to-slow form of the exchange the tiled executor fuses into
    each pass's store. For a single-pass plan it is the identity and records
    nothing; otherwise one read sweep, one write sweep and a barrier.
    """
    _check_stage(stage, plan, plan.pass_count)
    data = np.asarray(data)
    if data.shape != (plan.n_total,):
        raise ValueError(f"expected {plan.n_total} samples, got shape {data.shape}")
    if plan.pass_count == 1:
        return data.copy()
    perm = _exchange_perm(plan, stage)
    out = np.empty_like(data)
    out[perm] = data
    if stats is not None:
        w = stats.config.warp_size
        stats.begin_stage(f"exchange {stage}")
        stats.slow_read(block_warps(np.arange(plan.n_total).reshape(1, -1), w))
        stats.slow_write(block_warps(perm.reshape(1, -1), w))
        stats.barrier()
    return out


# ---------------------------------------------------------------------------
# fast-memory work


class FastBuffer:
    """Padded fast-memory tiles for one pass.

    ``data`` has shape ``(tiles, rows, padded_stride)``; padding cells hold NaN
    and are never read as data. ``first_tile`` is the global index of the first
    tile, which fixes the transform ids used by the inter-pass twiddles.
    """

    def __init__(self, geometry, tiles=1, first_tile=0, dtype=np.complex128):
        self.geometry = geometry
        self.first_tile = first_tile
        self.data = np.full((tiles, geometry.rows, geometry.padded_stride), np.nan, dtype=dtype)

    @classmethod
    def from_transforms(cls, values, geometry=None, capacity=None, config=ExecConfig()):
        """Pack a ``(count, length)`` array of transforms into as many tiles as needed."""
        values = np.asarray(values)
        count, length = values.shape
        if geometry is None:
            elems = count * length if capacity is None else min(capacity, count * length)
            geometry = _geometry(1, length, elems, config)
        if count % geometry.batch:
            raise ValueError(f"{count} transforms do not fill tiles of {geometry.batch}")
        buf = cls(geometry, count // geometry.batch, dtype=np.result_type(values.dtype, np.complex64))
        buf.set_transforms(values)
        return buf

    @property
    def capacity(self):
        return self.geometry.tile_elems

    @property
    def tiles(self):
        return self.data.shape[0]

    def _view(self):
        g = self.geometry
        return self.data[:, :, : g.cols].reshape(self.tiles, g.chunks, g.batch, g.cols)

    def transforms(self):
        """Copy of the data as ``(tiles * batch, length)``, one transform per row."""
        g = self.geometry
        return self._view().transpose(0, 2, 1, 3).reshape(-1, g.length).copy()

    def set_transforms(self, values):
        g = self.geometry
        v = np.asarray(values).reshape(self.tiles, g.batch, g.chunks, g.cols)
        self._view()[...] = v.transpose(0, 2, 1, 3)


def _rows_fft(a, table):
    # radix-2 decimation in time along the last axis, natural-order output
    return _rows_levels(a[:, _bit_reverse(a.shape[1])], table)


def _rows_levels(data, table):
    # butterfly levels over rows already in bit-reversed order
    m, length = data.shape
    if length == 1:
        return data
    v = data.reshape(m, length // 2, 2)
    out = np.empty_like(data)
    o = out.reshape(m, length // 2, 2)
    np.add(v[:, :, 0], v[:, :, 1], out=o[:, :, 0])
    np.subtract(v[:, :, 0], v[:, :, 1], out=o[:, :, 1])
    data, out = out, data
    span = 2
    while span < length:
        w = level_twiddles(table, span).astype(data.dtype, copy=False)
        v = data.reshape(m, length // (2 * span), 2, span)
        o = out.reshape(v.shape)
        t = w * v[:, :, 1, :]
        np.add(v[:, :, 0, :], t, out=o[:, :, 0, :])
        np.subtract(v[:, :, 0, :], t, out=o[:, :, 1, :])
        data, out = out, data
        span *= 2
    return data


def stage_row_fft(buffer, length, table=None, stats=None):
    """Radix-2 FFT of every length-``length`` transform held in ``buffer``, in place.

    Touches fast memory only; ``stats`` receives operand and twiddle counts.
    """
    table = default_table() if table is None else table
    length = check_power_of_two(length, name="length")
    if length > buffer.capacity:
        raise ValueError(f"length {length} exceeds tile capacity {buffer.capacity}")
    if length != buffer.geometry.length:
        raise ValueError(f"buffer holds transforms of {buffer.geometry.length}, not {length}")
    if length == 1:
        return buffer
    table.step(length)
    values = buffer.transforms()
    buffer.set_transforms(_rows_fft(values, table))
    if stats is not None:
        levels = length.bit_length() - 1
        stats.fast_count(2 * values.size * levels)
        stats.twiddles(values.size // 2 * levels)
    return buffer


@functools.lru_cache(maxsize=16)
def _stage_twiddles(plan, stage, table):
    # (transforms, N_s) matrix of W_{N_s R}^{(T mod R) k} for every transform of the pass
    n_s = plan.factors[stage - 1]
    after = plan.n_total // int(np.prod(plan.factors[:stage], dtype=np.int64))
    r = (np.arange(plan.n_total // n_s, dtype=np.int64) % after)[:, np.newaxis]
    w = twiddle_lookup(table, n_s * after, r * np.arange(n_s, dtype=np.int64))
    w.setflags(write=False)
    return w


def apply_interstage_twiddles(buffer, stage, plan, table=None, stats=None):
    """Multiply element ``k`` of transform ``T`` by ``W_{N_s R}^{(T mod R) k}``."""
    table = default_table() if table is None else table
    _check_stage(stage, plan, plan.pass_count - 1)
    g = buffer.geometry
    if g.length != plan.factors[stage - 1]:
        raise ValueError("buffer geometry does not match the plan stage")
    values = buffer.transforms()
    first = buffer.first_tile * g.batch
    w = _stage_twiddles(plan, stage, table)[first:first + values.shape[0]]
    buffer.set_transforms(values * w.astype(values.dtype, copy=False))
    if stats is not None:
        stats.fast_count(2 * values.size)
        stats.twiddles(values.size)
    return buffer


# ---------------------------------------------------------------------------
# executor


@functools.lru_cache(maxsize=64)
def _tile_maps(plan, stage):
    # slow addresses per (transform, element): loads in bit-reversed element order, stores natural
    geo = plan.geometry(stage)
    pos = np.arange(plan.n_total, dtype=np.int64).reshape(-1, geo.length)
    load = _load_perm(plan, stage)[pos][:, _bit_reverse(geo.length)]
    store = _exchange_perm(plan, stage)[pos]
    for a in (load, store):
        a.setflags(write=False)
    return load, store


def _run_tiles(src, dst, plan, stage, table, first, stop):
    # same arithmetic as FastBuffer + stage_row_fft + apply_interstage_twiddles, minus the padded copy
    geo = plan.geometry(stage)
    load, store = _tile_maps(plan, stage)
    rows = slice(first * geo.batch, stop * geo.batch)
    values = _rows_levels(src[load[rows]], table)
    if stage < plan.pass_count:
        values *= _stage_twiddles(plan, stage, table)[rows].astype(values.dtype, copy=False)
    dst[store[rows]] = values


def _record_pass(stats, plan, stage):
    cfg = stats.config
    geo = plan.geometry(stage)
    n = plan.n_total
    tiles = n // geo.tile_elems
    lane_pos, lane_cell = _thread_cells(geo, cfg.half_warp, cfg.warp_size)
    live = lane_pos != IDLE
    pos = np.arange(tiles, dtype=np.int64)[:, np.newaxis] * geo.tile_elems + lane_pos
    load = np.where(live, _load_perm(plan, stage)[np.where(live, pos, 0)], IDLE)
    store = np.where(live, _exchange_perm(plan, stage)[np.where(live, pos, 0)], IDLE)
    fast = np.tile(lane_cell.reshape(-1, cfg.half_warp), (tiles, 1))
    levels = geo.length.bit_length() - 1

    stats.begin_stage(f"pass {stage}")
    stats.slow_read(block_warps(load, cfg.warp_size))
    stats.fast_streams(fast)
    stats.fast_count(2 * n * levels)
    stats.twiddles(n // 2 * levels)
    if stage < plan.pass_count:
        stats.fast_count(2 * n)
        stats.twiddles(n)
    stats.fast_streams(fast)
    stats.slow_write(block_warps(store, cfg.warp_size))
    stats.barrier()


def fft_tiled(x, plan=None, table=None, stats=None, n_workers=1):
    """Forward FFT in ``plan.pass_count`` passes through fast-memory tiles.

    Tiles of one pass are independent and may be split across ``n_workers``
    threads; the result does not depend on the worker count. ``stats`` (an
    :class:`~tilefft.memsim.AccessRecorder`) receives one stage per pass.
    """
    x = as_signal(x, power_of_two=True, minimum=2, dtype=np.result_type(np.asarray(x).dtype, np.complex64))
    plan = make_plan(x.size) if plan is None else plan
    if plan.n_total != x.size:
        raise ValueError(f"plan is for N={plan.n_total}, signal has {x.size} samples")
    if stats is not None and stats.config != plan.config:
        plan = plan.with_config(stats.config)
    table = default_table() if table is None else table
    table.step(x.size)
    if n_workers < 1:
        raise ValueError(f"n_workers must be >= 1, got {n_workers}")

    src = x
    for stage in range(1, plan.pass_count + 1):
        dst = np.empty_like(src)
        tiles = plan.n_total // plan.tile_elems
        workers = min(n_workers, tiles)
        bounds = [tiles * i // workers for i in range(workers + 1)]
        if workers == 1:
            _run_tiles(src, dst, plan, stage, table, 0, tiles)
        else:
            with ThreadPoolExecutor(workers) as pool:
                jobs = [pool.submit(_run_tiles, src, dst, plan, stage, table, lo, hi)
                        for lo, hi in zip(bounds[:-1], bounds[1:])]
                for job in jobs:
                    job.result()
        if stats is not None:
            _record_pass(stats, plan, stage)
        src = dst
    return src


def ifft_tiled(X, plan=None, table=None, n_workers=1):
    """Inverse of :func:`fft_tiled` via conjugation, ``conj(fft(conj(X))) / N``."""
    X = as_signal(X, power_of_two=True, minimum=2, name="X",
                  dtype=np.result_type(np.asarray(X).dtype, np.complex64))
    return np.conj(fft_tiled(np.conj(X), plan, table, n_workers=n_workers)) / X.size
