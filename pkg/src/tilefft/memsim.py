"""Deterministic memory-hierarchy model.

Turns the execution rules of a warp-based machine into countable quantities:
slow-memory element accesses and coalesced transactions, fast-memory accesses
and bank-conflict serialization, barriers and twiddle-table fetches.

Address streams are passed around as 2-D integer arrays, one row per warp (or
half-warp), with ``-1`` marking idle lanes.
"""

from dataclasses import dataclass, field, fields

import numpy as np

from ._validation import check_power_of_two, is_power_of_two

IDLE = -1


@dataclass(frozen=True)
class ExecConfig:
    warp_size: int = 32
    half_warp: int = 16
    bank_count: int = 16
    word_bytes: int = 8
    segment_bytes: int = 128

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, int) or not is_power_of_two(value):
                raise ValueError(f"{f.name} must be a power of two, got {value!r}")
        if self.warp_size != 2 * self.half_warp:
            raise ValueError("warp_size must equal 2 * half_warp")

    @property
    def element_bytes(self):
        # real and imaginary parts are one word each
        return 2 * self.word_bytes


@dataclass
class AccessStats:
    slow_elem_reads: int = 0
    slow_elem_writes: int = 0
    slow_transactions: int = 0
    fast_accesses: int = 0
    bank_conflict_cycles: int = 0
    barriers: int = 0
    twiddle_fetches: int = 0

    @property
    def slow_elem_accesses(self):
        return self.slow_elem_reads + self.slow_elem_writes

    def __add__(self, other):
        return AccessStats(**{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)})

    def as_dict(self):
        return {f.name: int(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass
class AccessRecorder:
    """Live counter attached to an executing transform.

    Counts are kept per stage (one stage per level or pass); ``stats`` is their
    sum. Work that the model reports separately from the headline numbers, such
    as the baseline's bit-reversal sweep, goes to ``side``.
    """

    config: ExecConfig = field(default_factory=ExecConfig)
    stages: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    side: AccessStats = field(default_factory=AccessStats)

    def begin_stage(self, label):
        self.stages.append(AccessStats())
        self.labels.append(label)

    @property
    def current(self):
        if not self.stages:
            raise RuntimeError("begin_stage() must be called before recording")
        return self.stages[-1]

    @property
    def stats(self):
        total = AccessStats()
        for s in self.stages:
            total = total + s
        return total

    def slow_read(self, warps, target=None):
        target = self.current if target is None else target
        target.slow_elem_reads += _active(warps)
        target.slow_transactions += warp_transactions(warps, self.config)

    def slow_write(self, warps, target=None):
        target = self.current if target is None else target
        target.slow_elem_writes += _active(warps)
        target.slow_transactions += warp_transactions(warps, self.config)

    def fast_streams(self, half_warps):
        """Record half-warp accesses to fast memory, including bank serialization."""
        s = self.current
        s.fast_accesses += _active(half_warps)
        degrees = conflict_degrees(half_warps, self.config)
        s.bank_conflict_cycles += int(np.sum(np.maximum(degrees - 1, 0)))

    def fast_count(self, n):
        """Record ``n`` conflict-free fast-memory accesses (butterfly operands)."""
        self.current.fast_accesses += int(n)

    def twiddles(self, n):
        self.current.twiddle_fetches += int(n)

    def barrier(self):
        self.current.barriers += 1


def _active(streams):
    return int(np.count_nonzero(np.asarray(streams) != IDLE))


def pack_streams(addresses, width):
    """Reshape a flat thread-ordered address list into rows of ``width`` lanes."""
    a = np.asarray(addresses, dtype=np.int64).ravel()
    pad = (-a.size) % width
    if pad:
        a = np.concatenate([a, np.full(pad, IDLE, dtype=np.int64)])
    return a.reshape(-1, width)


def block_warps(lanes, width):
    """Split ``(blocks, lanes)`` thread addresses into warp rows without crossing blocks."""
    lanes = np.asarray(lanes, dtype=np.int64)
    pad = (-lanes.shape[1]) % width
    if pad:
        lanes = np.concatenate([lanes, np.full((lanes.shape[0], pad), IDLE, dtype=np.int64)], axis=1)
    return lanes.reshape(-1, width)


def _distinct_per_row(values, valid):
    # number of distinct valid entries in each row
    v = np.where(valid, values, np.iinfo(np.int64).max)
    v = np.sort(v, axis=1)
    ok = v != np.iinfo(np.int64).max
    new = np.ones_like(ok)
    new[:, 1:] = v[:, 1:] != v[:, :-1]
    return np.count_nonzero(new & ok, axis=1)


def warp_transactions(warps, config):
    """Total transactions for a batch of warp address rows."""
    w = np.atleast_2d(np.asarray(warps, dtype=np.int64))
    if w.size == 0:
        return 0
    valid = w != IDLE
    segments = (w * config.element_bytes) // config.segment_bytes
    return int(np.sum(_distinct_per_row(segments, valid)))


def coalesced_transactions(addresses, config=ExecConfig()):
    """Number of aligned ``segment_bytes`` segments one warp touches.

    ``addresses`` are element indices into a flat slow-memory array of complex
    values (``2 * word_bytes`` bytes each).
    """
    a = np.asarray(addresses, dtype=np.int64).ravel()
    if a.size == 0:
        return 0
    if a.size > config.warp_size:
        raise ValueError(f"a warp has at most {config.warp_size} threads, got {a.size}")
    if np.any(a < 0):
        raise ValueError("addresses must be non-negative")
    return warp_transactions(a[np.newaxis, :], config)


def conflict_degrees(half_warps, config):
    """Serialization degree of each half-warp row (0 for an all-idle row)."""
    h = np.atleast_2d(np.asarray(half_warps, dtype=np.int64))
    if h.size == 0:
        return np.zeros(0, dtype=np.int64)
    rows, width = h.shape
    valid = h != IDLE
    # duplicates of the same word are a broadcast and count once
    v = np.where(valid, h, np.iinfo(np.int64).max)
    v = np.sort(v, axis=1)
    ok = v != np.iinfo(np.int64).max
    first = np.ones_like(ok)
    first[:, 1:] = v[:, 1:] != v[:, :-1]
    keep = first & ok
    banks = np.where(keep, v % config.bank_count, 0)
    flat = (np.arange(rows)[:, np.newaxis] * config.bank_count + banks)[keep]
    counts = np.bincount(flat, minlength=rows * config.bank_count)
    return counts.reshape(rows, config.bank_count).max(axis=1)


def bank_conflict_degree(addresses, config=ExecConfig()):
    """Max number of distinct words one half-warp maps to a single bank.

    1 means conflict-free; identical addresses broadcast and count once.
    """
    a = np.asarray(addresses, dtype=np.int64).ravel()
    if a.size == 0:
        return 0
    if a.size > config.half_warp:
        raise ValueError(f"a half-warp has at most {config.half_warp} threads, got {a.size}")
    if np.any(a < 0):
        raise ValueError("addresses must be non-negative")
    return int(conflict_degrees(a[np.newaxis, :], config)[0])


# ---------------------------------------------------------------------------
# analytic accounting


def levelwise_level_streams(n, span, config=ExecConfig()):
    """Warp rows of top and bottom operand addresses for one radix-2 level.

    Thread ``b`` owns butterfly ``b``; its operands sit at
    ``(b // span) * 2 * span + b % span`` and that plus ``span``.
    """
    b = np.arange(n // 2, dtype=np.int64)
    top = (b // span) * (2 * span) + b % span
    return pack_streams(top, config.warp_size), pack_streams(top + span, config.warp_size)


def account_levelwise(n, config=ExecConfig()):
    """Model counts for the level-by-level baseline of length ``n``."""
    n = check_power_of_two(n, minimum=2)
    levels = n.bit_length() - 1
    stats = AccessStats()
    for level in range(levels):
        top, bottom = levelwise_level_streams(n, 1 << level, config)
        per_access = warp_transactions(top, config) + warp_transactions(bottom, config)
        stats.slow_elem_reads += n
        stats.slow_elem_writes += n
        stats.slow_transactions += 2 * per_access
        stats.twiddle_fetches += n // 2
        stats.barriers += 1
    return stats


def tiled_stage_streams(plan, stage, config=ExecConfig(), stride=None):
    """Thread-ordered access streams of one tiled pass.

    Returns ``(load_warps, store_warps, fast_half_warps)``: slow addresses read
    by the load, slow addresses written by the store, and the fast-memory word
    addresses both phases touch (load and store walk the tile the same way).
    ``stride`` overrides the tile row stride, e.g. to evaluate an unpadded layout.

    Addresses are derived here from the mixed-radix digit layout of the plan,
    independently of the executor's permutation tables.
    """
    geo = plan.geometry(stage)
    stride = geo.padded_stride if stride is None else stride
    hw = config.half_warp
    factors = plan.factors
    n_s = factors[stage - 1]
    before = int(np.prod(factors[: stage - 1], dtype=np.int64))
    after = plan.n_total // (before * n_s)

    # thread order inside a tile: down each column, half-warp segments of rows
    seg = -(-geo.rows // hw)
    col, block, lane = np.meshgrid(np.arange(geo.cols), np.arange(seg), np.arange(hw), indexing="ij")
    row = block * hw + lane
    live = row < geo.rows
    fast = np.where(live, row * stride + col, IDLE).reshape(-1, hw)

    chunk, b = np.divmod(np.where(live, row, 0), geo.batch)
    digit = chunk * geo.cols + col
    tiles = plan.n_total // geo.tile_elems
    t = np.arange(tiles, dtype=np.int64)[:, np.newaxis] * geo.batch + b.reshape(1, -1)
    digit = np.broadcast_to(digit.reshape(1, -1), t.shape)
    prefix, rest = np.divmod(t, after)

    if stage == 1:
        load = digit * after + rest
    else:
        load = t * n_s + digit
    if stage < len(factors):
        nxt = factors[stage]
        after_next = after // nxt
        digit_next, rest_next = np.divmod(rest, after_next)
        prefix_next = prefix + before * digit
        store = (prefix_next * after_next + rest_next) * nxt + digit_next
    else:
        store = prefix + before * digit
    lane_live = np.broadcast_to(live.reshape(1, -1), t.shape)
    load = block_warps(np.where(lane_live, load, IDLE), config.warp_size)
    store = block_warps(np.where(lane_live, store, IDLE), config.warp_size)
    fast = np.broadcast_to(fast.reshape(1, -1, hw), (tiles,) + fast.shape).reshape(-1, hw)
    return load, store, fast


def unpadded_stride(geometry, config=ExecConfig()):
    """Row stride of the same tile without padding, rounded up to a bank multiple."""
    return -(-geometry.cols // config.bank_count) * config.bank_count


def account_tiled(plan, config=ExecConfig(), padded=True):
    """Model counts for the tiled transform described by ``plan``.

    With ``padded=False`` the tile rows use a stride that is a multiple of the
    bank count, which shows the conflicts the padding removes.
    """
    if plan.config != config:
        plan = plan.with_config(config)
    n = plan.n_total
    stats = AccessStats()
    for stage, n_s in enumerate(plan.factors, start=1):
        stride = None if padded else unpadded_stride(plan.geometry(stage), config)
        load, store, fast = tiled_stage_streams(plan, stage, config, stride=stride)
        log_s = n_s.bit_length() - 1
        stats.slow_elem_reads += n
        stats.slow_elem_writes += n
        stats.slow_transactions += warp_transactions(load, config) + warp_transactions(store, config)
        degrees = conflict_degrees(fast, config)
        stats.bank_conflict_cycles += 2 * int(np.sum(np.maximum(degrees - 1, 0)))
        # load writes + store reads, four operand accesses per butterfly,
        # a read and a write per element for the inter-stage twiddle
        stats.fast_accesses += 2 * n + 2 * n * log_s
        stats.twiddle_fetches += (n // 2) * log_s
        if stage < plan.pass_count:
            stats.fast_accesses += 2 * n
            stats.twiddle_fetches += n
        stats.barriers += 1
    return stats


def reduction_ratio(n, plan):
    """Slow-memory traffic reduction of the tiled plan over the baseline: ``log2(N) / p``."""
    n = check_power_of_two(n, minimum=2)
    if plan.n_total != n:
        raise ValueError(f"plan is for N={plan.n_total}, not {n}")
    return (n.bit_length() - 1) / plan.pass_count
