"""Size-sweep benchmark: correctness, model counts and host timings.

The sweep mirrors a classic FFT-library comparison table, but external
libraries are replaced by the in-package level-wise baseline and the O(N^2)
oracle. Model counts are deterministic; wall times are host-specific.
"""

import csv
import io
import json
import math
import os
import platform
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from ._validation import is_power_of_two
from .baseline import fft_levelwise
from .memsim import AccessRecorder, ExecConfig, account_levelwise, account_tiled
from .reference import dft_reference, max_abs_error
from .tiled import fft_tiled, make_plan
from .twiddle import default_table

TABLE1_SIZES = (16, 64, 256, 1024, 4096, 16384, 65536)
MAX_SIZE = 1 << 20
ALGORITHMS = ("levelwise", "tiled", "oracle")
HEADER = (
    "size,algorithm,passes,max_err_vs_oracle,slow_elem_accesses,slow_transactions,"
    "bank_conflict_cycles,barriers,wall_time_ns,repetitions"
)
STATS_COLUMNS = ("size", "algorithm", "passes", "slow_elem_accesses", "slow_transactions",
                 "bank_conflict_cycles", "barriers")

SUBSTITUTION_NOTE = (
    "No external FFT library is invoked: the level-wise FFT stands in for the vendor "
    "baselines. Model columns are deterministic; wall_time_ns is host-specific and not "
    "comparable with published GPU/CPU timings."
)


class SuiteError(RuntimeError):
    """A sweep stopped early; ``rows`` holds the results gathered so far."""

    def __init__(self, message, rows):
        super().__init__(message)
        self.rows = list(rows)


class ValidationFailure(SuiteError):
    """A transform disagreed with its reference or with the analytic model."""


@dataclass
class BenchRow:
    size: int
    algorithm: str
    passes: int
    max_err_vs_oracle: object  # float, or None when the oracle was skipped
    slow_elem_accesses: int
    slow_transactions: int
    bank_conflict_cycles: int
    barriers: int
    wall_time_ns: int
    repetitions: int


def parse_sizes(text):
    """Parse ``--sizes``: a comma list of integers or ``table1``."""
    if text.strip().lower() == "table1":
        return list(TABLE1_SIZES)
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"--sizes must be 'table1' or a comma list of integers, got {text!r}") from None


def check_sizes(sizes):
    sizes = list(sizes)
    bad = [s for s in sizes if not (isinstance(s, (int, np.integer)) and 2 <= s <= MAX_SIZE and is_power_of_two(s))]
    if bad or not sizes:
        raise ValueError(f"sizes must be powers of two in [2, {MAX_SIZE}]; offending entries: {bad}")
    return [int(s) for s in sizes]


def best_time_ns(fn, reps):
    """Best-of-``reps`` wall time in ns, after one untimed warm-up call."""
    fn()
    best = None
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        dt = time.perf_counter_ns() - t0
        best = dt if best is None else min(best, dt)
    return int(best)


def _signal(seed, n):
    rng = np.random.default_rng([seed, n])
    return rng.uniform(-1.0, 1.0, n) + 1j * rng.uniform(-1.0, 1.0, n)


def run_suite(sizes, tile_capacity=1024, oracle_max=8192, reps=9, seed=0, threads=1, config=None):
    """Run the sweep and return one :class:`BenchRow` per (size, algorithm).

    The oracle row is emitted only for ``N <= oracle_max``; above that the tiled
    result is cross-checked against the level-wise one. Any correctness miss or
    disagreement between live and analytic counts raises :class:`ValidationFailure`.
    """
    sizes = check_sizes(sizes)
    if reps < 5:
        raise ValueError(f"reps must be >= 5, got {reps}")
    config = ExecConfig() if config is None else config
    table = default_table()
    rows = []
    try:
        for n in sizes:
            rows.extend(_run_size(n, tile_capacity, oracle_max, reps, seed, threads, config, table, rows))
    except MemoryError:
        raise SuiteError(f"out of memory while running the sweep (completed {len(rows)} rows)", rows) from None
    return rows


def _run_size(n, tile_capacity, oracle_max, reps, seed, threads, config, table, done):
    x = _signal(seed, n)
    scale = float(np.max(np.abs(x)))
    plan = make_plan(n, tile_capacity, config)
    levels = n.bit_length() - 1

    lw_rec, tiled_rec = AccessRecorder(config), AccessRecorder(config)
    lw = fft_levelwise(x, table, trace=lw_rec)
    tl = fft_tiled(x, plan, table, stats=tiled_rec, n_workers=threads)
    if lw_rec.stats != account_levelwise(n, config) or tiled_rec.stats != account_tiled(plan, config):
        raise ValidationFailure(f"N={n}: recorded counts disagree with the analytic model", done)

    err_lw = err_tl = None
    if n <= oracle_max:
        ref = dft_reference(x)
        err_lw, err_tl = max_abs_error(lw, ref), max_abs_error(tl, ref)
        tol = 1e-9 * n * scale
        for name, err in (("levelwise", err_lw), ("tiled", err_tl)):
            if err > tol:
                raise ValidationFailure(f"N={n}: {name} error {err:.3e} exceeds {tol:.3e}", done)
    else:
        err = max_abs_error(tl, lw)
        if err > 1e-10 * n * scale:
            raise ValidationFailure(f"N={n}: tiled and levelwise differ by {err:.3e}", done)

    out = []
    for name, rec, passes, err, fn in (
        ("levelwise", lw_rec, levels, err_lw, lambda: fft_levelwise(x, table)),
        ("tiled", tiled_rec, plan.pass_count, err_tl, lambda: fft_tiled(x, plan, table, n_workers=threads)),
    ):
        s = rec.stats
        out.append(BenchRow(n, name, passes, err, s.slow_elem_accesses, s.slow_transactions,
                            s.bank_conflict_cycles, s.barriers, best_time_ns(fn, reps), reps))
    if n <= oracle_max:
        out.append(BenchRow(n, "oracle", 0, 0.0, 0, 0, 0, 0, best_time_ns(lambda: dft_reference(x), reps), reps))
    return out


# ---------------------------------------------------------------------------
# reports


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_csv(rows):
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    for r in rows:
        buf.write(",".join(_cell(getattr(r, f.name)) for f in fields(BenchRow)) + "\n")
    return buf.getvalue()


def format_json(rows):
    return json.dumps([asdict(r) for r in rows], indent=2) + "\n"


def emit_report(rows, fmt, path, metadata=None):
    """Write ``rows`` as CSV or JSON to ``path``.

    ``metadata``, when given, goes to a ``<path>.meta.json`` sidecar so the
    report itself keeps its fixed schema.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to report")
    if fmt == "csv":
        text = format_csv(rows)
    elif fmt == "json":
        text = format_json(rows)
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    _write(path, text)
    if metadata is not None:
        _write(f"{path}.meta.json", json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    return path


def _write(path, text):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def _row_from_mapping(m):
    err = m["max_err_vs_oracle"]
    if err in ("", None):
        err = None
    return BenchRow(
        size=int(m["size"]), algorithm=str(m["algorithm"]), passes=int(m["passes"]),
        max_err_vs_oracle=None if err is None else float(err),
        slow_elem_accesses=int(m["slow_elem_accesses"]), slow_transactions=int(m["slow_transactions"]),
        bank_conflict_cycles=int(m["bank_conflict_cycles"]), barriers=int(m["barriers"]),
        wall_time_ns=int(m["wall_time_ns"]), repetitions=int(m["repetitions"]),
    )


def read_report(path):
    """Parse a CSV or JSON report written by :func:`emit_report`."""
    with open(path, newline="") as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        return [_row_from_mapping(m) for m in json.loads(text)]
    lines = text.splitlines()
    if not lines or lines[0] != HEADER:
        raise ValueError(f"{path}: unexpected CSV header")
    return [_row_from_mapping(m) for m in csv.DictReader(io.StringIO(text))]


def report_metadata(sizes, tile_capacity, oracle_max, reps, seed, threads):
    return {
        "package": f"tilefft {__version__}",
        "sizes": list(sizes),
        "tile_capacity": tile_capacity,
        "oracle_max": oracle_max,
        "repetitions": reps,
        "seed": seed,
        "threads": threads,
        "host": {"python": platform.python_version(), "machine": platform.machine(), "cpus": os.cpu_count()},
        "note": SUBSTITUTION_NOTE,
    }


# ---------------------------------------------------------------------------
# SVG plot

_W, _H = 640, 300
_M = dict(left=80, right=120, top=40, bottom=50)
_COLORS = {"levelwise": "#d62728", "tiled": "#1f77b4", "oracle": "#7f7f7f"}


def _panel(rows, metric, title, sizes, y0):
    pts = {}
    for r in rows:
        v = getattr(r, metric)
        if v > 0:
            pts.setdefault(r.algorithm, []).append((r.size, v))
    px0, px1 = _M["left"], _W - _M["right"]
    py0, py1 = y0 + _M["top"], y0 + _H - _M["bottom"]
    lx = [math.log2(s) for s in sizes]
    xmin, xmax = min(lx), max(lx)
    values = [v for series in pts.values() for _, v in series] or [1]
    ymin, ymax = math.floor(math.log10(min(values))), math.ceil(math.log10(max(values)))
    if ymax == ymin:
        ymax += 1

    def sx(size):
        return px0 + (math.log2(size) - xmin) / (xmax - xmin) * (px1 - px0)

    def sy(v):
        return py1 - (math.log10(v) - ymin) / (ymax - ymin) * (py1 - py0)

    out = [f'<g id="panel-{metric}">',
           f'<text x="{_W / 2:.1f}" y="{y0 + 22}" text-anchor="middle" font-size="14">{title}</text>',
           f'<line x1="{px0}" y1="{py1}" x2="{px1}" y2="{py1}" stroke="black"/>',
           f'<line x1="{px0}" y1="{py0}" x2="{px0}" y2="{py1}" stroke="black"/>']
    for s in sizes:
        out.append(f'<text class="xtick" x="{sx(s):.1f}" y="{py1 + 18}" text-anchor="middle" font-size="10">{s}</text>')
    for e in range(ymin, ymax + 1):
        out.append(f'<text class="ytick" x="{px0 - 6}" y="{sy(10 ** e) + 3:.1f}" text-anchor="end" font-size="10">1e{e}</text>')
    legend_y = py0
    for alg in sorted(pts, key=lambda a: ALGORITHMS.index(a) if a in ALGORITHMS else len(ALGORITHMS)):
        series = sorted(pts[alg])
        color = _COLORS.get(alg, "#2ca02c")
        coords = " ".join(f"{sx(s):.1f},{sy(v):.1f}" for s, v in series)
        out.append(f'<polyline class="series" data-algorithm="{alg}" fill="none" stroke="{color}" '
                   f'stroke-width="2" points="{coords}"/>')
        out.append(f'<text x="{px1 + 10}" y="{legend_y + 4}" font-size="11" fill="{color}">{alg}</text>')
        legend_y += 16
    out.append("</g>")
    return out


def emit_plot(rows, path):
    """Write a standalone SVG: wall time and slow-memory accesses against log2(N)."""
    rows = list(rows)
    sizes = sorted({r.size for r in rows})
    if len(sizes) < 2:
        raise ValueError("a plot needs rows covering at least two sizes")
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{2 * _H}" '
             f'viewBox="0 0 {_W} {2 * _H}">',
             f'<rect width="{_W}" height="{2 * _H}" fill="white"/>']
    parts += _panel(rows, "wall_time_ns", "Best wall time (ns) vs transform size", sizes, 0)
    parts += _panel(rows, "slow_elem_accesses", "Slow-memory element accesses vs transform size", sizes, _H)
    parts.append("</svg>")
    _write(path, "\n".join(parts) + "\n")
    return path
