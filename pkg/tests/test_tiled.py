import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tilefft import (
    AccessRecorder,
    ExecConfig,
    FastBuffer,
    StagePlan,
    apply_interstage_twiddles,
    dft_reference,
    exchange_permutation,
    exchange_transpose,
    fft_levelwise,
    fft_tiled,
    ifft_tiled,
    make_plan,
    max_abs_error,
    stage_row_fft,
)

from conftest import random_signal


@pytest.mark.parametrize("n, cap, factors", [
    (1024, 1024, (1024,)),
    (4096, 1024, (64, 64)),
    (2, 1024, (2,)),
    (65536, 1024, (256, 256)),
    (2048, 1024, (64, 32)),
    (1 << 20, 1024, (1024, 1024)),
    (64, 2, (2,) * 6),
    (2048, 16, (16, 16, 8)),
])
def test_make_plan_examples(n, cap, factors):
    plan = make_plan(n, cap)
    assert plan.factors == factors
    assert plan.pass_count == len(factors)


@pytest.mark.parametrize("n, cap", [(3, 1024), (0, 1024), (1, 1024), (1024, 3), (1024, 1)])
def test_make_plan_rejects(n, cap):
    with pytest.raises(ValueError):
        make_plan(n, cap)


@settings(max_examples=200)
@given(st.integers(1, 20), st.integers(1, 12))
def test_plan_invariants(log_n, log_cap):
    n, cap = 1 << log_n, 1 << log_cap
    plan = make_plan(n, cap)
    f = plan.factors
    p = plan.pass_count
    assert int(np.prod(f)) == n
    assert all(x <= cap for x in f)
    assert cap ** (p - 1) < n <= cap ** p
    assert max(f) <= 2 * min(f)
    assert make_plan(n, cap) == plan
    for s in range(1, p + 1):
        g = plan.geometry(s)
        assert g.padded_stride % plan.config.bank_count != 0
        assert g.rows * g.cols == plan.tile_elems
        assert g.batch * g.length == plan.tile_elems
        if g.cols % plan.config.bank_count == 0:
            assert g.padded_stride == g.cols + 1


def test_stage_plan_validation():
    with pytest.raises(ValueError):
        StagePlan(16, 8, (16,))
    with pytest.raises(ValueError):
        StagePlan(16, 16, (4, 2))
    with pytest.raises(ValueError):
        StagePlan.from_factors([4, 3])
    with pytest.raises(ValueError):
        make_plan(16).geometry(2)


def test_table1_geometry_padding():
    # 64 columns -> 65, the same trick as widening 32 to 33
    g = make_plan(4096).geometry(1)
    assert (g.rows, g.cols, g.padded_stride) == (16, 64, 65)
    assert make_plan(2048).geometry(2).padded_stride == 33


# --- fast-memory pieces ---------------------------------------------------


def test_row_fft_impulse(table):
    buf = FastBuffer.from_transforms(np.array([[1, 0, 0, 0]]))
    stage_row_fft(buf, 4, table)
    np.testing.assert_allclose(buf.transforms(), [[1, 1, 1, 1]], atol=0)


def test_row_fft_tile_16x64(rng, table):
    rows = rng.uniform(-1, 1, (16, 64)) + 1j * rng.uniform(-1, 1, (16, 64))
    buf = FastBuffer.from_transforms(rows)
    assert (buf.geometry.rows, buf.geometry.cols, buf.geometry.padded_stride) == (16, 64, 65)
    stage_row_fft(buf, 64, table)
    out = buf.transforms()
    for i in range(16):
        assert max_abs_error(out[i], dft_reference(rows[i])) <= 1e-9 * 64
    # padding cells are never written
    assert np.all(np.isnan(buf.data[:, :, 64:]))


def test_row_fft_wrapped_rows(rng, table):
    # transforms longer than a tile row wrap over several rows
    values = random_signal(rng, 1024).reshape(4, 256)
    buf = FastBuffer.from_transforms(values, capacity=1024)
    assert buf.geometry.chunks == 4
    stage_row_fft(buf, 256, table)
    for i in range(4):
        assert max_abs_error(buf.transforms()[i], dft_reference(values[i])) <= 1e-9 * 256


def test_row_fft_length_one(table):
    buf = FastBuffer.from_transforms(np.array([[3 + 1j], [2.0]]))
    stage_row_fft(buf, 1, table)
    np.testing.assert_array_equal(buf.transforms(), [[3 + 1j], [2]])


def test_row_fft_rejects_oversized(table):
    buf = FastBuffer.from_transforms(np.ones((1, 8)))
    with pytest.raises(ValueError):
        stage_row_fft(buf, 16, table)
    with pytest.raises(ValueError):
        stage_row_fft(buf, 4, table)


def test_fast_work_touches_no_slow_memory(rng, table):
    plan = make_plan(4096)
    rec = AccessRecorder()
    rec.begin_stage("fast")
    buf = FastBuffer.from_transforms(random_signal(rng, 1024).reshape(16, 64), geometry=plan.geometry(1))
    stage_row_fft(buf, 64, table, stats=rec)
    apply_interstage_twiddles(buf, 1, plan, table, stats=rec)
    s = rec.stats
    assert s.slow_elem_reads == s.slow_elem_writes == s.slow_transactions == 0
    assert s.fast_accesses == 2 * 1024 * 6 + 2 * 1024
    assert s.twiddle_fetches == 512 * 6 + 1024


def test_interstage_twiddles_2x2(table):
    plan = make_plan(4, 2)
    assert plan.factors == (2, 2)
    values = np.array([[1.0, 2.0], [3.0, 5.0]], dtype=complex)
    buf = FastBuffer.from_transforms(values, geometry=plan.geometry(1))
    apply_interstage_twiddles(buf, 1, plan, table)
    np.testing.assert_array_equal(buf.transforms(), [[1, 2], [3, -5j]])


def test_interstage_twiddles_zero_exponent_unchanged(rng, table):
    plan = make_plan(4096)
    values = random_signal(rng, 4096).reshape(64, 64)
    buf = FastBuffer.from_transforms(values, geometry=plan.geometry(1))
    apply_interstage_twiddles(buf, 1, plan, table)
    out = buf.transforms()
    np.testing.assert_array_equal(out[0], values[0])
    np.testing.assert_array_equal(out[:, 0], values[:, 0])
    assert not np.array_equal(out[1:, 1:], values[1:, 1:])


def test_interstage_twiddles_stage_range(table):
    plan = make_plan(4096)
    buf = FastBuffer.from_transforms(np.ones((16, 64)), geometry=plan.geometry(1))
    for bad in (0, 2, 3):
        with pytest.raises(ValueError):
            apply_interstage_twiddles(buf, bad, plan, table)


def _manual_pipeline(x, plan, table):
    """Run the tiled transform through the public per-tile pieces."""
    data = x.reshape(plan.factors[0], -1).T.ravel()  # first-pass gather
    for stage in range(1, plan.pass_count + 1):
        geo = plan.geometry(stage)
        buf = FastBuffer.from_transforms(data.reshape(-1, geo.length), geometry=geo)
        stage_row_fft(buf, geo.length, table)
        if stage < plan.pass_count:
            apply_interstage_twiddles(buf, stage, plan, table)
        data = exchange_transpose(buf.transforms().ravel(), stage, plan)
    return data


@pytest.mark.parametrize("n, cap", [(16, 4), (4, 2), (64, 4), (2048, 16), (4096, 1024)])
def test_manual_pipeline_matches_oracle(rng, table, n, cap):
    plan = make_plan(n, cap)
    for _ in range(20 if n == 16 else 3):
        x = random_signal(rng, n)
        ref = dft_reference(x)
        assert max_abs_error(_manual_pipeline(x, plan, table), ref) <= 1e-9 * n
        assert max_abs_error(fft_tiled(x, plan, table), ref) <= 1e-9 * n


# --- exchange --------------------------------------------------------------


def test_exchange_single_pass_identity(rng):
    plan = make_plan(1024)
    x = random_signal(rng, 1024)
    rec = AccessRecorder()
    np.testing.assert_array_equal(exchange_transpose(x, 1, plan, rec), x)
    assert rec.stages == [] and rec.stats.slow_elem_accesses == 0


def test_exchange_4x4_is_transpose():
    plan = make_plan(16, 4)
    perm = exchange_permutation(1, plan)
    expected = [(i % 4) * 4 + i // 4 for i in range(16)]
    assert list(perm) == expected
    data = np.arange(16.0)
    out = exchange_transpose(data, 1, plan)
    np.testing.assert_array_equal(out, np.arange(16.0).reshape(4, 4).T.ravel())


@pytest.mark.parametrize("factors", [(4, 4), (8, 4), (4, 8), (32, 64)])
def test_exchange_inverse_geometry(factors):
    plan = StagePlan.from_factors(factors)
    reverse = StagePlan.from_factors(factors[::-1])
    data = np.arange(plan.n_total, dtype=float)
    once = exchange_transpose(data, 1, plan)
    np.testing.assert_array_equal(exchange_transpose(once, 1, reverse), data)
    # the final exchange of the same plan undoes the first one as well
    np.testing.assert_array_equal(exchange_transpose(once, 2, plan), data)


def test_exchange_records_one_sweep_each():
    plan = make_plan(4096)
    rec = AccessRecorder()
    exchange_transpose(np.zeros(4096), 1, plan, rec)
    s = rec.stats
    assert (s.slow_elem_reads, s.slow_elem_writes, s.barriers) == (4096, 4096, 1)


def test_exchange_rejects_bad_stage():
    plan = make_plan(4096)
    for bad in (0, 3, 1.5):
        with pytest.raises(ValueError):
            exchange_transpose(np.zeros(4096), bad, plan)
    with pytest.raises(ValueError):
        exchange_transpose(np.zeros(100), 1, plan)


# --- executor ---------------------------------------------------------------


def test_single_pass_bit_identical_to_levelwise(rng, table):
    for n in (2, 16, 256, 1024):
        x = random_signal(rng, n)
        np.testing.assert_array_equal(fft_tiled(x, make_plan(n), table), fft_levelwise(x, table))


def test_tiled_4096_matches_oracle(rng, table):
    x = random_signal(rng, 4096)
    plan = make_plan(4096)
    assert plan.pass_count == 2
    assert max_abs_error(fft_tiled(x, plan, table), dft_reference(x)) <= 1e-9 * 4096


@pytest.mark.parametrize("bits", range(1, 13))
@pytest.mark.parametrize("cap", [2, 8, 64, 1024])
def test_tiled_matches_oracle(rng, table, bits, cap):
    n = 1 << bits
    x = random_signal(rng, n)
    assert max_abs_error(fft_tiled(x, make_plan(n, cap), table), dft_reference(x)) <= 1e-9 * n


@pytest.mark.parametrize("bits", [13, 14, 15, 16, 18])
def test_tiled_matches_levelwise_large(rng, table, bits):
    n = 1 << bits
    x = random_signal(rng, n)
    ref = fft_levelwise(x, table)
    for cap in (1024, 64):
        assert max_abs_error(fft_tiled(x, make_plan(n, cap), table), ref) <= 1e-10 * n


def test_tiled_65536_traffic(rng, table):
    x = random_signal(rng, 65536)
    rec_t, rec_l = AccessRecorder(), AccessRecorder()
    plan = make_plan(65536, 1024)
    fft_tiled(x, plan, table, stats=rec_t)
    fft_levelwise(x, table, trace=rec_l)
    assert plan.pass_count == 2
    assert rec_t.stats.slow_elem_accesses == 262144
    assert rec_l.stats.slow_elem_accesses == 2097152
    assert rec_l.stats.slow_elem_accesses / rec_t.stats.slow_elem_accesses == 8
    assert rec_t.stats.barriers == 2 and rec_t.stats.bank_conflict_cycles == 0


@pytest.mark.parametrize("workers", [2, 3, 8, 100])
def test_worker_count_does_not_change_result(rng, table, workers):
    x = random_signal(rng, 16384)
    plan = make_plan(16384)
    np.testing.assert_array_equal(fft_tiled(x, plan, table, n_workers=workers), fft_tiled(x, plan, table))
    rec1, rec2 = AccessRecorder(), AccessRecorder()
    fft_tiled(x, plan, table, stats=rec1)
    fft_tiled(x, plan, table, stats=rec2, n_workers=workers)
    assert rec1.stats == rec2.stats


def test_tiled_rejects_mismatch(table):
    with pytest.raises(ValueError):
        fft_tiled(np.ones(8), make_plan(16), table)
    with pytest.raises(ValueError):
        fft_tiled(np.ones(12), table=table)
    with pytest.raises(ValueError):
        fft_tiled(np.ones(8), n_workers=0)


def test_tiled_respects_recorder_config(rng, table):
    cfg = ExecConfig(warp_size=64, half_warp=32, bank_count=32)
    rec = AccessRecorder(cfg)
    fft_tiled(random_signal(rng, 4096), make_plan(4096), table, stats=rec)
    assert rec.stats.bank_conflict_cycles == 0


def test_ifft_tiled_examples(rng, table):
    n = 4096
    x = random_signal(rng, n)
    assert max_abs_error(ifft_tiled(fft_tiled(x, table=table), table=table), x) <= 1e-10
    np.testing.assert_array_equal(ifft_tiled(np.zeros(n), table=table), np.zeros(n))
    spectrum = np.zeros(n)
    spectrum[0] = n
    assert max_abs_error(ifft_tiled(spectrum, table=table), np.ones(n)) <= 1e-15


@pytest.mark.parametrize("bits", [2, 8, 12])
def test_tiled_parseval(rng, table, bits):
    n = 1 << bits
    x = random_signal(rng, n)
    X = fft_tiled(x, make_plan(n, 16), table)
    assert abs(np.sum(np.abs(X) ** 2) - n * np.sum(np.abs(x) ** 2)) <= 1e-12 * n * np.sum(np.abs(x) ** 2)
