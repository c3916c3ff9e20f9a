"""Memory-optimized multi-pass radix-2 FFT with a memory-hierarchy cost model."""

from .baseline import bit_reverse_permutation, butterfly, fft_levelwise, ifft_levelwise
from .estimators import LevelwiseFFT, TiledFFT
from .memsim import (
    AccessRecorder,
    AccessStats,
    ExecConfig,
    account_levelwise,
    account_tiled,
    bank_conflict_degree,
    coalesced_transactions,
    reduction_ratio,
)
from .reference import dft_reference, idft_reference, max_abs_error
from .tiled import (
    FastBuffer,
    StagePlan,
    apply_interstage_twiddles,
    exchange_permutation,
    exchange_transpose,
    fft_tiled,
    ifft_tiled,
    make_plan,
    stage_row_fft,
)
from .twiddle import TwiddleTable, build_twiddle_table, default_table, twiddle_lookup

__version__ = "0.1.0"
