"""scikit-learn style transformers wrapping the FFT implementations.

Each row of ``X`` is one signal; ``transform`` returns the spectra and
``inverse_transform`` maps spectra back. ``fit`` only validates the signal
length and prepares the plan and twiddle table, so the transformers compose
with pipelines, ``clone`` and ``get_params``/``set_params``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_signal_batch, check_power_of_two
from .baseline import fft_levelwise, ifft_levelwise
from .memsim import ExecConfig
from .tiled import fft_tiled, ifft_tiled, make_plan
from .twiddle import DEFAULT_RESOLUTION, default_table

_DTYPES = {"double": np.complex128, "single": np.complex64}


class _FFTBase(TransformerMixin, BaseEstimator):
    def _dtype(self):
        try:
            return _DTYPES[self.precision]
        except KeyError:
            raise ValueError(f"precision must be 'double' or 'single', got {self.precision!r}") from None

    def _prepare(self, n):
        check_power_of_two(n, name="n_features", minimum=2)
        table = default_table(self.table_resolution)
        table.step(n)
        if self._dtype() is np.complex64:
            table = table.astype(np.complex64)
        self.table_ = table

    def _check(self, X):
        check_is_fitted(self, "n_features_in_")
        X = as_signal_batch(X, dtype=self._dtype())
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, but {type(self).__name__} was fitted with {self.n_features_in_}")
        return X

    def fit(self, X, y=None):
        X = as_signal_batch(X, dtype=self._dtype())
        self.n_features_in_ = X.shape[1]
        self._prepare(self.n_features_in_)
        return self

    def transform(self, X):
        X = self._check(X)
        return np.stack([self._forward(row) for row in X])

    def inverse_transform(self, X):
        X = self._check(X)
        return np.stack([self._inverse(row) for row in X])

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.allow_nan = False
        tags.input_tags.two_d_array = True
        return tags


class LevelwiseFFT(_FFTBase):
    """Radix-2 FFT computed level by level (the baseline)."""

    def __init__(self, precision="double", table_resolution=DEFAULT_RESOLUTION):
        self.precision = precision
        self.table_resolution = table_resolution

    def _forward(self, row):
        return fft_levelwise(row, self.table_)

    def _inverse(self, row):
        return ifft_levelwise(row, self.table_)


class TiledFFT(_FFTBase):
    """Multi-pass tiled FFT.

    Parameters
    ----------
    tile_capacity : int, default=1024
        Elements a fast-memory tile may hold; fixes the number of passes.
    n_workers : int, default=1
        Threads sharing the tiles of a pass. Output does not depend on it.
    precision : {"double", "single"}, default="double"
    table_resolution : int, default=2**20
        Angular resolution of the twiddle lookup table.

    Attributes
    ----------
    plan_ : StagePlan
    table_ : TwiddleTable
    n_features_in_ : int
    """

    def __init__(self, tile_capacity=1024, n_workers=1, precision="double", table_resolution=DEFAULT_RESOLUTION):
        self.tile_capacity = tile_capacity
        self.n_workers = n_workers
        self.precision = precision
        self.table_resolution = table_resolution

    def _prepare(self, n):
        super()._prepare(n)
        self.plan_ = make_plan(n, self.tile_capacity, ExecConfig())

    @property
    def pass_count_(self):
        check_is_fitted(self, "plan_")
        return self.plan_.pass_count

    def _forward(self, row):
        return fft_tiled(row, self.plan_, self.table_, n_workers=self.n_workers)

    def _inverse(self, row):
        return ifft_tiled(row, self.plan_, self.table_, n_workers=self.n_workers)
