import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from tilefft import dft_reference
from tilefft.estimators import LevelwiseFFT, TiledFFT


@pytest.fixture
def X(rng):
    return rng.uniform(-1, 1, (5, 4096)) + 1j * rng.uniform(-1, 1, (5, 4096))


@pytest.mark.parametrize("est", [TiledFFT(), TiledFFT(tile_capacity=16, n_workers=3), LevelwiseFFT()])
def test_transform_matches_oracle(est, X):
    out = est.fit_transform(X)
    assert out.shape == X.shape
    for row, spec in zip(X, out):
        assert np.max(np.abs(spec - dft_reference(row))) <= 1e-9 * 4096
    back = est.inverse_transform(out)
    assert np.max(np.abs(back - X)) <= 1e-10


def test_fitted_attributes(X):
    est = TiledFFT().fit(X)
    assert est.n_features_in_ == 4096
    assert est.plan_.factors == (64, 64)
    assert est.pass_count_ == 2


def test_params_and_clone():
    est = TiledFFT(tile_capacity=256, n_workers=2)
    params = est.get_params()
    assert params["tile_capacity"] == 256 and params["n_workers"] == 2
    twin = clone(est)
    assert twin.get_params() == params
    twin.set_params(tile_capacity=64)
    assert twin.tile_capacity == 64 and est.tile_capacity == 256


def test_pipeline(X):
    pipe = make_pipeline(TiledFFT(), FunctionTransformer(np.abs))
    mags = pipe.fit_transform(X.real)
    np.testing.assert_allclose(mags[0], np.abs(dft_reference(X.real[0])), atol=1e-9)


def test_single_precision(X):
    est = TiledFFT(precision="single").fit(X)
    out = est.transform(X)
    assert out.dtype == np.complex64
    assert np.max(np.abs(out[0] - dft_reference(X[0]))) <= 1e-4 * 4096


def test_one_dimensional_input_is_one_signal():
    out = LevelwiseFFT().fit_transform([1, 0, 0, 0])
    np.testing.assert_allclose(out, [[1, 1, 1, 1]])


def test_errors(X):
    with pytest.raises(NotFittedError):
        TiledFFT().transform(X)
    with pytest.raises(ValueError):
        TiledFFT().fit(np.ones((2, 12)))
    with pytest.raises(ValueError):
        TiledFFT().fit(X).transform(X[:, :2048])
    with pytest.raises(ValueError):
        TiledFFT(precision="half").fit(X)
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        TiledFFT().fit(bad)
