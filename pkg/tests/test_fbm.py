import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fwnvolterra.errors import GridMismatchError
from fwnvolterra.fbm import (STREAM_STRIDE, SeedSpec, fbm_covariance, fgn_autocovariance,
                             sample_fbm, sample_noise_coefficients, wiener_integral)
from fwnvolterra.fraccalc import SampledFunction, lambda_h_inner, lambda_h_norm


def test_covariance_formula():
    assert fbm_covariance(1.0, 1.0, 0.7) == pytest.approx(1.0)
    assert fbm_covariance(0.0, 2.0, 0.3) == 0.0
    assert fbm_covariance(1.0, 2.0, 0.5) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fbm_covariance(-1.0, 1.0, 0.5)


def test_fgn_autocovariance_sums_to_variance():
    H, n = 0.65, 50
    g = fgn_autocovariance(H, n)
    # Var(B(n)) = sum_{i,j} gamma(|i-j|)
    k = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    assert g[k].sum() == pytest.approx(n ** (2 * H), rel=1e-12)


def test_stream_index_rule():
    s = SeedSpec(7)
    assert s.stream_index(3, 5) == 3 * STREAM_STRIDE + 5
    with pytest.raises(ValueError):
        s.stream_index(0, STREAM_STRIDE)
    with pytest.raises(ValueError):
        SeedSpec(-1)


def test_paths_start_at_zero_and_are_reproducible():
    a = sample_fbm(0.3, 32, 0.1, 5, 123)
    b = sample_fbm(0.3, 32, 0.1, 5, 123)
    assert np.all(a.paths[:, 0] == 0)
    np.testing.assert_array_equal(a.paths, b.paths)
    c = sample_fbm(0.3, 32, 0.1, 5, 124)
    assert not np.array_equal(a.paths, c.paths)


def test_replicates_do_not_depend_on_count():
    a = sample_fbm(0.6, 16, 0.1, 3, 9, mode=2)
    b = sample_fbm(0.6, 16, 0.1, 8, 9, mode=2)
    np.testing.assert_array_equal(a.paths, b.paths[:3])
    assert a[1].seed_lineage == (9, 2 * STREAM_STRIDE + 1)


@pytest.mark.parametrize("H", [0.2, 0.5, 0.85])
def test_dense_and_circulant_share_the_law(H):
    n, count = 16, 4000
    for method in ("circulant", "dense"):
        ens = sample_fbm(H, n, 1.0 / n, count, 1, method=method)
        assert ens.method == method
        var = ens.paths[:, -1].var()
        se = math.sqrt(2.0 / count)
        assert abs(var - 1.0) < 4 * se


def test_brownian_increments_are_uncorrelated():
    ens = sample_fbm(0.5, 64, 1 / 64, 4000, 5)
    inc = np.diff(ens.paths, axis=1)
    c = np.corrcoef(inc[:, 10], inc[:, 11])[0, 1]
    assert abs(c) < 4 / math.sqrt(4000)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        sample_fbm(1.2, 10, 0.1, 1, 0)
    with pytest.raises(ValueError):
        sample_fbm(0.5, 0, 0.1, 1, 0)
    with pytest.raises(ValueError):
        sample_fbm(0.5, 10, -0.1, 1, 0)


def test_csv_export():
    buf = io.StringIO()
    sample_fbm(0.5, 2, 0.5, 2, 0, mode=4).write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,value,mode,replicate"
    assert len(lines) == 1 + 2 * 3
    assert lines[1].endswith(",4,0")


# -- Wiener integrals -----------------------------------------------------------

def test_integral_of_indicator_is_increment():
    ens = sample_fbm(0.7, 20, 0.1, 3, 2)
    f = SampledFunction.indicator(0.5, 1.2, 0.1)
    vals = wiener_integral(f, ens)
    np.testing.assert_allclose(vals, ens.paths[:, 12] - ens.paths[:, 5], atol=1e-14)
    assert wiener_integral(f, ens[1]) == pytest.approx(vals[1])


def test_integral_requires_matching_grid():
    ens = sample_fbm(0.7, 20, 0.1, 1, 2)
    with pytest.raises(GridMismatchError):
        wiener_integral(SampledFunction.indicator(0, 1, 0.05), ens)
    with pytest.raises(GridMismatchError):
        wiener_integral(SampledFunction.indicator(1.5, 2.5, 0.1), ens)
    with pytest.raises(TypeError):
        wiener_integral(SampledFunction.indicator(0, 1, 0.1), ens.paths)


@given(H=st.sampled_from([0.25, 0.5, 0.75]), seed=st.integers(0, 10_000))
@settings(max_examples=6, deadline=None)
def test_isometry(H, seed):
    rng = np.random.default_rng(seed)
    n, count = 32, 8000
    f = SampledFunction(1 / n, 0.0, rng.normal(size=n))
    g = SampledFunction(1 / n, 0.0, rng.normal(size=n))
    ens = sample_fbm(H, n, 1 / n, count, seed)
    prod = wiener_integral(f, ens) * wiener_integral(g, ens)
    se = prod.std(ddof=1) / math.sqrt(count)
    # 4.5 standard errors keeps the false-alarm rate negligible over hypothesis draws
    assert abs(prod.mean() - lambda_h_inner(f, g, H)) < 4.5 * se
    sq = wiener_integral(f, ens) ** 2
    assert abs(sq.mean() - lambda_h_norm(f, H) ** 2) < 4.5 * sq.std(ddof=1) / math.sqrt(count)


# -- noise coefficients ------------------------------------------------------------

def test_noise_coefficients_scaling_and_streams():
    gamma = [4.0, 0.0, 1.0]
    out = sample_noise_coefficients(gamma, 3, 0.6, 10, 0.1, 4, 11)
    assert out.shape == (3, 4, 11)
    assert np.all(out[1] == 0)
    ref = sample_fbm(0.6, 10, 0.1, 4, 11, mode=1).paths
    np.testing.assert_array_equal(out[0], 2.0 * ref)


def test_noise_coefficients_independent_of_workers():
    gamma = 1.0 / np.arange(1, 9) ** 2
    a = sample_noise_coefficients(gamma, 8, 0.3, 50, 0.02, 20, 42, workers=1)
    b = sample_noise_coefficients(gamma, 8, 0.3, 50, 0.02, 20, 42, workers=4)
    assert a.tobytes() == b.tobytes()


def test_noise_coefficients_validation():
    with pytest.raises(ValueError):
        sample_noise_coefficients([1.0], 2, 0.5, 10, 0.1, 1, 0)
    with pytest.raises(ValueError):
        sample_noise_coefficients([-1.0], 1, 0.5, 10, 0.1, 1, 0)
