import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from fwnvolterra.errors import GridMismatchError
from fwnvolterra.fraccalc import (SampledFunction, align, fractional_integral, hdot_norm,
                                  hdot_norm_spectral, hurst_regime, lambda_h_inner, lambda_h_norm,
                                  lambda_h_prefactor, marchaud_derivative, time_reversal_shift,
                                  zeta_constant)

hursts = st.floats(0.05, 0.95)


def random_function(seed, n=40, step=0.05, start=0.0):
    rng = np.random.default_rng(seed)
    return SampledFunction(step, start, rng.normal(size=n))


# -- SampledFunction ------------------------------------------------------

def test_evaluation_is_piecewise_constant_and_zero_outside():
    f = SampledFunction(0.5, 1.0, [2.0, 3.0])
    assert f(1.0) == 2.0
    assert f(1.49) == 2.0
    assert f(1.5) == 3.0
    assert f(0.99) == 0.0
    assert f(2.0) == 0.0
    assert f.support_end == 2.0


def test_values_are_read_only_and_validated():
    f = SampledFunction(0.1, 0.0, [1.0, 2.0])
    with pytest.raises(ValueError):
        f.values[0] = 3.0
    with pytest.raises(ValueError):
        SampledFunction(0.0, 0.0, [1.0])
    with pytest.raises(ValueError):
        SampledFunction(0.1, 0.0, [np.nan])


def test_arithmetic_aligns_supports():
    f = SampledFunction.indicator(0.0, 1.0, 0.25)
    g = SampledFunction.indicator(0.5, 1.5, 0.25)
    s = f + g
    assert s.start == 0.0 and s.n_cells == 6
    np.testing.assert_array_equal(s.values, [1, 1, 2, 2, 1, 1])
    assert (f - f).is_zero()
    assert (2 * f).integral() == pytest.approx(2.0)


def test_misaligned_grids_are_rejected():
    f = SampledFunction.indicator(0.0, 1.0, 0.25)
    with pytest.raises(GridMismatchError):
        align(f, SampledFunction.indicator(0.0, 1.0, 0.2))
    with pytest.raises(GridMismatchError):
        align(f, SampledFunction(0.25, 0.1, [1.0]))


def test_csv_columns():
    import io
    buf = io.StringIO()
    SampledFunction(0.5, 0.0, [1.0, 2.0]).write_csv(buf)
    assert buf.getvalue().splitlines() == ["tau,value", "0.0,1.0", "0.5,2.0"]


def test_hurst_regime():
    assert hurst_regime(0.3) == "anti-persistent"
    assert hurst_regime(0.5) == "brownian"
    assert hurst_regime(0.8) == "persistent"
    with pytest.raises(ValueError):
        hurst_regime(1.0)


# -- fractional integral and derivative -------------------------------------

@pytest.mark.parametrize("alpha", [0.2, 0.5, 1.0, 1.7])
def test_integral_of_indicator_matches_closed_form_at_nodes(alpha):
    a, b, h = 0.5, 1.25, 0.05
    f = SampledFunction.indicator(a, b, h)
    If = fractional_integral(f, alpha)
    x = If.nodes
    exact = (np.maximum(b - x, 0) ** alpha - np.maximum(a - x, 0) ** alpha) / special.gamma(alpha + 1)
    np.testing.assert_allclose(If.values, exact, atol=1e-13)


def test_integral_of_order_one_is_tail_integral():
    f = random_function(3)
    If = fractional_integral(f, 1.0, padding=0.0)
    tail = f.grid_step * np.cumsum(f.values[::-1])[::-1]
    np.testing.assert_allclose(If.values, tail, atol=1e-12)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_marchaud_is_left_inverse(alpha):
    f = random_function(7)
    back = marchaud_derivative(fractional_integral(f, alpha), alpha).regrid(f.start, f.support_end)
    np.testing.assert_allclose(back.values, f.values, atol=1e-9)


def test_cell_marchaud_is_close_away_from_jumps():
    h = 1e-3
    f = SampledFunction.from_function(lambda x: np.sin(np.pi * x) ** 2, 0.0, 1.0, h)
    back = marchaud_derivative(fractional_integral(f, 0.5), 0.5, method="cell")
    g = back.regrid(0.2, 0.8)
    np.testing.assert_allclose(g.values, f.regrid(0.2, 0.8).values, atol=5e-2)


def test_operator_argument_checks():
    f = random_function(0)
    with pytest.raises(ValueError):
        fractional_integral(f, 0.0)
    with pytest.raises(ValueError):
        marchaud_derivative(f, 1.0)
    with pytest.raises(ValueError):
        marchaud_derivative(f, 0.5, method="bogus")


# -- zeta and the Lambda_H norms -------------------------------------------

@pytest.mark.parametrize("a", [-0.45, -0.25, -0.1, 0.1, 0.25, 0.45])
def test_zeta_constant_closed_form(a):
    closed = math.sqrt(special.gamma(a + 1) ** 2 / (special.gamma(2 * a + 2) * math.cos(math.pi * a)))
    assert zeta_constant(a) == pytest.approx(closed, rel=1e-10)


def test_zeta_at_zero_and_range():
    assert zeta_constant(0.0) == 1.0
    assert lambda_h_prefactor(0.5) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        zeta_constant(0.5)


@given(H=hursts, t=st.sampled_from([0.25, 0.5, 1.0, 2.0]))
@settings(max_examples=25, deadline=None)
def test_indicator_norm_is_fbm_variance(H, t):
    f = SampledFunction.indicator(0.0, t, t / 16)
    assert lambda_h_norm(f, H) ** 2 == pytest.approx(t ** (2 * H), rel=1e-8)


@pytest.mark.parametrize("H", [0.2, 0.5, 0.8])
def test_inner_product_of_adjacent_indicators(H):
    f = SampledFunction.indicator(0.0, 1.0, 0.1)
    g = SampledFunction.indicator(1.0, 2.0, 0.1)
    # E[B(1)(B(2) - B(1))]
    assert lambda_h_inner(f, g, H) == pytest.approx(2 ** (2 * H - 1) - 1, abs=1e-9)


def test_brownian_case_is_l2():
    f = random_function(11)
    assert lambda_h_norm(f, 0.5) == pytest.approx(f.l2_norm(), rel=1e-12)


def test_norm_is_translation_invariant():
    f = random_function(5)
    g = SampledFunction(f.grid_step, 3.0, f.values)
    assert lambda_h_norm(g, 0.7) == pytest.approx(lambda_h_norm(f, 0.7), rel=1e-10)


@given(seed=st.integers(0, 1000), H=hursts, c=st.floats(-5, 5))
@settings(max_examples=20, deadline=None)
def test_norm_is_homogeneous_and_satisfies_cauchy_schwarz(seed, H, c):
    f = random_function(seed, n=12)
    g = random_function(seed + 1, n=12)
    nf = lambda_h_norm(f, H)
    assert lambda_h_norm(c * f, H) == pytest.approx(abs(c) * nf, rel=1e-9, abs=1e-12)
    assert abs(lambda_h_inner(f, g, H)) <= nf * lambda_h_norm(g, H) * (1 + 1e-9)


@pytest.mark.parametrize("H", [0.15, 0.4, 0.75, 0.9])
def test_norm_is_variance_of_increment_sum(H):
    # ||f||^2 = Var(sum_i f_i (B(t_{i+1}) - B(t_i))), a quadratic form in the fGn autocovariance
    f = random_function(6, n=25, step=0.04)
    k = np.abs(np.subtract.outer(np.arange(25), np.arange(25))).astype(float)
    gam = 0.5 * (np.abs(k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H))
    ref = f.grid_step ** (2 * H) * f.values @ gam @ f.values
    assert lambda_h_norm(f, H) ** 2 == pytest.approx(ref, rel=1e-8)


# -- homogeneous Bessel-potential norms ---------------------------------------

@pytest.mark.parametrize("sigma", [-0.4, -0.2, 0.0, 0.2, 0.4])
def test_spectral_and_time_domain_norms_agree(sigma):
    f = random_function(2, n=30)
    assert hdot_norm_spectral(f, sigma) == pytest.approx(hdot_norm(f, sigma), rel=1e-6)


def test_spectral_norm_divergence():
    f = SampledFunction.indicator(0.0, 1.0, 0.1)
    assert hdot_norm_spectral(f, 0.5) == math.inf
    assert hdot_norm_spectral(f, -0.6) == math.inf
    # zero-mean functions have a finite norm below -1/2
    d = SampledFunction(0.1, 0.0, np.r_[np.ones(10), -np.ones(10)])
    assert math.isfinite(hdot_norm_spectral(d, -0.8))


def test_lambda_norm_equals_scaled_hdot_norm():
    f = random_function(4)
    for H in (0.3, 0.7):
        lhs = lambda_h_norm(f, H) ** 2
        rhs = lambda_h_prefactor(H) * hdot_norm_spectral(f, 0.5 - H) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-6)


# -- time reversal --------------------------------------------------------------

def test_time_reversal_shift():
    f = SampledFunction(1.0, 0.0, [1.0, 2.0, 3.0])
    r = time_reversal_shift(f, 5.0)
    assert r.start == 2.0
    np.testing.assert_array_equal(r.values, [3.0, 2.0, 1.0])
    assert r(4.5) == f(0.5)
    with pytest.raises(ValueError):
        time_reversal_shift(f, -1.0)


@pytest.mark.parametrize("t", [0.0, 1.0, 2.0, 5.0])
def test_shift_preserves_hdot_norm(t):
    f = random_function(9)
    base = hdot_norm_spectral(f, -0.25)
    assert hdot_norm_spectral(time_reversal_shift(f, t), -0.25) == pytest.approx(base, rel=1e-9)
