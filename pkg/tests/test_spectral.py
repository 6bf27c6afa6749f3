import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from fwnvolterra.kernels import KernelSpec
from fwnvolterra.resolvent import resolvent_oracle
from fwnvolterra.spectral import (FractionalDynamics, KernelDynamics, SpectralModel,
                                  alpha2_local_condition, check_hypothesis_e, covariance_eigenvalues,
                                  deterministic_part, evaluate_field, increment_variance_spectral,
                                  mode_responses, regularity_conditions, series_condition,
                                  sigma_conditions, simulate_solution, structure_function_space,
                                  structure_function_time, theorem42_example_conditions,
                                  variance_spectral)
from fwnvolterra.spectral import _causal_convolution

TEMPERED = KernelDynamics(KernelSpec.tempered(0.5, 1.0))
EXPDECAY = FractionalDynamics(1.0, 1.0)  # r(t) = exp(-mu t)


# -- model ------------------------------------------------------------------------

def test_model_validation():
    with pytest.raises(ValueError):
        SpectralModel([2.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        SpectralModel([1.0], [-1.0])
    with pytest.raises(ValueError):
        SpectralModel([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        SpectralModel.example(1, 1.0, 10)
    with pytest.raises(ValueError):
        SpectralModel.example(1.5, 2.0, 10)


def test_example_family():
    mdl = SpectralModel.example(2, 1.5, 6)
    np.testing.assert_allclose(mdl.mu, np.arange(1, 7.0) ** 4)
    np.testing.assert_allclose(mdl.gamma, np.arange(1, 7.0) ** -1.5)
    assert mdl.truncated(3).N == 3 and mdl.truncated(3).is_example
    with pytest.raises(ValueError):
        mdl.truncated(7)
    with pytest.raises(ValueError):
        mdl.eval([4.0])


def test_sine_family_is_orthonormal():
    mdl = SpectralModel.example(1, 2.0, 8)
    xi = np.linspace(0, math.pi, 4001)
    E = mdl.eval(xi)
    gram = integrate.simpson(E[:, None, :] * E[None, :, :], x=xi, axis=-1)
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-10)


@pytest.mark.parametrize("m", [1, 2])
def test_hypothesis_e_holds_for_sine_family(m):
    rep = check_hypothesis_e(SpectralModel.example(m, 2.0, 40), np.linspace(0, math.pi, 2001))
    assert rep["passed"]
    assert rep["C"] == pytest.approx(math.sqrt(2 / math.pi), rel=1e-6)


def test_hypothesis_e_fails_for_rescaled_family():
    k = np.arange(1, 41.0)
    mdl = SpectralModel(k**2, k**-2.0, eigenfunction=lambda n, x: n * np.sin(n * x),
                        gradient=lambda n, x: n * n * np.cos(n * x))
    assert not check_hypothesis_e(mdl, np.linspace(0, math.pi, 2001))["passed"]


# -- responses and variance ------------------------------------------------------------

def test_responses_exponential_decay():
    mdl = SpectralModel.example(1, 2.0, 3)
    r = mode_responses(mdl, EXPDECAY, 0.1, 5)
    t = 0.1 * np.arange(1, 6)
    np.testing.assert_allclose(r, np.exp(-np.outer(mdl.mu, t)), rtol=1e-12)


def test_kernel_responses_match_ode_oracle():
    mdl = SpectralModel.example(1, 2.0, 4)
    k = KernelSpec.exponential(1.0)
    r = mode_responses(mdl, KernelDynamics(k), 0.01, 200)
    t = 0.01 * np.arange(1, 201)
    for i, mu in enumerate(mdl.mu):
        np.testing.assert_allclose(r[i], resolvent_oracle(k, mu, t), atol=1e-4)


def test_variance_at_time_zero():
    mdl = SpectralModel.example(1, 2.0, 5)
    assert variance_spectral(mdl, TEMPERED, 0.0, 0.3, 0.01)["variance"] == 0.0


def test_brownian_variance_is_l2_sum():
    mdl = SpectralModel.example(1, 2.0, 6)
    h, t = 0.01, 0.5
    v = variance_spectral(mdl, EXPDECAY, t, 0.5, h)
    tk = h * np.arange(1, 51)
    exact = sum(g * h * np.sum(np.exp(-2 * mu * tk)) for g, mu in zip(mdl.gamma, mdl.mu))
    assert v["variance"] == pytest.approx(exact, rel=1e-12)
    # continuum integral, to first order in h
    cont = sum(g * integrate.quad(lambda s: math.exp(-2 * mu * s), 0, t)[0]
               for g, mu in zip(mdl.gamma, mdl.mu))
    assert v["variance"] == pytest.approx(cont, rel=0.1)


def test_variance_monotone_in_time_and_modes():
    mdl = SpectralModel.example(1, 2.0, 10)
    resp = mode_responses(mdl, TEMPERED, 0.02, 100)
    vs = [variance_spectral(mdl, TEMPERED, t, 0.5, 0.02, responses=resp)["variance"]
          for t in (0.2, 0.6, 1.0, 2.0)]
    assert np.all(np.diff(vs) > 0)
    vn = [variance_spectral(mdl, TEMPERED, 1.0, 0.3, 0.02, N=n, responses=resp)["variance"]
          for n in (2, 5, 10)]
    assert np.all(np.diff(vn) > 0)


def test_increment_from_zero_is_variance():
    mdl = SpectralModel.example(1, 2.0, 4)
    resp = mode_responses(mdl, TEMPERED, 0.05, 20)
    v = variance_spectral(mdl, TEMPERED, 1.0, 0.7, 0.05, responses=resp)["variance"]
    assert increment_variance_spectral(mdl, TEMPERED, 1.0, 0.0, 0.7, 0.05, responses=resp) == pytest.approx(v)
    assert increment_variance_spectral(mdl, TEMPERED, 1.0, 1.0, 0.7, 0.05, responses=resp) == 0.0


def test_off_grid_time_rejected():
    with pytest.raises(ValueError):
        variance_spectral(SpectralModel.example(1, 2.0, 2), TEMPERED, 0.333, 0.5, 0.1)


def test_covariance_eigenvalues():
    mdl = SpectralModel(np.array([1.0, 4.0, 9.0]), np.array([1.0, 0.0, 0.5]))
    rep = covariance_eigenvalues(mdl, TEMPERED, 1.0, 0.6, 0.02)
    assert rep["eigenvalues"][1] == 0.0
    assert rep["trace"] == pytest.approx(sum(rep["eigenvalues"]))
    assert rep["trace"] == pytest.approx(variance_spectral(mdl, TEMPERED, 1.0, 0.6, 0.02)["variance"])
    assert rep["rho"] == pytest.approx(1.5)


# -- Monte Carlo -------------------------------------------------------------------------

@given(seed=st.integers(0, 2**31), n=st.integers(2, 40))
@settings(max_examples=20, deadline=None)
def test_fft_convolution_matches_direct_sum(seed, n):
    rng = np.random.default_rng(seed)
    resp, incr = rng.normal(size=n), rng.normal(size=(3, n))
    a = _causal_convolution(resp, incr, "fft")
    b = _causal_convolution(resp, incr, "direct")
    assert np.all(a[:, 0] == 0)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_zero_noise_gives_zero_ensemble():
    mdl = SpectralModel(np.array([1.0, 4.0]), np.zeros(2))
    ens = simulate_solution(mdl, TEMPERED, 0.5, 0.5, 0.01, 2, 10, 3)
    assert not ens.coefficients.any()
    sf = structure_function_time(ens)
    assert all(r["value"] == 0 for r in sf["rows"])
    assert math.isnan(sf["slope"])


def test_ensemble_is_independent_of_workers_and_method():
    mdl = SpectralModel.example(1, 2.0, 12)
    a = simulate_solution(mdl, TEMPERED, 0.3, 0.5, 0.01, 12, 50, 42, workers=1)
    b = simulate_solution(mdl, TEMPERED, 0.3, 0.5, 0.01, 12, 50, 42, workers=6)
    assert a.coefficients.tobytes() == b.coefficients.tobytes()
    c = simulate_solution(mdl, TEMPERED, 0.3, 0.5, 0.01, 12, 50, 42, method="direct")
    np.testing.assert_allclose(a.coefficients, c.coefficients, atol=1e-12)
    assert a.metadata()["seed"] == 42


def test_resource_limit():
    with pytest.raises(MemoryError):
        simulate_solution(SpectralModel.example(1, 2.0, 10), TEMPERED, 0.5, 1.0, 0.01, 10, 100,
                          0, max_elements=1000)


@pytest.mark.parametrize("H", [0.3, 0.5, 0.75])
def test_monte_carlo_matches_spectral_variance(H):
    mdl = SpectralModel.example(1, 2.0, 8)
    ens = simulate_solution(mdl, TEMPERED, H, 0.5, 0.01, 8, 2000, 7)
    energy = ens.energy(-1)
    se = energy.std(ddof=1) / math.sqrt(energy.size)
    exact = variance_spectral(mdl, TEMPERED, 0.5, H, 0.01, responses=ens.responses)["variance"]
    assert abs(energy.mean() - exact) < 3 * se


def test_modes_are_uncorrelated():
    mdl = SpectralModel.example(1, 2.0, 3)
    ens = simulate_solution(mdl, TEMPERED, 0.7, 0.5, 0.01, 3, 2000, 11)
    X = ens.coefficients[:, :, -1]
    assert np.all(ens.coefficients[:, :, 0] == 0)
    c = np.corrcoef(X)
    assert np.all(np.abs(c[np.triu_indices(3, 1)]) < 3 / math.sqrt(2000))
    assert np.all(np.abs(X.mean(axis=1)) < 3 * X.std(axis=1) / math.sqrt(2000))


def test_field_boundary_parseval_and_single_mode():
    mdl = SpectralModel.example(1, 2.0, 6)
    ens = simulate_solution(mdl, TEMPERED, 0.5, 0.2, 0.01, 6, 4, 1)
    u = evaluate_field(ens, [0.0, math.pi], time_indices=[5, 20])
    assert u.shape == (2, 2, 4)
    assert np.max(np.abs(u)) < 1e-12
    xi = np.linspace(0, math.pi, 2001)
    field = evaluate_field(ens, xi, time_indices=20)[0]
    np.testing.assert_allclose(integrate.simpson(field**2, x=xi, axis=0), ens.energy(20), rtol=1e-9)

    one = simulate_solution(mdl.truncated(1), TEMPERED, 0.5, 0.2, 0.01, 1, 4, 1)
    f1 = evaluate_field(one, [0.7])
    np.testing.assert_allclose(f1[:, 0, :], one.coefficients[0].T * mdl.eval(0.7)[0, 0], rtol=1e-14)
    with pytest.raises(ValueError):
        evaluate_field(one, [-0.1])


def test_deterministic_part():
    mdl = SpectralModel.example(1, 2.0, 3)
    k = KernelSpec.exponential(1.0)
    u0 = [1.0, 0.0, 0.5]
    np.testing.assert_array_equal(deterministic_part(mdl, k, u0, 0.0), u0)
    assert not deterministic_part(mdl, k, np.zeros(3), 1.0).any()
    vals = deterministic_part(mdl, k, u0, 1.5)
    ref = np.array([resolvent_oracle(k, mu, [1.5])[0] for mu in mdl.mu]) * u0
    np.testing.assert_allclose(vals, ref, atol=1e-5)


# -- structure functions ---------------------------------------------------------------------

@pytest.mark.parametrize("H", [0.3, 0.5])
def test_time_structure_function_of_nearly_free_mode(H):
    # s ~ 1 when mu is tiny, so the mode is an fBm and E|X(t+h) - X(t)|^2 = h^(2H)
    mdl = SpectralModel(np.array([1e-9]), np.array([1.0]))
    ens = simulate_solution(mdl, EXPDECAY, H, 2.0, 0.01, 1, 2000, 5)
    sf = structure_function_time(ens, deterministic=True)
    assert sf["slope"] == pytest.approx(2 * H, abs=0.05)
    for row in sf["rows"]:
        assert row["deterministic"] == pytest.approx(row["lag"] ** (2 * H), rel=1e-6)
        assert abs(row["value"] - row["deterministic"]) < 4 * row["stderr"]


def test_time_structure_function_lag_guard():
    ens = simulate_solution(SpectralModel.example(1, 2.0, 2), TEMPERED, 0.5, 1.0, 0.01, 2, 5, 0)
    with pytest.raises(ValueError):
        structure_function_time(ens, lags=[2, 8])
    with pytest.raises(ValueError):
        structure_function_time(ens, lags=[8])
    with pytest.raises(ValueError):
        structure_function_time(ens, lags=[4, 90])


def test_space_structure_function_matches_series():
    mdl = SpectralModel.example(1, 2.0, 20)
    ens = simulate_solution(mdl, TEMPERED, 0.6, 0.5, 0.01, 20, 2000, 9)
    rng = np.random.default_rng(3)
    pairs = [(a, a + d) for a, d in zip(rng.uniform(0.1, 2.0, 10), rng.uniform(0.05, 1.0, 10))]
    pairs.append((1.0, 1.0))
    sf = structure_function_space(ens, pairs)
    for row in sf["rows"][:-1]:
        assert abs(row["value"] - row["deterministic"]) < 3 * row["stderr"]
    assert sf["rows"][-1]["value"] == 0 and sf["rows"][-1]["deterministic"] == 0
    assert math.isfinite(sf["slope"])


# -- series conditions -------------------------------------------------------------------------

def test_series_condition_example_and_tabulated_agree():
    ex = SpectralModel.example(1, 2.0, 2000)
    tab = SpectralModel(ex.mu, ex.gamma)
    for p, conv in [(-0.5, True), (-0.2, True), (0.4, True), (0.5, False), (0.8, False)]:
        a, b = series_condition(ex, p), series_condition(tab, p)
        assert a.convergent == b.convergent == conv
        assert a.analytic_exponent == pytest.approx(2.0 - 2 * p)
        assert b.analytic_exponent is None
    lo, hi = series_condition(ex, -0.5).tail_bracket
    assert 0 < lo < hi
    assert series_condition(ex, 0.5).to_dict()["verdict"] == "divergent"


def test_series_condition_trivial_for_zero_noise():
    mdl = SpectralModel(np.arange(1, 11.0), np.zeros(10))
    c = series_condition(mdl, 5.0)
    assert c.convergent and c.partial_sum == 0.0


@given(H=st.floats(0.05, 0.95), rho=st.floats(1.0, 2.0), l=st.floats(1.01, 4), m=st.integers(1, 3))
@settings(max_examples=25, deadline=None)
def test_existence_series_always_converges_for_example(H, rho, l, m):
    rep = regularity_conditions(SpectralModel.example(m, l, 200), rho, H, 0.0)
    assert rep["existence"]["verdict"] == "convergent"
    assert rep["existence"]["analytic_exponent"] == pytest.approx(l + 4 * m * H / rho)


def test_example_conditions_worked_case():
    rep = theorem42_example_conditions(2, 1, 1.0, 0.4, 0.75, 0.5)
    assert rep["existence"] and not rep["time_holder"]
    assert rep["bounds"]["existence"] == pytest.approx(0.0)
    assert rep["bounds"]["time_holder"] == pytest.approx(0.5)
    assert rep["series_agree"]


@given(l=st.floats(1.1, 4), m=st.integers(1, 3), alpha=st.floats(0.1, 1.9),
       H=st.floats(0.05, 0.95), theta=st.floats(0, 1), frac=st.floats(0.01, 0.99))
@settings(max_examples=40, deadline=None)
def test_example_conditions_hold_inside_the_window(l, m, alpha, H, theta, frac):
    lo, hi = 1 - H + theta, 1 - H + alpha
    if hi <= lo:
        return
    rep = theorem42_example_conditions(l, m, alpha, lo + frac * (hi - lo), H, theta, N=200)
    assert rep["existence"] and rep["time_holder"] and rep["space_holder"]
    assert rep["in_window"] and rep["series_agree"]


def test_example_conditions_theta_zero_coincide_and_validate():
    for beta in (0.1, 0.2, 0.5):
        rep = theorem42_example_conditions(2, 1, 1.0, beta, 0.75, 0.0)
        assert rep["existence"] == rep["time_holder"]
    with pytest.raises(ValueError):
        theorem42_example_conditions(1.0, 1, 1.0, 0.5, 0.5, 0.0)
    with pytest.raises(ValueError):
        theorem42_example_conditions(2, 1, 2.0, 0.5, 0.5, 0.0)


@pytest.mark.parametrize("beta,H", [(0.6, 0.75), (0.5, 0.6), (0.9, 0.3), (1.2, 0.5), (0.3, 0.9)])
def test_sigma1_matches_existence_inequality(beta, H):
    mdl = SpectralModel.example(1, 2.0, 200)
    rep = sigma_conditions(mdl, 1.0, beta, H, 0.0)
    lo, hi = rep["window"]
    ex = theorem42_example_conditions(2, 1, 1.0, beta, H, 0.0)
    assert rep["sigma1"]["convergent"] == (ex["existence"] and lo < beta < hi)


def test_sigma_theta_zero_relations_and_window():
    mdl = SpectralModel.example(1, 2.0, 50)
    rep = sigma_conditions(mdl, 1.0, 0.6, 0.75, 0.0)
    assert rep["sigma2"]["partial_sum"] == pytest.approx(4 * rep["sigma1"]["partial_sum"])
    assert rep["sigma3"]["partial_sum"] == pytest.approx(rep["sigma1"]["partial_sum"])
    out = sigma_conditions(mdl, 1.0, 1.5, 0.75, 0.0)
    assert not out["sigma1"]["convergent"] and out["sigma1"]["partial_sum"] == math.inf


def test_alpha2_local_condition():
    assert not alpha2_local_condition(SpectralModel.example(3, 1.1, 100), 0.6)["convergent"]
    assert alpha2_local_condition(SpectralModel.example(1, 1.1, 100), 1.0)["convergent"]
    mdl = SpectralModel.example(1, 1.5, 100)
    assert not alpha2_local_condition(mdl, 0.6)["convergent"]
    assert alpha2_local_condition(mdl, 0.6, form="unsquared")["convergent"]
    with pytest.raises(ValueError):
        alpha2_local_condition(mdl, 0.4)
    with pytest.raises(ValueError):
        alpha2_local_condition(mdl, 1.0, form="other")
