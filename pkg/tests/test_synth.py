import math

import numpy as np
import pytest

from turbscale import (DomainError, FlowParameters, SimilarityModel, SyntheticSpec, fit_line,
                       model_d2, model_d3, synth_ess_dataset, synth_velocity_signal)
from turbscale.estimator import structure_function
from turbscale.synth import VelocitySignal

from conftest import inertial_grid, reference_flows
from oracles import fit_window_lags, spectral_d2
from oracles import loglog_slope as fitted_exponent


def loglog_slope(f, r, h=1e-4):
    """Central finite difference of log f against log r."""
    up, down = f(r * math.exp(h)), f(r * math.exp(-h))
    return float((np.log(up) - np.log(down)) / (2 * h))


def test_complete_similarity_limit():
    m = SimilarityModel(c0=2.0, c1=0.0, alpha1=0.0, b3=1.0)
    flow = FlowParameters.from_reynolds(5000.0, 1e-5, 0.5)
    r = flow.lambda_k * np.array([1e6, 1e7, 1e8])
    assert np.allclose(model_d2(r, m, flow), 2.0 * (0.5 * r) ** (2 / 3), rtol=1e-10, atol=0)


@pytest.mark.parametrize("re, expected", [(6000.0, 0.70001), (18000.0, 0.69626), (300000.0, 0.68967)])
def test_inertial_exponent_of_d2(model, re, expected):
    flow = FlowParameters.from_reynolds(re, 1.5e-5, 1.0)
    s = loglog_slope(lambda r: model_d2(r, model, flow), 1e4 * flow.lambda_k)
    assert s == pytest.approx(2 / 3 + 0.29 / math.log(re), abs=1e-6)
    assert s == pytest.approx(expected, abs=1e-4)


def test_dissipation_range_exponents(model, flows):
    for flow in flows:
        r = 1e-3 * flow.lambda_k
        assert loglog_slope(lambda x: model_d2(x, model, flow), r) == pytest.approx(2.0, abs=1e-3)
        assert loglog_slope(lambda x: model_d3(x, model, flow), r) == pytest.approx(3.0, abs=1e-3)


def test_d3_inertial_and_trivial_value():
    m = SimilarityModel(c0=1.0, c1=0.0, alpha1=0.0, b3=1.0)
    flow = FlowParameters.from_reynolds(1e4, 1e-12, 1.0)
    assert model_d3(2.0, m, flow) == pytest.approx(2.0, rel=1e-12)
    assert loglog_slope(lambda x: model_d3(x, m, flow), 1e5 * flow.lambda_k) == pytest.approx(1.0, abs=1e-8)


def test_d3_monotone(model, flows):
    r = flows[0].lambda_k * np.logspace(-4, 6, 400)
    assert np.all(np.diff(model_d3(r, model, flows[0])) > 0)


def test_sharpness_keeps_asymptotes(model, flows):
    flow = flows[0]
    for s in (1.0, 2.0, 4.0):
        f2 = lambda x: model_d2(x, model, flow, sharpness=s)
        assert loglog_slope(f2, 1e-3 * flow.lambda_k) == pytest.approx(2.0, abs=1e-3)
        assert loglog_slope(f2, 1e4 * flow.lambda_k) == pytest.approx(model.exponent(flow.re), abs=1e-6)


def test_model_domain_errors(model):
    low = FlowParameters(nu=1.0, eps_mean=1.0, lambda_t=1.0)  # Re = 1
    with pytest.raises(DomainError):
        model_d2(1.0, model, low)
    with pytest.raises(DomainError):
        model_d3(1.0, model, low)
    with pytest.raises(DomainError):
        model_d2(-1.0, model, reference_flows()[0])
    negative = SimilarityModel(c0=0.1, c1=-5.0, alpha1=0.29, b3=1.0)
    with pytest.raises(DomainError):
        model_d2(1.0, negative, reference_flows()[0])
    with pytest.raises(DomainError):
        SimilarityModel(c0=1.0, c1=0.0, alpha1=0.0, b3=0.0)


def test_noiseless_complete_similarity_dataset_is_two_thirds():
    m = SimilarityModel(c0=1.5, c1=0.0, alpha1=0.0, b3=0.8)
    grid = inertial_grid(40, 1e4, 1e7)
    for s in synth_ess_dataset(SyntheticSpec(m, reference_flows(), grid)):
        slopes = np.diff(s.y) / np.diff(s.x)
        assert np.allclose(slopes, 2 / 3, atol=1e-9)


def test_noiseless_ess_slopes_match_exponent(model):
    sets = synth_ess_dataset(SyntheticSpec(model, reference_flows(), inertial_grid(80)))
    for s, expected in zip(sets, (0.70001, 0.69626, 0.68967)):
        slope = fit_line(s.x, s.y).slope
        assert slope == pytest.approx(model.exponent(s.re_tag), abs=1e-4)
        assert slope == pytest.approx(expected, abs=1e-4)


def test_ess_slope_decreases_with_re(model):
    res = [50.0, 300.0, 6000.0, 18000.0, 300000.0, 1e8]
    sets = synth_ess_dataset(SyntheticSpec(model, reference_flows(res), inertial_grid(40)))
    slopes = [fit_line(s.x, s.y).slope for s in sets]
    assert all(a > b for a, b in zip(slopes, slopes[1:]))


@pytest.mark.parametrize("alpha1", [0.0, 0.29, 1.0])
def test_dissipation_artifact_in_ess_plane(alpha1):
    m = SimilarityModel(c0=1.5, c1=2.0, alpha1=alpha1, b3=0.8)
    grid = reference_flows()[0].lambda_k * np.logspace(-5, -3, 30)
    for s in synth_ess_dataset(SyntheticSpec(m, reference_flows(), grid)):
        assert np.allclose(np.diff(s.y) / np.diff(s.x), 2 / 3, atol=1e-3)


def test_dataset_determinism_and_seed_dependence(model):
    spec = SyntheticSpec(model, reference_flows(), inertial_grid(30), noise_sigma=0.01, seed=11)
    a, b = synth_ess_dataset(spec), synth_ess_dataset(spec)
    for s, t in zip(a, b):
        assert s.x.tobytes() == t.x.tobytes() and s.y.tobytes() == t.y.tobytes()
    other = synth_ess_dataset(SyntheticSpec(model, reference_flows(), inertial_grid(30), noise_sigma=0.01, seed=12))
    assert not np.array_equal(a[0].y, other[0].y)


def test_per_flow_streams_do_not_depend_on_flow_order(model):
    flows = reference_flows()
    both = synth_ess_dataset(SyntheticSpec(model, flows[:2], inertial_grid(30), noise_sigma=0.01, seed=4))
    first = synth_ess_dataset(SyntheticSpec(model, flows[:1], inertial_grid(30), noise_sigma=0.01, seed=4))
    assert np.array_equal(both[0].y, first[0].y)


def test_noise_has_requested_size(model):
    grid = inertial_grid(2000, 1e3, 1e6)
    clean = synth_ess_dataset(SyntheticSpec(model, reference_flows()[:1], grid))[0]
    noisy = synth_ess_dataset(SyntheticSpec(model, reference_flows()[:1], grid, noise_sigma=0.02, seed=1))[0]
    # x noise reorders points, so compare line residuals instead of pointwise
    resid = noisy.y - fit_line(clean.x, clean.y).slope * noisy.x
    assert np.std(resid) == pytest.approx(0.02 * math.hypot(1, model.exponent(6000.0)), rel=0.1)


def test_spec_validation(model):
    with pytest.raises(DomainError):
        SyntheticSpec(model, reference_flows(), [1.0, 0.5])
    with pytest.raises(DomainError):
        SyntheticSpec(model, reference_flows(), [1.0, 2.0], noise_sigma=-1)
    with pytest.raises(DomainError):
        SyntheticSpec(model, reference_flows(), [1.0, 2.0], crossover_sharpness=0.5)


# -- velocity signals ---------------------------------------------------------

def test_signal_is_nonzero_and_zero_mean():
    for n in (4, 8, 1024):
        sig = synth_velocity_signal(n, 5 / 3, 0.01, seed=0)
        assert np.any(sig.samples != 0)
        assert abs(sig.samples.mean()) < 1e-12
        assert sig.samples.std() == pytest.approx(1.0)


def test_signal_determinism():
    a = synth_velocity_signal(256, 5 / 3, 1.0, seed=5)
    b = synth_velocity_signal(256, 5 / 3, 1.0, seed=5)
    assert a.samples.tobytes() == b.samples.tobytes()


@pytest.mark.parametrize("n, beta", [(6, 5 / 3), (0, 5 / 3), (64, 1.0), (64, 3.0), (64, 0.5)])
def test_signal_domain_errors(n, beta):
    with pytest.raises(DomainError):
        synth_velocity_signal(n, beta, 1.0)


def test_signal_spectrum_slope():
    sig = synth_velocity_signal(4096, 5 / 3, 1.0, seed=2)
    power = np.abs(np.fft.rfft(sig.samples)) ** 2
    k = np.arange(1, 2047)
    assert fit_line(np.log10(k), np.log10(power[1:2047])).slope == pytest.approx(-5 / 3, abs=1e-9)


def _third_moment_z(u, lags):
    n = u.size
    out = []
    for lag in lags:
        d3 = (u[lag:] - u[:-lag]) ** 3
        # overlapping increments are correlated over about one lag
        se = d3.std() / math.sqrt((n - lag) / lag)
        out.append(d3.mean() / se)
    return np.array(out)


def test_gaussian_synthesis_has_no_third_moment():
    lags = 2 ** np.arange(0, 11)
    z = _third_moment_z(synth_velocity_signal(2**16, 5 / 3, 1.0, seed=9).samples, lags)
    assert np.all(np.abs(z) < 3)


def test_third_moment_check_detects_skewed_signal():
    u = (np.arange(2**16) % 64) / 64.0  # slow rise, sudden drop
    z = _third_moment_z(u, [1, 2, 4, 8])
    assert np.all(np.abs(z) > 3)


def test_velocity_signal_validation():
    with pytest.raises(DomainError):
        VelocitySignal(np.array([1.0]), 1.0)
    with pytest.raises(DomainError):
        VelocitySignal(np.array([1.0, np.nan]), 1.0)
    with pytest.raises(DomainError):
        VelocitySignal(np.array([1.0, 2.0]), 0.0)


@pytest.mark.parametrize("beta, lo, hi", [(5 / 3, 2 / 3 - 0.05, 2 / 3 + 0.05), (2.99, 1.8, 2.0)])
def test_estimated_d2_exponent_matches_spectral_oracle(beta, lo, hi):
    n = 2**20
    lags = fit_window_lags(n)
    sig = synth_velocity_signal(n, beta, 1.0, seed=0)
    got = fitted_exponent(lags, structure_function(sig, 2, lags).values)
    want = fitted_exponent(lags, spectral_d2(n, beta, lags))
    assert lo < want < hi
    assert lo < got < hi
    assert got == pytest.approx(want, abs=0.02)
