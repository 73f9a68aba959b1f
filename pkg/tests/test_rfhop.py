import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, special

from rfso.errors import ModelError
from rfso.rfhop import RfHopConfig, jakes_rho, prs_cdf, prs_mean, sample_selected_pair


def sampled_gamma1(cfg, n, seed, chunk=1_000_000):
    rng = np.random.default_rng(seed)
    parts = []
    while n > 0:
        k = min(chunk, n)
        parts.append(sample_selected_pair(cfg, rng, k)[1])
        n -= k
    return np.concatenate(parts)


configs = st.builds(
    lambda N, frac, rho, g: RfHopConfig(N, max(1, math.ceil(frac * N)), rho, g),
    st.integers(1, 8), st.floats(0.01, 1.0), st.floats(0.0, 1.0), st.floats(0.1, 1e3),
)


@pytest.mark.parametrize("kw", [dict(N=0, m=1), dict(N=3, m=0), dict(N=3, m=4),
                                dict(N=3, m=2, rho=1.5), dict(N=3, m=2, rho=-0.1),
                                dict(N=3, m=2, gbar1=0.0), dict(N=2.5, m=1)])
def test_config_validation(kw):
    full = dict(N=3, m=2, rho=0.5, gbar1=10.0) | kw
    with pytest.raises(ModelError):
        RfHopConfig(**full)


def test_jakes_rho_zero_delay():
    assert jakes_rho(0.0) == 1.0


def test_jakes_rho_table_value_by_bisection():
    # oracle J0 from scipy; bisection for the delay giving rho = 0.9
    x = optimize.bisect(lambda t: special.j0(2 * math.pi * t) - 0.9, 0.0, 0.3, xtol=1e-15)
    assert jakes_rho(x) == pytest.approx(0.9, abs=1e-12)


def test_jakes_rho_rejects_negative_lobe():
    first_zero = optimize.brentq(special.j0, 2.0, 3.0, xtol=1e-15)
    assert jakes_rho(first_zero / (2 * math.pi) * 0.999) > 0.0
    with pytest.raises(ModelError):
        jakes_rho(first_zero / (2 * math.pi) * 1.01)
    with pytest.raises(ModelError):
        jakes_rho(-0.1)


def test_full_correlation_keeps_the_outdated_snr():
    cfg = RfHopConfig(4, 2, 1.0, 5.0)
    outdated, current = sample_selected_pair(cfg, np.random.default_rng(0), 10_000)
    assert np.allclose(current, outdated, rtol=1e-12, atol=0.0)


def test_zero_correlation_decouples_the_snrs():
    cfg = RfHopConfig(3, 3, 0.0, 1.0)
    n = 1_000_000
    outdated, current = sample_selected_pair(cfg, np.random.default_rng(1), n)
    r = np.corrcoef(outdated, current)[0, 1]
    assert abs(r) < 3.0 / math.sqrt(n)


def test_selected_snr_cdf_within_dkw_band():
    cfg = RfHopConfig(5, 5, 0.9, 10.0)
    n = 1_000_000
    x = np.sort(sampled_gamma1(cfg, n, seed=2))
    grid = x[:: n // 2000]
    emp = np.searchsorted(x, grid, side="right") / n
    model = np.array([prs_cdf(cfg, g) for g in grid])
    eps = math.sqrt(math.log(2.0 / 1e-3) / (2.0 * n))
    assert np.max(np.abs(emp - model)) < eps


def test_cdf_at_zero_and_single_relay():
    cfg = RfHopConfig(5, 3, 0.9, 10.0)
    assert prs_cdf(cfg, 0.0) == 0.0
    one = RfHopConfig(1, 1, 0.3, 7.0)
    for x in (0.1, 1.0, 7.0, 30.0):
        assert prs_cdf(one, x) == pytest.approx(-math.expm1(-x / 7.0), rel=1e-14)


def test_mid_rank_cdf_and_mean_against_simulation():
    cfg = RfHopConfig(5, 3, 0.9, 10.0)
    g = sampled_gamma1(cfg, 10_000_000, seed=3)
    assert abs(np.mean(g < 5.0) - prs_cdf(cfg, 5.0)) < 1e-3
    se = np.std(g) / math.sqrt(g.size)
    assert abs(np.mean(g) - prs_mean(cfg)) < 3 * se


def test_mean_single_relay_and_harmonic_numbers():
    assert prs_mean(RfHopConfig(1, 1, 0.4, 3.0)) == pytest.approx(3.0, rel=1e-15)
    for N in (2, 3, 5):
        harmonic = sum(1.0 / k for k in range(1, N + 1))
        assert prs_mean(RfHopConfig(N, N, 1.0, 2.0)) == pytest.approx(2.0 * harmonic, rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(configs)
def test_cdf_is_a_distribution(cfg):
    xs = np.linspace(0.0, 20.0 * cfg.gbar1, 1000)
    f = np.array([prs_cdf(cfg, x) for x in xs])
    assert np.all(np.diff(f) >= -1e-12)
    assert abs(prs_cdf(cfg, 50.0 * cfg.gbar1) - 1.0) < 1e-10


@settings(max_examples=40, deadline=None)
@given(configs)
def test_mean_is_integral_of_ccdf(cfg):
    val, _ = integrate.quad(lambda x: 1.0 - prs_cdf(cfg, x), 0.0, np.inf, epsrel=1e-12, limit=200)
    assert val == pytest.approx(prs_mean(cfg), rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.floats(0.0, 1.0), st.floats(0.01, 50.0))
def test_best_rank_dominates_worst_rank(N, rho, x):
    best = RfHopConfig(N, N, rho, 1.0)
    worst = RfHopConfig(N, 1, rho, 1.0)
    assert prs_cdf(best, x) <= prs_cdf(worst, x) + 1e-12


def test_mean_increases_with_correlation():
    for N in (2, 5):
        means = [prs_mean(RfHopConfig(N, N, r, 1.0)) for r in (0.0, 0.25, 0.5, 0.75, 1.0)]
        assert all(b > a for a, b in zip(means, means[1:]))
