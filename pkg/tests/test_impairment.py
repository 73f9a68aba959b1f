import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfso.errors import ModelError
from rfso.impairment import (
    bussgang_empirical_check,
    end_to_end_sndr,
    kappa_closed_form,
    relay_gain_and_kappa,
    sel_clip,
    sel_params,
    sel_params_db,
)

mp.mp.dps = 30


def sel_oracle(ibo):
    """Moments of a limiter on a unit-power Rayleigh envelope, by quadrature."""
    A = mp.sqrt(ibo)
    pdf = lambda r: 2 * r * mp.exp(-r**2)  # noqa: E731
    nu = mp.quad(lambda r: r * r * pdf(r), [0, A]) + mp.quad(lambda r: r * A * pdf(r), [A, mp.inf])
    mu = mp.quad(lambda r: r * r * pdf(r), [0, A]) + mp.quad(lambda r: A * A * pdf(r), [A, mp.inf])
    return float(nu), float(mu), float(mu - nu**2)


@pytest.mark.parametrize("ibo", [0.05, 0.5, 1.0, 2.0, 10 ** 0.3, 5.0, 20.0])
def test_sel_moments_against_quadrature(ibo):
    p = sel_params(ibo)
    nu, mu, sb = sel_oracle(ibo)
    assert p.nu == pytest.approx(nu, rel=1e-13)
    assert p.mu == pytest.approx(mu, rel=1e-13)
    assert p.sigma_b2 == pytest.approx(sb, rel=1e-9, abs=1e-16)


def test_unit_backoff_values():
    p = sel_params(1.0)
    e = math.exp(-1.0)
    assert p.mu == pytest.approx(1.0 - e, rel=1e-15)
    assert p.nu == pytest.approx(1.0 - e + math.sqrt(math.pi) / 2 * math.erfc(1.0), rel=1e-15)


def test_ideal_limits():
    p = sel_params(math.inf)
    assert (p.nu, p.mu, p.sigma_b2) == (1.0, 1.0, 0.0) and p.ideal
    assert math.isinf(p.ibo_db)
    far = sel_params_db(60.0)
    assert far.nu == pytest.approx(1.0, abs=1e-15)
    assert far.sigma_b2 < 1e-15
    with pytest.raises(ModelError):
        sel_params(0.0)
    with pytest.raises(ModelError):
        sel_params(-1.0)


def test_parameter_trends_over_backoff():
    ibos = np.logspace(-3, math.log10(30.0), 400)
    ps = [sel_params(x) for x in ibos]
    nu = np.array([p.nu for p in ps])
    mu = np.array([p.mu for p in ps])
    sb = np.array([p.sigma_b2 for p in ps])
    assert np.all(sb >= 0.0)
    assert np.all(np.diff(nu) > 0) and np.all(np.diff(mu) > 0)
    assert np.all(nu <= 1.0) and np.all(mu <= 1.0)
    peak = int(np.argmax(sb))
    assert 0 < peak < len(ibos) - 1
    assert np.all(np.diff(sb[: peak + 1]) > 0) and np.all(np.diff(sb[peak:]) < 0)


def test_db_wrapper():
    assert sel_params_db(3.0) == sel_params(10 ** 0.3)
    assert sel_params_db(3.0).ibo_db == pytest.approx(3.0, rel=1e-14)


def test_kappa_routes_agree():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        p = sel_params_db(rng.uniform(-5.0, 40.0))
        gbar1 = 10 ** rng.uniform(-1.0, 6.0)
        ratio = rng.uniform(0.2, 3.0)
        explicit = relay_gain_and_kappa(p, gbar1, ratio)
        closed = kappa_closed_form(p, ratio * gbar1)
        assert explicit == pytest.approx(closed, rel=1e-12)


def test_kappa_near_one_at_large_backoff():
    p = sel_params_db(30.0)
    assert 1.0 <= kappa_closed_form(p, 10.0) < 1.0 + 1e-12
    assert kappa_closed_form(sel_params(math.inf), 1e6) == 1.0
    assert kappa_closed_form(sel_params_db(3.0), 10.0) > 1.0


def test_sndr_limits():
    g1, g2, mg1 = 7.0, 5.0, 3.0
    assert end_to_end_sndr(g1, g2, mg1, 1.0) == pytest.approx(g1 * g2 / (g2 + mg1 + 1.0), rel=1e-15)
    assert end_to_end_sndr(g1, math.inf, mg1, 2.0) == pytest.approx(g1 / 2.0, rel=1e-15)
    assert end_to_end_sndr(0.0, g2, mg1, 1.3) == 0.0
    arr = end_to_end_sndr(np.array([1.0, 2.0]), np.array([np.inf, 4.0]), 1.0, 1.0)
    assert arr[0] == 1.0 and arr[1] == pytest.approx(8.0 / 6.0, rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1e6), st.floats(0.0, 1e6), st.floats(1e-3, 1e4), st.floats(1.0, 10.0))
def test_sndr_bounds(g1, g2, mg1, kappa):
    s = end_to_end_sndr(g1, g2, mg1, kappa)
    assert 0.0 <= s <= g1 / kappa * (1 + 1e-12)
    assert s <= g1 * g2 / (mg1 + kappa) * (1 + 1e-12) + 1e-300


def test_sel_clip_keeps_phase():
    x = np.array([3 + 4j, 0.3 - 0.4j, 0j])
    y = sel_clip(x, 1.0)
    assert np.allclose(y, [0.6 + 0.8j, 0.3 - 0.4j, 0j])


@pytest.mark.parametrize("ibo_db", [0.0, 3.0, 7.0])
def test_bussgang_simulation_matches_closed_form(ibo_db):
    p = sel_params_db(ibo_db)
    est = bussgang_empirical_check(p.ibo, 1_000_000, np.random.default_rng(12))
    assert abs(est.nu_hat - p.nu) < 4 * est.nu_se
    assert abs(est.sigma_b2_hat - p.sigma_b2) < 4 * est.sigma_b2_se
    assert abs(est.power_hat - p.mu) < 4 * est.power_se


def test_bussgang_check_rejects_small_samples_and_advances_once():
    with pytest.raises(ModelError):
        bussgang_empirical_check(1.0, 10_000, np.random.default_rng(0))
    a, b = np.random.default_rng(3), np.random.default_rng(3)
    bussgang_empirical_check(1.0, 100_000, a)
    b.standard_normal(200_000)
    assert a.random() == b.random()


def test_unit_backoff_reference_numbers():
    p = sel_params(1.0)
    assert p.mu == pytest.approx(0.63212, abs=1e-5)
    assert p.nu == pytest.approx(0.7715, abs=1e-4)
    assert p.sigma_b2 == pytest.approx(0.0369, abs=1e-4)


def test_distortion_power_nonnegative_on_wide_grid():
    assert all(sel_params(x).sigma_b2 >= 0.0 for x in np.logspace(-3, 3, 600))
    assert sel_params(1e-6).sigma_b2 < 1e-5 and sel_params(1e3).sigma_b2 == 0.0


def test_ideal_sndr_unit_inputs():
    assert end_to_end_sndr(1.0, 1.0, 1.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e6), st.floats(1e-3, 1e6), st.floats(1e-3, 1e4), st.floats(1.0001, 10.0))
def test_distortion_lowers_sndr(g1, g2, mg1, kappa):
    assert end_to_end_sndr(g1, g2, mg1, kappa) < end_to_end_sndr(g1, g2, mg1, 1.0)


def test_bussgang_without_clipping():
    est = bussgang_empirical_check(1e6, 200_000, np.random.default_rng(1))
    assert est.nu_hat == pytest.approx(1.0, abs=1e-12)
    assert est.sigma_b2_hat < 1e-20
