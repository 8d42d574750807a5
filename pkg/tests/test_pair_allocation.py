import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nomarate.geometry import fixture_link
from nomarate.pair_allocation import (
    EQUAL_RATE,
    MAX_SUM_RATE,
    InfeasibleAllocationError,
    allocate,
    allocate_phi,
    equal_rate_beta,
    equal_rate_gamma,
    equal_rate_mu_threshold,
    fairness_kappa,
    feasibility_equal_rate,
    gamma_tilde_approx,
    gamma_tilde_rational,
    maximize_gamma_tilde,
    noma_beats_oma_equal_rate,
    noma_beats_oma_sum_rate,
    oma_rates,
    order_pair,
    pair_gammas,
    sum_rate_beta_star,
    sum_rate_gamma_bar,
    sum_rate_gamma_tilde,
    sum_rate_mu_threshold,
    sum_rate_oma_mu_threshold,
    xi_relative_error,
)

phis = st.floats(1e-3, 50.0)


def ordered(a, b):
    return min(a, b), max(a, b)


def test_order_pair():
    p = order_pair(0.6, 0.4)
    assert (p.phi1, p.phi2, p.labels, p.tie) == (0.4, 0.6, ("B", "A"), False)
    t = order_pair(0.5, 0.5)
    assert t.tie and t.labels == ("A", "B")


# bisection on SIR1 = SIR2 in 40-digit arithmetic (notes/oracles.py)
@pytest.mark.parametrize(
    "phi1,phi2,mu,beta,gamma",
    [
        (0.4, 0.6, 0.0, 0.63242647169120954, 0.22054411698527427),
        (0.4, 0.6, 0.1, 0.62448351869308686, 0.21717264455019263),
        (0.2, 0.9, 1.0, 0.73972602739726027, 0.14062500000000001),
        (0.05, 3.0, 0.5, 0.96097319745274365, 0.047955083194488757),
    ],
)
def test_equal_rate_against_oracle(phi1, phi2, mu, beta, gamma):
    assert equal_rate_beta(phi1, phi2, mu) == pytest.approx(beta, rel=1e-13)
    assert equal_rate_gamma(phi1, phi2, mu) == pytest.approx(gamma, rel=1e-13)
    g1, g2 = pair_gammas(phi1, phi2, mu, beta)
    assert g1 == pytest.approx(g2, rel=1e-13)


def test_equal_rate_symmetric_pair():
    assert equal_rate_beta(0.7, 0.7, 1.0) == pytest.approx(0.5, rel=1e-15)
    assert equal_rate_gamma(0.7, 0.7, 1.0) == pytest.approx(0.7 / 2.7, rel=1e-15)
    assert equal_rate_beta(1e-9, 1e-9, 0.0) == pytest.approx(0.5, abs=1e-8)


def test_wrong_order_is_infeasible():
    assert not feasibility_equal_rate(0.6, 0.4, 1.0)
    with pytest.raises(InfeasibleAllocationError):
        equal_rate_beta(0.6, 0.4, 1.0)
    assert feasibility_equal_rate(0.4, 0.6, 0.1)
    assert feasibility_equal_rate(0.3, 0.3, 0.7)


@settings(max_examples=300)
@given(a=phis, b=phis, mu=st.floats(0, 1))
def test_equal_rate_properties(a, b, mu):
    p1, p2 = ordered(a, b)
    beta = equal_rate_beta(p1, p2, mu)
    assert 0.5 <= beta <= 1.0
    g = equal_rate_gamma(p1, p2, mu)
    assert g < p1
    g1, g2 = pair_gammas(p1, p2, mu, beta)
    assert g1 == pytest.approx(g2, rel=1e-9)
    assert g1 == pytest.approx(g, rel=1e-9)
    if feasibility_equal_rate(p2, p1, mu):
        assert equal_rate_gamma(p2, p1, mu) <= g * (1 + 1e-12)


def test_swapped_order_never_better():
    rng = np.random.default_rng(0)
    for a, b in rng.uniform(0.01, 5, size=(1000, 2)):
        p1, p2 = ordered(a, b)
        for mu in (0.0, 0.3, 1.0):
            if feasibility_equal_rate(p2, p1, mu):
                assert equal_rate_gamma(p2, p1, mu) <= equal_rate_gamma(p1, p2, mu) * (1 + 1e-12)


# bisection on (1 + gamma)^2 = 1 + phi1 in mu (notes/oracles.py)
@pytest.mark.parametrize(
    "phi1,phi2,mu",
    [(0.4, 0.6, 1.5376285456070968), (0.1, 0.6, 16.278854910379935), (0.3, 2.0, 5.3183310547032497)],
)
def test_equal_rate_oma_crossing(phi1, phi2, mu):
    assert equal_rate_mu_threshold(phi1, phi2) == pytest.approx(mu, rel=1e-12)


def test_equal_rate_gate_cases():
    assert all(noma_beats_oma_equal_rate(0.4, 0.6, mu) for mu in np.linspace(0, 1, 11))
    assert equal_rate_mu_threshold(0.5, 0.5) == 0.0
    assert not noma_beats_oma_equal_rate(0.5, 0.5, 0.01)


def test_equal_rate_gate_equals_direct_comparison():
    rng = np.random.default_rng(1)
    for a, b, mu in zip(rng.uniform(0.01, 3, 5000), rng.uniform(0.01, 3, 5000), rng.uniform(0, 1, 5000)):
        p1, p2 = ordered(a, b)
        direct = math.log2(1 + equal_rate_gamma(p1, p2, mu)) > 0.5 * math.log2(1 + p1)
        thr = equal_rate_mu_threshold(p1, p2)
        if abs(mu - thr) > 1e-9:
            assert noma_beats_oma_equal_rate(p1, p2, mu) == direct


def test_gamma_tilde_cases():
    p1, p2 = 0.3, 0.8
    assert sum_rate_gamma_tilde(p1, p2, 0.0, 0.5) == pytest.approx((1 + p1) * (2 + p2) / (2 + p1), rel=1e-15)
    assert sum_rate_gamma_tilde(p1, p2, 0.4, 1.0) == pytest.approx(1 + p1, rel=1e-15)
    # 40-digit substitution oracle
    assert sum_rate_gamma_tilde(0.1, 0.2, 0.3, 0.7) == pytest.approx(1.1294560497922218, rel=1e-14)


@given(a=phis, b=phis, mu=st.floats(0, 1), beta=st.floats(0.5, 1))
def test_gamma_tilde_rational_form(a, b, mu, beta):
    assert gamma_tilde_rational(a, b, mu, beta) == pytest.approx(sum_rate_gamma_tilde(a, b, mu, beta), rel=1e-12)


@pytest.mark.parametrize("phi1,phi2,expected", [(0.1, 0.6, 13.03030303030303), (0.5, 0.6, -1.1111111111111112)])
def test_sum_rate_beta_threshold(phi1, phi2, expected):
    assert sum_rate_mu_threshold(phi1, phi2) == pytest.approx(expected, rel=1e-12)


def test_sum_rate_beta_star_choices():
    assert all(sum_rate_beta_star(0.1, 0.6, mu) == 0.5 for mu in (0.0, 0.5, 1.0))
    assert sum_rate_beta_star(0.5, 0.6, 0.3) == 1.0
    assert sum_rate_beta_star(0.5, 0.6, 0.0) == 0.5
    assert sum_rate_beta_star(0.6, 0.5, 0.0) == 1.0


def test_gamma_bar():
    assert sum_rate_gamma_bar(0.4, 0.6, 0.0, 0.5) == pytest.approx(0.4 / 2.4 + 0.3, rel=1e-15)
    assert sum_rate_gamma_bar(0.4, 0.6, 0.3, 1.0) == 0.4
    g1, g2 = pair_gammas(0.4, 0.6, 0.3, 0.5)
    assert sum_rate_gamma_bar(0.4, 0.6, 0.3, 0.5) == pytest.approx(g1 + g2, rel=1e-14)
    with pytest.raises(ValueError):
        sum_rate_gamma_bar(0.4, 0.6, 0.3, 0.7)


def test_am_bound_and_xi():
    assert gamma_tilde_approx(0.3, 0.3) == pytest.approx(1.3**2)
    assert gamma_tilde_approx(1.0, 0.0) == 2.25
    assert xi_relative_error(1.0, 0.0) == pytest.approx(12.5)
    assert xi_relative_error(0.4, 0.4) == 0.0
    assert xi_relative_error(1e-4, 2e-4) < 1e-6


@given(g1=st.floats(0, 100), g2=st.floats(0, 100))
def test_xi_matches_definition(g1, g2):
    exact = (1 + g1) * (1 + g2)
    assert xi_relative_error(g1, g2) == pytest.approx(100 * (gamma_tilde_approx(g1, g2) - exact) / exact, abs=1e-9, rel=1e-9)


def test_xi_grows_with_gap():
    gaps = [xi_relative_error(1e-2 * 10**k, 1e-2) for k in range(4)]
    assert gaps == sorted(gaps)


# 40-digit root of (1 + gbar/2)^2 = 1 + (phi1 + phi2)/2 in mu (notes/oracles.py)
@pytest.mark.parametrize(
    "phi1,phi2,mu",
    [(0.1, 0.2, 0.29420727727255152), (0.1, 0.6, 0.2876121839590831), (0.3, 0.9, 0.28161274201021545)],
)
def test_sum_rate_oma_threshold_oracle(phi1, phi2, mu):
    assert sum_rate_oma_mu_threshold(phi1, phi2) == pytest.approx(mu, rel=1e-12)


def test_sum_rate_gate_mostly_matches_direct():
    # log-uniform thresholds over the range reached at eps <= 0.1; the gate
    # rests on the arithmetic-mean bound, evaluated at beta = 1/2
    rng = np.random.default_rng(2)
    agree = total = 0
    for a, b in np.exp(rng.uniform(np.log(1e-3), 0.0, size=(4000, 2))):
        p1, p2 = ordered(a, b)
        thr = sum_rate_oma_mu_threshold(p1, p2)
        if thr <= 0:
            continue
        mu = rng.uniform(0, thr)
        direct = math.log2(sum_rate_gamma_tilde(p1, p2, mu, 0.5)) >= 0.5 * math.log2((1 + p1) * (1 + p2))
        agree += direct == noma_beats_oma_sum_rate(p1, p2, mu)
        total += 1
    assert agree >= 0.99 * total
    assert noma_beats_oma_sum_rate(3.0, 4.0, 0.0)


def test_fairness_cases():
    assert fairness_kappa(0.1, 0.6, 0.0, "oma") == pytest.approx(1 / 6)
    assert fairness_kappa(0.1, 0.6, 0.0, "noma") == pytest.approx(1 / 6 * 2 / 2.1, rel=1e-15)
    assert fairness_kappa(0.2, 0.8, 0.25, "noma") == pytest.approx(fairness_kappa(0.2, 0.8, 0.25, "oma"), rel=1e-15)
    with pytest.raises(ValueError):
        fairness_kappa(0.5, 0.6, 0.5, "noma")
    assert fairness_kappa(0.5, 0.6, 0.5, "noma", require_optimal=False) > 0
    ks = [fairness_kappa(0.1, 0.6, mu, "noma") for mu in np.linspace(0, 1, 21)]
    assert np.all(np.diff(ks) > 0)


def test_oma_rates():
    r1, r2 = oma_rates(0.4, 0.6, EQUAL_RATE)
    assert r1 == r2 == pytest.approx(0.5 * math.log2(1.4), rel=1e-15)
    s1, s2 = oma_rates(0.4, 0.6, MAX_SUM_RATE)
    assert s1 + s2 == pytest.approx(0.5 * math.log2(1.4 * 1.6), rel=1e-15)
    assert oma_rates(0.3, 0.3, EQUAL_RATE) == oma_rates(0.3, 0.3, MAX_SUM_RATE)


def test_allocate_phi_equal_rate_example():
    res = allocate_phi(0.6, 0.4, mu=0.0)
    assert res.order == ("B", "A")
    assert res.beta == pytest.approx(0.63242647169120954, rel=1e-13)
    assert res.rate1 == pytest.approx(math.log2(1.22054411698527427), rel=1e-13)
    assert res.rate2 == pytest.approx(res.rate1, rel=1e-12)
    assert res.gate_noma_better and res.direct_noma_better
    assert res.p1 + res.p2 == pytest.approx(1.0)


def test_allocate_phi_sum_rate_extremes():
    res = allocate_phi(0.5, 0.5, mu=1.0, objective=MAX_SUM_RATE)
    assert res.beta == 1.0 and res.p2 == 0.0 and res.gamma2 == 0.0
    res0 = allocate_phi(0.2, 0.9, mu=0.0, objective=MAX_SUM_RATE)
    assert res0.beta == 0.5
    assert res0.sum_rate >= res0.oma_sum_rate


def test_allocate_links_and_dual_path():
    a, b = fixture_link("high", 30, 1e-2), fixture_link("low", 30, 1e-2)
    res = allocate(a, b, mu=0.1)
    assert res.rate1 == pytest.approx(res.rate2, rel=1e-9)
    assert math.log2(1 + equal_rate_gamma(res.phi1, res.phi2, 0.1)) == pytest.approx(res.rate1, rel=1e-12)
    exact = allocate(a, b, mu=0.1, phi_method="exact")
    assert exact.phi1 > res.phi1
    with pytest.raises(ValueError):
        allocate_phi(0.3, 0.4, objective="fastest")


def test_maximize_gamma_tilde_against_dense_grid():
    rng = np.random.default_rng(3)
    beta = np.linspace(0.5, 1.0, 100_001)
    for a, b, mu in zip(rng.lognormal(0, 2, 300), rng.lognormal(0, 2, 300), rng.uniform(0, 1, 300)):
        p1, p2 = ordered(a, b)
        best_beta, best = maximize_gamma_tilde(p1, p2, mu)
        grid_best = np.max(gamma_tilde_rational(p1, p2, mu, beta))
        assert best >= grid_best * (1 - 1e-9)
        assert 0.5 <= best_beta <= 1.0


# 40-digit dense search plus stationary-point refinement (notes/oracles.py)
@pytest.mark.parametrize(
    "p1,p2,mu,value",
    [(0.3, 5.0, 0.1, 3.3913043478260869), (2.0, 40.0, 0.05, 16.5), (1.0, 1.5, 0.5, 2.0606060606060606)],
)
def test_maximize_gamma_tilde_oracle(p1, p2, mu, value):
    assert maximize_gamma_tilde(p1, p2, mu)[1] == pytest.approx(value, rel=1e-12)
