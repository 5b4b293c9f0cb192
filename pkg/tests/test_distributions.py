import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from poalab import constructions as C
from poalab import distributions as D
from poalab import mechanisms as M
from poalab.errors import ContractError


def test_simpson_matches_scipy_quad():
    for f, a, b in ((math.sin, 0.0, 3.0), (lambda x: 1 / (1 + x * x), -2.0, 5.0), (lambda x: math.exp(-x) * x**3, 0, 4)):
        assert D.adaptive_simpson(f, a, b) == pytest.approx(integrate.quad(f, a, b)[0], abs=1e-11)


def test_golden_max_on_parabola():
    x, fx = D.golden_max(lambda t: -(t - 0.3) ** 2 + 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert fx == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5, 10])
def test_grid_cdf_matches_written_formula(n):
    G = C.grid_cdf(n)
    xs = np.linspace(0, G.support_hi, 501)
    ref = (n - 1) * ((1 - xs) ** (-1 / (n - 1)) - 1)
    assert np.max(np.abs(G(xs) - ref)) < 1e-12
    assert G(G.support_hi) == pytest.approx(1.0, abs=1e-12)


def test_hat_F_is_the_indifference_law():
    v = 1.7
    F = D.hat_F(v)
    xs = np.linspace(0, F.support_hi, 200)
    # against hat_F every bid in the support earns v/e
    assert np.max(np.abs(F(xs) * (v - xs) - v / math.e)) < 1e-12
    assert F.atoms[0] == (0.0, pytest.approx(1 / math.e))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 3, allow_nan=False), min_size=1, max_size=6), st.data())
def test_discrete_quantile_inverts_cdf(points, data):
    w = np.asarray(data.draw(st.lists(st.floats(0.01, 1), min_size=len(points), max_size=len(points))))
    F = D.discrete(points, w / w.sum())
    rho = np.asarray(data.draw(st.lists(st.floats(1e-6, 1 - 1e-6), min_size=1, max_size=20)))
    q = F.quantile(rho)
    # generalized inverse: F(q) >= rho and F(q-) <= rho
    assert np.all(F(q) >= rho - 1e-12)
    assert np.all(F.left_limit(q) <= rho + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30))
def test_grid_quantile_roundtrip(n):
    G = C.grid_cdf(n)
    rho = np.linspace(0.01, 0.99, 50)
    assert np.max(np.abs(G(G.quantile(rho)) - rho)) < 1e-9


def test_expectation_matches_sample_mean():
    G = C.grid_cdf(3)
    xs = G.sample(np.random.default_rng(3), 200_000)
    assert abs(xs.mean() - G.expectation()) < 5 * xs.std() / math.sqrt(xs.size)


def test_expectation_matches_integral_of_survival():
    G = C.grid_cdf(4)
    surv = integrate.quad(lambda x: 1 - float(G(x)), 0, G.support_hi, limit=200)[0]
    assert G.expectation() == pytest.approx(surv, abs=1e-10)


def test_argmax_bid_first_price_against_uniform():
    # F(a)(v - a) with F uniform on [0,1] peaks at v/2
    a, val = D.argmax_bid(D.uniform(0, 1), 0.8)
    # a quadratic peak pins the location only to about sqrt(machine eps)
    assert a == pytest.approx(0.4, abs=1e-7)
    assert val == pytest.approx(0.16, abs=1e-12)


def test_argmax_bid_all_pay_against_uniform():
    # F(a) v - a with F uniform on [0, 2], v = 1: linear with slope -1/2, best is 0
    a, val = D.argmax_bid(D.uniform(0, 2), 1.0, rule=M.all_pay())
    assert a == 0.0 and val == pytest.approx(0.0)


def test_invalid_cdfs_are_rejected():
    with pytest.raises(ContractError):
        D.discrete([0, 1], [0.3, 0.3])
    with pytest.raises(ContractError):
        D.piecewise_linear([0, 1, 2], [0.0, 0.8], [0.9, 0.7])
