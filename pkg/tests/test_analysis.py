import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from poalab import analysis as A
from poalab import constructions as C
from poalab import distributions as D
from poalab import mechanisms as M
from poalab import valuations as Vl


def _lambda_mp(theta):
    t = mpmath.mpf(theta) - 1
    if t == 0:
        return mpmath.mpf(1) / 2
    return (t + t * t - mpmath.expm1(t)) / (t * t)


def test_lambda_endpoints():
    assert A.lambda_theta(0.0) == pytest.approx(1 - 1 / math.e, abs=1e-15)
    assert A.lambda_theta(1.0) == 0.5
    assert A.poa_bound(0.0) == pytest.approx(math.e / (math.e - 1), abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0))
def test_lambda_matches_high_precision(theta):
    with mpmath.workdps(40):
        ref = float(_lambda_mp(theta))
    assert A.lambda_theta(theta) == pytest.approx(ref, abs=1e-11)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 0.999), st.floats(1e-6, 1e-3))
def test_lambda_is_decreasing(theta, step):
    assert A.lambda_theta(min(1.0, theta + step)) <= A.lambda_theta(theta) + 1e-15


def test_lambda_is_continuous_across_the_series_switch():
    r = A.LAMBDA_SERIES_RADIUS
    inside = A.lambda_theta(1 - r * (1 - 1e-9))
    outside = A.lambda_theta(1 - r * (1 + 1e-9))
    assert abs(inside - outside) < 1e-12


def test_lemma_is_tight_at_the_worst_case_law():
    cert = A.certify_lemma_submodular_gen(M.first_price(), D.hat_F(1.0), 1.0)
    assert cert.holds
    assert abs(cert.margin) < 1e-6


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 2.0), min_size=1, max_size=5), st.data(),
       st.sampled_from(["first-price", "all-pay"]), st.floats(0.2, 2.0))
def test_lemma_holds_on_random_discrete_laws(points, data, rule, v):
    w = np.asarray(data.draw(st.lists(st.floats(0.05, 1.0), min_size=len(points), max_size=len(points))))
    F = D.discrete(points, w / w.sum())
    r = M.first_price() if rule == "first-price" else M.all_pay()
    assert A.certify_lemma_submodular_gen(r, F, v).margin >= -1e-6


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(1, 5), st.data())
def test_unit_demand_optimum_matches_assignment(n, m, data):
    vals = np.asarray(data.draw(st.lists(st.lists(st.floats(0, 3), min_size=m, max_size=m), min_size=n, max_size=n)))
    game = M.AuctionGame("item", n, m, [Vl.UnitDemand(m, tuple(r)) for r in vals])
    rows, cols = linear_sum_assignment(-vals)
    opt, alloc = A.optimal_welfare(game)
    assert opt == pytest.approx(vals[rows, cols].sum(), abs=1e-9)
    assert A.welfare_of(game, alloc) == pytest.approx(opt, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), st.integers(1, 4), st.data())
def test_xos_optimum_matches_enumeration(n, m, data):
    clauses = [np.asarray(data.draw(st.lists(st.lists(st.floats(0, 2), min_size=m, max_size=m), min_size=1, max_size=3)))
               for _ in range(n)]
    vals = [Vl.Xos(m, tuple(map(tuple, c))) for c in clauses]
    game = M.AuctionGame("item", n, m, vals)
    best = max(sum(vals[i].value([j for j in range(m) if own[j] == i]) for i in range(n))
               for own in itertools.product(range(n), repeat=m))
    assert A.optimal_welfare(game)[0] == pytest.approx(best, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), st.integers(1, 5), st.data())
def test_multi_unit_optimum_matches_enumeration(n, m, data):
    vals = []
    for _ in range(n):
        inc = data.draw(st.lists(st.floats(0, 1), min_size=m, max_size=m))
        vals.append(Vl.MultiUnit(m, tuple(np.concatenate([[0.0], np.cumsum(inc)]))))
    game = M.AuctionGame("multi-unit", n, m, vals)
    best = max(sum(vals[i].value_units(k[i]) for i in range(n))
               for k in itertools.product(range(m + 1), repeat=n) if sum(k) <= m)
    assert A.optimal_welfare(game)[0] == pytest.approx(float(best), abs=1e-9)


def test_binomial_identities():
    e1, e2 = A.binomial_identity_residuals(20)
    assert e1 < 1e-12 and e2 < 1e-12


def test_poa_tags():
    assert A.poa(C.construct("grid", n=3)).tag == A.EXACT_TAG
    sub = A.poa(C.construct("subadditive", m=16))
    assert sub.tag == A.LOWER_BOUND_TAG
    assert sub.ratio == pytest.approx(2 / (1 + 2 / 4 - 1 / 16), abs=1e-12)


def test_sampled_welfare_matches_closed_form():
    inst = C.construct("grid", n=2)
    est = A.expected_welfare(inst, method="mc", samples=20_000, seed=1)
    assert est.value == pytest.approx(inst.expected_sw.value, abs=1e-12)


def test_winning_bid_identity():
    inst = C.construct("discriminatory-subadditive", m=4)
    res = A.multiunit_cdfs(inst.game, inst.profile, 0, units=2, samples=20_000, seed=0)
    assert res.identity_ok
    assert res.mean_av == pytest.approx(res.mean_av_from_cdf, abs=1e-9)
    assert np.all(np.diff(res.F, axis=1) >= 0)
    # beta_1 <= beta_2 <= ... means the CDFs are ordered the other way
    assert np.all(res.F[:-1] >= res.F[1:] - 1e-12)


def test_sweep_is_monotone_for_grid():
    vals = [p for _, p in A.poa_sweep("grid", range(2, 12))]
    assert all(b > a for a, b in zip(vals, vals[1:]))
