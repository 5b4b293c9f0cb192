import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poalab import constructions as C
from poalab import distributions as D
from poalab import verifier as V
from poalab.errors import UnsupportedError


@pytest.fixture(scope="module")
def grid2():
    return C.construct("grid", n=2)


@pytest.fixture(scope="module")
def sub4():
    return C.construct("subadditive", m=4)


def _random_bids(rng, rows, m, hi):
    b = rng.random((rows, m)) * hi
    b[rng.random((rows, m)) < 0.3] = 0.0
    return b


def test_closed_form_exact_and_sampling_agree(grid2):
    rng = np.random.default_rng(0)
    bids = _random_bids(rng, 25, grid2.game.m, 0.6)
    cf, _ = V.Evaluator(grid2.game, grid2.profile, 0, method="closed-form").batch(bids)
    ex, _ = V.Evaluator(grid2.game, grid2.profile, 0, method="exact").batch(bids)
    mc, se = V.Evaluator(grid2.game, grid2.profile, 0, method="monte-carlo", samples=200_000, seed=3).batch(bids)
    assert np.max(np.abs(cf - ex)) < 1e-12
    assert np.all(np.abs(mc - cf) <= 4.5 * se + 1e-12)


def test_exact_vectorized_and_loop_paths_agree(sub4, monkeypatch):
    rng = np.random.default_rng(1)
    bids = _random_bids(rng, 40, 4, 0.3)
    fast, _ = V.Evaluator(sub4.game, sub4.profile, 0, method="exact").batch(bids)
    monkeypatch.setattr(V, "VECTOR_PIECES", 0)
    slow, _ = V.Evaluator(sub4.game, sub4.profile, 0, method="exact").batch(bids)
    assert np.max(np.abs(fast - slow)) < 1e-12


def test_exact_multi_unit_against_sampling():
    inst = C.construct("discriminatory-submodular")
    bids = np.array([[0.3, 0.1], [0.45, 0.45], [0.2, 0.0], [0.5, 0.25]])
    ex, _ = V.Evaluator(inst.game, inst.profile, 0, method="exact").batch(bids)
    mc, se = V.Evaluator(inst.game, inst.profile, 0, method="monte-carlo", samples=300_000, seed=2).batch(bids)
    assert np.all(np.abs(mc - ex) <= 4.5 * se + 1e-12)


def test_as_profile_matches_predicted_utilities(sub4):
    for i in range(2):
        est = V.expected_utility(sub4.game, sub4.profile, i)
        assert est.value == pytest.approx(sub4.utilities[i].value, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 40), st.integers(2, 4))
def test_refining_the_deviation_grid_never_lowers_regret(points, factor):
    inst = C.construct("subadditive", m=4)
    ev = V.Evaluator(inst.game, inst.profile, 0)
    eq = ev.as_profile()
    coarse = V.best_response_regret(inst.game, inst.profile, 0, V.UniformAllItems(tuple(np.linspace(0, 0.5, points))),
                                    evaluator=ev, equilibrium=eq)
    fine_grid = np.linspace(0, 0.5, (points - 1) * factor + 1)
    fine = V.best_response_regret(inst.game, inst.profile, 0, V.UniformAllItems(tuple(fine_grid)),
                                  evaluator=ev, equilibrium=eq)
    assert coarse.regret >= 0.0
    assert fine.regret >= coarse.regret - 1e-15


@pytest.mark.parametrize("name,params", [("grid", {"n": 2}), ("subadditive", {"m": 4}),
                                         ("grid-general", {"n": 2, "rule": "all-pay"}),
                                         ("discriminatory-submodular", {})])
def test_constructions_certify(name, params):
    rep = V.verify_instance(C.construct(name, **params), eps=2e-3, seed=0)
    assert rep.verdict == "PASS", rep.summary()


def test_profitable_deviation_is_detected():
    # the unit-demand bidder in the subadditive instance, if the bonus bidder stops bidding, grabs an item for free
    inst = C.construct("subadditive", m=4)
    lazy = inst.profile.replace(1, D.Atom((0.0,) * 4))
    res = V.best_response_regret(inst.game, lazy, 0, V.SingleItemBid(tuple(np.linspace(0, 0.25, 11))))
    assert res.regret > 0.1


def test_grid_d_default_scale_fails_and_bottom_threshold_passes():
    bad = C.construct("grid-d", n=4, d=2)
    rep = V.verify_instance(bad, eps=2e-3, seed=0)
    assert rep.verdict == "FAIL"
    assert max(p.regret for p in rep.players) == pytest.approx(0.1875, abs=1e-6)
    good = C.construct("grid-d", n=4, d=2, v=bad.extra["bottom_threshold"])
    assert V.verify_instance(good, eps=2e-3, seed=0).verdict == "PASS"


def test_bayesian_profile_meets_its_conditions_but_not_full_range():
    inst = C.construct("bayesian")
    rep = V.verify_bayesian(inst.game, inst.profile, 2e-3, seed=0)
    assert rep.checks["support_constant"]["ok"]
    assert rep.checks["best_response_bids"]["ok"]
    # bidding just above 0 wins against the other bidder's mass of 1/2 there
    assert rep.checks["full_range_regret"]["regret"] == pytest.approx(0.5 - 1 / math.e, abs=1e-6)
    assert rep.verdict == "FAIL"


def test_bayesian_profile_rejected_by_the_product_verifier():
    inst = C.construct("bayesian")
    with pytest.raises(UnsupportedError):
        V.verify_equilibrium(inst.game, inst.profile, {0: [V.UniformAllItems((0.0, 0.5))]}, 2e-3)


def test_report_json_is_reproducible(grid2):
    a = V.verify_instance(grid2, seed=5).to_json()
    b = V.verify_instance(grid2, seed=5).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
