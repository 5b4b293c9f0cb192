import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poalab import analysis as A
from poalab import constructions as C
from poalab import mechanisms as M
from poalab import verifier as V
from poalab.errors import CapacityError, ContractError


def _grid_sw_by_sampling(n, draws, seed):
    """Welfare of sampled profiles, computed from coordinates instead of the library's projection tables."""
    rng = np.random.default_rng(seed)
    G = C.grid_cdf(n)
    total = []
    for _ in range(draws):
        best = {}
        for i in range(n):
            ell = rng.integers(n)
            x = G.quantile(rng.random())
            for item in range(n**n):
                coords = [(item // n**k) % n for k in range(n)]
                if coords[i] == ell and x > best.get(item, (0.0, -1))[0]:
                    best[item] = (x, i)
        sw = 0
        for i in range(n):
            cols = {tuple(c for k, c in enumerate([(item // n**k) % n for k in range(n)]) if k != i)
                    for item, (_, owner) in best.items() if owner == i}
            sw += len(cols)
        total.append(sw)
    return np.asarray(total, dtype=float)


def test_grid_welfare_is_constant_per_draw_and_matches_closed_form():
    # every draw of the n=3 profile realizes welfare 19 (the dummy's items add nothing)
    sw = _grid_sw_by_sampling(3, 300, 0)
    assert np.all(sw == 19.0)
    inst = C.construct("grid", n=3)
    assert inst.expected_sw.value == 19.0
    assert inst.optimal_sw.value == 27.0


def test_grid_n4_frozen_welfare():
    # 4^4 - 3^4 = 175, confirmed by sampling in the acceptance suite
    assert C.construct("grid", n=4, store=False).expected_sw.value == 175.0


@pytest.mark.parametrize("n", [2, 3])
def test_grid_optimal_allocation(n):
    inst = C.construct("grid", n=n)
    alloc = C.grid_optimal_allocation(n)
    assert A.welfare_of(inst.game, alloc) == n**n
    if n == 2:
        assert A.optimal_welfare(inst)[0] == 4.0


@pytest.mark.parametrize("n", [2, 3])
def test_grid_utility_is_n_minus_1_to_the_n_minus_1(n):
    inst = C.construct("grid", n=n)
    mc = V.expected_utility(inst.game, inst.profile, 0, method="monte-carlo", samples=40_000, seed=1)
    assert abs(mc.value - (n - 1) ** (n - 1)) < 4 * mc.se + 1e-12
    assert inst.utilities[0].value == (n - 1) ** (n - 1)


def test_grid_poa_tends_to_e_over_e_minus_1():
    assert C.grid_poa(2000) == pytest.approx(math.e / (math.e - 1), abs=1e-3)


curves = st.builds(lambda c, p, theta: (c, p, theta), st.floats(0.5, 2.0), st.floats(0.6, 2.0), st.floats(0.0, 0.9))


def _rule(c, p, theta):
    win = M.power(c, p)
    return M.bid_dependent(win, M.power(theta * c, p))


@settings(max_examples=15, deadline=None)
@given(curves)
def test_general_grid_slice_bidders_are_indifferent(params):
    rule = _rule(*params)
    inst = C.construct("grid-general", n=2, rule=rule, V=1.0)
    T = inst.thresholds[0]
    ev = V.Evaluator(inst.game, inst.profile, 0)
    slice_items = inst.profile[0].slice_items(0)
    # at exactly 0 the favored opponent wins the tie, so indifference holds on (0, T]
    xs = np.linspace(T / 50, T, 9)
    bids = np.zeros((xs.size, inst.game.m))
    bids[:, slice_items] = xs[:, None]
    u, _ = ev.batch(bids)
    assert np.max(np.abs(u - inst.utilities[0].value)) < 1e-9


@settings(max_examples=15, deadline=None)
@given(curves, st.sampled_from([2, 4, 9]))
def test_general_subadditive_profile_is_indifferent(params, m):
    rule = _rule(*params)
    inst = C.construct("subadditive-general", m=m, rule=rule)
    v = inst.params["v"]
    assert inst.extra["zero_threshold"] == pytest.approx((v - 1 / m) / v)
    assert float(inst.cdfs["F_0"](0.0)) == pytest.approx(inst.extra["zero_threshold"], abs=1e-12)
    T = inst.thresholds[0]
    xs = np.linspace(T / 50, T, 7)
    single = np.zeros((xs.size, m))
    single[:, 0] = xs
    u0, _ = V.Evaluator(inst.game, inst.profile, 0).batch(single)
    assert np.max(np.abs(u0 - (v - 1 / m))) < 1e-9
    u1, _ = V.Evaluator(inst.game, inst.profile, 1).batch(np.repeat(xs[:, None], m, axis=1))
    assert np.max(np.abs(u1 - 1.0)) < 1e-9


def test_flat_winner_payment_is_rejected():
    flat = M.joined([0.0, 0.1], [M.Curve("zero"), M.linear(1.0)])
    with pytest.raises(ContractError):
        C.construct("grid-general", n=2, rule=M.bid_dependent(flat, M.Curve("zero")))


def test_subadditive_needs_v_above_one_over_m():
    with pytest.raises(ContractError):
        C.construct("subadditive", m=4, v=0.2)


def test_frozen_discriminatory_and_bayesian_numbers():
    # cross-checked by independent sampling and quadrature when first derived
    d = C.construct("discriminatory-submodular", v=0.643)
    assert d.expected_sw.value == pytest.approx(1.81848, abs=5e-6)
    assert d.poa.value == pytest.approx(1.09982, abs=5e-6)
    b = C.construct("bayesian")
    assert b.expected_sw.value == pytest.approx(0.94155, abs=5e-6)
    assert b.poa.value == pytest.approx(1.06208, abs=5e-6)


def test_discriminatory_welfare_by_sampling():
    d = C.construct("discriminatory-submodular", v=0.643)
    est = A.expected_welfare(d, method="mc", samples=200_000, seed=4)
    assert abs(est.value - d.expected_sw.value) < 4 * est.se


def test_grid_d_thresholds():
    inst = C.construct("grid-d", n=4, d=2, store=False)
    assert inst.extra["bottom_threshold"] > inst.extra["coverage_threshold"]
    with pytest.raises(CapacityError):
        C.construct("grid-d", n=10, d=10)


def test_instance_json_is_deterministic():
    import json
    a = json.dumps(C.construct("subadditive", m=4).to_json(), sort_keys=True)
    b = json.dumps(C.construct("subadditive", m=4).to_json(), sort_keys=True)
    assert a == b
