import itertools

import numpy as np
import pytest

from poalab import constructions as C
from poalab import mechanisms as M
from poalab import oracle as O
from poalab import verifier as V
from poalab.errors import CapacityError, UnsupportedError
from poalab.valuations import Additive


def _single_item(values, rule=None, tie=None):
    return M.AuctionGame("item", 2, 1, tuple(Additive(1, (v,)) for v in values),
                         rule or M.first_price(), tie or M.TieBreak())


def test_payoff_tensor_matches_direct_evaluation():
    game = _single_item((1.0, 0.6), M.all_pay())
    fg = O.discretize(game, 0.25)
    for a, b in itertools.product(range(fg.sizes[0]), range(fg.sizes[1])):
        out = M.evaluate(game, [fg.strategies[0][a], fg.strategies[1][b]])
        assert np.allclose(fg.payoff[a, b], out.utilities)


def test_seeded_random_ties_average_to_half():
    game = _single_item((1.0, 1.0), tie=M.TieBreak("seeded-random", seed=9))
    fg = O.discretize(game, 0.5)
    k = fg.index_of(0, [0.5])
    assert fg.payoff[k, k, 0] == pytest.approx(0.25)


def test_pure_equilibria_of_first_price_with_lexicographic_ties():
    # values 1 and 0.6 on a 0.1 grid: player 0 wins ties, so it bids 0.6 and player 1 cannot profit
    fg = O.discretize(_single_item((1.0, 0.6)), 0.1)
    ne = O.pure_ne(fg)
    assert any(np.isclose(a[0], 0.6) and np.isclose(b[0], 0.6) for a, b in ne)
    for a, b in ne:
        assert a[0] >= b[0]  # the high-value bidder always wins


def test_anonymity_equilibria_sit_next_to_full_bids():
    inst = C.construct("anonymity", eps=0.01)
    fg = O.discretize(inst.game, 0.05, hi=1.0)
    ne = [(float(a[0]), float(b[0])) for a, b in O.pure_ne(fg)]
    assert (1.0, 1.0) in ne
    # weak equilibria one grid step away are artifacts of the lattice
    assert all(abs(a - 1.0) <= 0.05 + 1e-12 and abs(b - 1.0) <= 0.05 + 1e-12 for a, b in ne)
    k = fg.index_of(0, [1.0])
    assert fg.welfare[k, k] == pytest.approx(0.01)


@pytest.mark.parametrize("name,params", [("grid", {"n": 2}), ("subadditive", {"m": 4, "v": 0.5})])
def test_oracle_agrees_with_verifier_on_discretized_profiles(name, params):
    inst = C.construct(name, **params)
    dp = O.discretize_profile(inst.profile, 7)
    fg, mixed = O.finite_from_profile(inst.game, dp)
    for i in range(inst.game.n):
        u_ver, _ = V.Evaluator(inst.game, dp, i).batch(fg.strategies[i])
        assert np.max(np.abs(u_ver - O.deviation_utilities(fg, mixed, i))) < 1e-12
    support = [np.flatnonzero(w > 0) for w in mixed]
    direct = sum(np.prod([mixed[k][ix[k]] for k in range(len(ix))]) * fg.welfare[ix]
                 for ix in itertools.product(*support))
    assert O.expected_welfare(fg, mixed) == pytest.approx(direct, abs=1e-12)


def test_falsification_finds_nothing_for_first_price():
    rep = O.falsification_search((1.0, 0.6), step=0.02, trials=200, seed=1)
    assert rep.verdict == "NONE-FOUND"
    assert rep.equilibria_checked > 0
    assert rep.lowest_equilibrium_welfare >= rep.optimum - 10 * rep.step


def test_falsification_is_deterministic():
    a = O.falsification_search((0.8, 0.7), step=0.05, trials=50, seed=4).to_json()
    b = O.falsification_search((0.8, 0.7), step=0.05, trials=50, seed=4).to_json()
    assert a == b


def test_falsification_refuses_bayesian_games():
    with pytest.raises(UnsupportedError):
        O.falsification_search((1.0, 0.5), bayesian=True)


def test_capacity_guard():
    game = M.AuctionGame("item", 2, 3, (Additive(3, (1.0,) * 3),) * 2)
    with pytest.raises(CapacityError):
        O.discretize(game, 0.01)
