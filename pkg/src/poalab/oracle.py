"""Brute-force cross-checks on finite (discretized) games.

A :class:`FiniteGame` stores the full payoff tensor of a game restricted
to finitely many bid vectors per player. Expected utilities of mixed
profiles are plain tensor contractions, which makes them an independent
check on the verifier's piecewise enumeration and closed forms.

Seeded-random tie breaking is replaced by its expectation: payoffs are
averaged over all ``n!`` priority orders of the players. On a single item
this is the uniform choice among tied bidders.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from poalab import distributions as D
from poalab import kernels
from poalab import mechanisms as M
from poalab.errors import CapacityError, ContractError, UnsupportedError
from poalab.rng import resolve_seed, stream
from poalab.valuations import Additive

MAX_PROFILES = 10**7
CHUNK = 100_000
SIMPLEX_TOL = 1e-12
BR_CAP = 10**4


@dataclass
class FiniteGame:
    game: M.AuctionGame
    strategies: tuple
    payoff: np.ndarray
    welfare: np.ndarray
    step: float | None = None

    @property
    def sizes(self) -> tuple:
        return tuple(s.shape[0] for s in self.strategies)

    def index_of(self, player: int, bid) -> int:
        hits = np.flatnonzero(np.all(np.isclose(self.strategies[player], np.asarray(bid, dtype=float),
                                                rtol=0.0, atol=1e-12), axis=1))
        if hits.size == 0:
            raise ContractError(f"bid {bid} is not a strategy of player {player}")
        return int(hits[0])


def _permuted_games(game: M.AuctionGame):
    """``(game, order)`` pairs whose lexicographic ties realize every priority order."""
    if game.tie.policy != "seeded-random":
        return [(game, np.arange(game.n))]
    if any(game.rule_of(i).kind == "rank-based" for i in range(game.n)):
        raise UnsupportedError("tie averaging with rank-based payments is not supported")
    out = []
    for perm in itertools.permutations(range(game.n)):
        order = np.asarray(perm)
        rules = None if game.player_rules is None else tuple(game.player_rules[k] for k in order)
        g = dataclasses.replace(game, valuations=tuple(game.valuations[k] for k in order),
                                tie=M.TieBreak("lexicographic"), player_rules=rules)
        out.append((g, order))
    return out


def build_finite_game(game: M.AuctionGame, strategies, step: float | None = None,
                      cap: int = MAX_PROFILES) -> FiniteGame:
    """Payoff and welfare tensors over the product of per-player bid lists."""
    strategies = tuple(np.atleast_2d(np.asarray(s, dtype=float)) for s in strategies)
    if len(strategies) != game.n:
        raise ContractError("need one strategy list per player")
    for s in strategies:
        if s.shape[1] != game.m or s.shape[0] == 0:
            raise ContractError("strategy lists need at least one vector with one bid per item")
    sizes = tuple(s.shape[0] for s in strategies)
    total = math.prod(sizes)
    if total > cap:
        raise CapacityError(f"{total} strategy profiles exceed the cap of {cap}")
    variants = _permuted_games(game)
    payoff = np.zeros((total, game.n))
    welfare = np.zeros(total)
    for start in range(0, total, CHUNK):
        flat = np.arange(start, min(total, start + CHUNK))
        idx = np.unravel_index(flat, sizes)
        bids = np.stack([strategies[k][idx[k]] for k in range(game.n)], axis=1)
        for g, order in variants:
            res = M.evaluate_batch(g, bids[:, order, :], validate=True)
            u = np.empty_like(res.utilities)
            u[:, order] = res.utilities
            payoff[flat] += u
            welfare[flat] += res.welfare
    payoff /= len(variants)
    welfare /= len(variants)
    return FiniteGame(game, strategies, payoff.reshape(sizes + (game.n,)), welfare.reshape(sizes), step)


def _grid(step: float, hi: float, extra) -> np.ndarray:
    if not step > 0:
        raise ContractError("grid step must be positive")
    k = int(math.floor(hi / step + 1e-9))
    pts = np.round(np.arange(k + 1) * step, 12)
    ex = np.asarray([e for e in extra if 0.0 <= e <= hi], dtype=float)
    return np.unique(np.concatenate([pts, ex, [0.0]]))


def discretize(game: M.AuctionGame, step: float, caps: int = MAX_PROFILES, hi: float | None = None,
               extra=()) -> FiniteGame:
    """All bid vectors on the lattice ``{0, step, ...} ∪ extra`` up to ``hi``, per item.

    ``extra`` should carry support endpoints and thresholds. Multi-unit
    strategy sets keep only non-increasing vectors.
    """
    if hi is None:
        hi = max(float(v.value(np.arange(game.m))) for v in game.valuations)
        hi = hi if hi > 0 else 1.0
    pts = _grid(step, hi, extra)
    per_player = pts.size**game.m
    if per_player**game.n > caps:
        raise CapacityError(f"{per_player}**{game.n} strategy profiles exceed the cap of {caps}")
    vecs = np.array(list(itertools.product(pts, repeat=game.m)), dtype=float)
    if game.format == "multi-unit":
        vecs = vecs[np.all(np.diff(vecs, axis=1) <= 0, axis=1)]
    return build_finite_game(game, [vecs] * game.n, step, caps)


def _check_simplex(w, size: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (size,) or np.any(w < -SIMPLEX_TOL) or abs(w.sum() - 1.0) > SIMPLEX_TOL:
        raise ContractError("mixed strategies must be probability vectors over the strategy list")
    return w


def _contract(tensor: np.ndarray, weights) -> np.ndarray:
    out = tensor
    for w in weights:
        out = np.tensordot(w, out, axes=(0, 0))
    return out


def exact_expected_utility(fg: FiniteGame, mixed) -> np.ndarray:
    """Per-player expected utilities of a product mixed profile."""
    if len(mixed) != fg.game.n:
        raise ContractError("need one mixed strategy per player")
    ws = [_check_simplex(w, s) for w, s in zip(mixed, fg.sizes)]
    return np.asarray(_contract(fg.payoff, ws), dtype=float)


def expected_welfare(fg: FiniteGame, mixed) -> float:
    ws = [_check_simplex(w, s) for w, s in zip(mixed, fg.sizes)]
    return float(_contract(fg.welfare, ws))


def deviation_utilities(fg: FiniteGame, mixed, player: int) -> np.ndarray:
    """Utility of each pure strategy of ``player`` against the others' mixtures."""
    ws = [_check_simplex(w, s) for w, s in zip(mixed, fg.sizes)]
    t = np.moveaxis(fg.payoff[..., player], player, 0)
    for k in range(fg.game.n):
        if k != player:
            t = np.tensordot(t, ws[k], axes=(1, 0))
    return np.asarray(t, dtype=float)


def regrets(fg: FiniteGame, mixed) -> np.ndarray:
    eq = exact_expected_utility(fg, mixed)
    return np.array([max(0.0, float(deviation_utilities(fg, mixed, i).max() - eq[i])) for i in range(fg.game.n)])


def pure_ne(fg: FiniteGame, eps: float = 0.0) -> list:
    """All pure profiles (as tuples of bid vectors) where no unilateral move gains more than ``eps``."""
    ok = np.ones(fg.sizes, dtype=bool)
    for i in range(fg.game.n):
        u = fg.payoff[..., i]
        ok &= u >= u.max(axis=i, keepdims=True) - eps
    return [tuple(fg.strategies[k][ix[k]] for k in range(fg.game.n)) for ix in zip(*np.nonzero(ok))]


# ---------------------------------------------------------------------------
# Finite versions of structured profiles
# ---------------------------------------------------------------------------


def discretize_profile(profile: D.MixedProfile, points: int) -> D.MixedProfile:
    """Replace every CDF in the profile by its ``points``-atom mid-level discretization."""
    cache: dict = {}

    def disc(F):
        if id(F) not in cache:
            cache[id(F)] = D.discretize_cdf(F, points)
        return cache[id(F)]

    out = []
    for s in profile.strategies:
        if isinstance(s, D.Atom):
            out.append(s)
        elif isinstance(s, D.SliceUniform):
            cdf = disc(s.cdf) if isinstance(s.cdf, D.Cdf) else tuple(disc(F) for F in s.per_item)
            out.append(D.SliceUniform(s.shape, s.direction, cdf, s.base))
        elif isinstance(s, D.CorrelatedInverse):
            cdf = disc(s.cdf) if isinstance(s.cdf, D.Cdf) else tuple(disc(F) for F in s.per_item)
            out.append(D.CorrelatedInverse(cdf, s.m_items, s.threshold))
        elif isinstance(s, D.IndependentPerItem):
            cdf = disc(s.cdf) if isinstance(s.cdf, D.Cdf) else tuple(disc(F) for F in s.cdf)
            out.append(D.IndependentPerItem(cdf, s.m_items))
        elif isinstance(s, D.MultiUnitFlat):
            out.append(D.MultiUnitFlat(s.k, disc(s.cdf), s.m_units))
        else:
            raise UnsupportedError(f"cannot discretize {type(s).__name__}")
    return D.MixedProfile(tuple(out))


def support_of(strategy: D.Strategy):
    """Distinct bid vectors and probabilities of a strategy whose CDFs are all discrete."""
    vecs, wts = [], []
    for sc in strategy.scenarios():
        lv = {0.0, 1.0, float(sc.threshold)}
        for F in dict.fromkeys(sc.cdfs):
            if any(p.kind != "const" and p.hi > p.lo for p in F.pieces):
                raise ContractError("support enumeration needs purely discrete CDFs")
            lv.update(float(F(p)) for p, _ in F.atoms)
        lv = np.unique(np.clip(np.fromiter(lv, float), 0.0, 1.0))
        lens = np.diff(lv)
        keep = lens > 0
        mids = 0.5 * (lv[:-1] + lv[1:])[keep]
        vecs.append(sc.bids_at(mids))
        wts.append(sc.weight * lens[keep])
    vecs = np.vstack(vecs)
    wts = np.concatenate(wts)
    uniq, inv = np.unique(vecs, axis=0, return_inverse=True)
    w = np.zeros(uniq.shape[0])
    np.add.at(w, inv.ravel(), wts)
    return uniq, w


def finite_from_profile(game: M.AuctionGame, profile: D.MixedProfile, deviations: dict | None = None,
                        cap: int = MAX_PROFILES):
    """Finite game on the profile's support (plus ``deviations[player]`` bids) and the matching mixtures."""
    deviations = deviations or {}
    strategies, mixed = [], []
    for k, s in enumerate(profile.strategies):
        vecs, w = support_of(s)
        extra = np.atleast_2d(np.asarray(deviations.get(k, np.zeros((0, game.m))), dtype=float)).reshape(-1, game.m)
        strategies.append(np.vstack([vecs, extra]))
        mixed.append(np.concatenate([w, np.zeros(extra.shape[0])]))
    return build_finite_game(game, strategies, cap=cap), mixed


# ---------------------------------------------------------------------------
# Falsification search: single-item mixed equilibria with welfare loss
# ---------------------------------------------------------------------------


@dataclass
class FalsificationReport:
    verdict: str
    values: tuple
    step: float
    trials: int
    equilibria_checked: int
    lowest_equilibrium_welfare: float | None
    optimum: float
    counterexample: dict | None = None
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def falsification_search(values, step: float = 0.01, trials: int = 1000, seed=None, rule=None,
                         fp_iters: int = 300, bayesian: bool = False) -> FalsificationReport:
    """Look for an ``eps``-equilibrium (``eps = step``) whose welfare is below ``OPT - 10 step``.

    Each trial starts pure best-response dynamics and fictitious play from a
    random profile and also tests one random sparse mixed profile. Finding
    nothing is evidence only: the search covers a discretized game.
    """
    if bayesian:
        raise UnsupportedError("the falsification search covers full-information games only")
    vals = tuple(float(v) for v in values)
    if len(vals) != 2 or min(vals) < 0 or max(vals) <= 0:
        raise ContractError("need two non-negative values, not both zero")
    seed = resolve_seed(seed)
    rule = M.first_price() if rule is None else rule
    game = M.AuctionGame("item", 2, 1, (Additive(1, (vals[0],)), Additive(1, (vals[1],))), rule,
                         M.TieBreak("seeded-random"))
    fg = discretize(game, step, hi=max(vals), extra=vals)
    A = np.ascontiguousarray(fg.payoff[..., 0])
    B = np.ascontiguousarray(fg.payoff[..., 1])
    W = fg.welfare
    opt = max(vals)
    S1, S2 = A.shape
    eps = step
    threshold = opt - 10.0 * step
    checked = 0
    lowest = None

    def test(x, y, how):
        nonlocal checked, lowest
        ux, uy = A @ y, x @ B
        r0 = float(ux.max() - x @ ux)
        r1 = float(uy.max() - uy @ y)
        if r0 > eps or r1 > eps:
            return None
        checked += 1
        sw = float(x @ W @ y)
        lowest = sw if lowest is None else min(lowest, sw)
        if sw < threshold:
            sx, sy = np.flatnonzero(x > 0), np.flatnonzero(y > 0)
            return {"how": how, "welfare": sw, "regrets": [r0, r1],
                    "support_0": fg.strategies[0][sx, 0].tolist(), "weights_0": x[sx].tolist(),
                    "support_1": fg.strategies[1][sy, 0].tolist(), "weights_1": y[sy].tolist()}
        return None

    found = None
    for t in range(trials):
        rs = stream(seed, "falsify", t)
        i0, j0 = int(rs.integers(S1)), int(rs.integers(S2))
        i, j, status, _ = kernels.best_response_dynamics(A, B, i0, j0, BR_CAP)
        if status == 1:
            found = test(np.eye(S1)[i], np.eye(S2)[j], "best-response dynamics")
        if found is None:
            x0 = np.zeros(S1)
            y0 = np.zeros(S2)
            x0[i0] = 1.0
            y0[j0] = 1.0
            x, y = kernels.fictitious_play(A, B, x0, y0, fp_iters)
            found = test(x, y, "fictitious play")
        if found is None:
            k = int(rs.integers(1, 4))
            x = np.zeros(S1)
            y = np.zeros(S2)
            x[rs.choice(S1, k, replace=False)] = rs.dirichlet(np.ones(k))
            y[rs.choice(S2, k, replace=False)] = rs.dirichlet(np.ones(k))
            found = test(x, y, "random mixture")
        if found is not None:
            break
    notes = ["no counterexample is evidence, not proof; the game is discretized with ties split uniformly"]
    return FalsificationReport("FOUND" if found else "NONE-FOUND", vals, step, trials, checked, lowest, opt,
                               found, notes)
