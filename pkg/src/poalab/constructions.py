"""Explicit lower-bound instances: game, mixed profile, and closed-form predictions.

Player numbering: grid families put the real players first (``0..n-1``) and
the dummy last (``n``). Two-player instances number the unit-demand bidder
0 and the bidder with the all-or-nothing bonus 1.

Every instance carries the predictions as :class:`Prediction` records whose
``source`` says how the number was obtained: ``closed-form``,
``quadrature`` or ``bound`` (an upper bound on welfare, so the matching
PoA is a lower bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from poalab import distributions as D
from poalab import mechanisms as M
from poalab.errors import CapacityError, ContractError, UnsupportedError
from poalab.valuations import (
    Additive,
    GridProjection,
    MultiUnit,
    SubadditiveLBPlayer1,
    SubadditiveLBPlayer2,
)

GRID_MAX_STORED = 6
GRID_GENERAL_MAX = 4
GRID_D_MAX_ITEMS = 4096
E = math.e


@dataclass(frozen=True)
class Prediction:
    value: float
    source: str = "closed-form"

    def to_json(self) -> dict:
        return {"value": float(self.value), "source": self.source}


@dataclass(frozen=True)
class ConstructedInstance:
    """Game, profile and predicted numbers of one construction.

    ``game`` and ``profile`` are ``None`` in closed-form mode. ``supports``
    maps player index to the bid interval of its mixed strategy;
    ``thresholds`` lists the per-item top-of-support bids where known.
    """

    name: str
    params: dict
    game: M.AuctionGame | None
    profile: D.MixedProfile | None
    utilities: tuple
    expected_sw: Prediction
    optimal_sw: Prediction
    poa: Prediction
    limit: float | None = None
    supports: dict = field(default_factory=dict)
    thresholds: tuple = ()
    cdfs: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def poa_is_lower_bound(self) -> bool:
        return self.expected_sw.source == "bound"

    @property
    def closed_form_only(self) -> bool:
        return self.game is None

    def to_json(self) -> dict:
        out = {
            "construction": self.name,
            "params": {k: _jsonable(v) for k, v in sorted(self.params.items())},
            "closed_form_only": self.closed_form_only,
            "predicted": {
                "utilities": [None if u is None else u.to_json() for u in self.utilities],
                "expected_sw": self.expected_sw.to_json(),
                "optimal_sw": self.optimal_sw.to_json(),
                "poa": self.poa.to_json(),
                "poa_is_lower_bound": self.poa_is_lower_bound,
            },
        }
        if self.limit is not None:
            out["predicted"]["limit"] = float(self.limit)
        if self.game is not None:
            out["game"] = {
                "format": self.game.format,
                "players": self.game.n,
                "items": self.game.m,
                "rule": self.game.rule.to_config() if self.game.anonymous else "per-player",
                "tie": self.game.tie.to_config(),
                "valuations": [v.to_config() for v in self.game.valuations],
            }
        if self.supports:
            out["supports"] = {str(k): [float(a), float(b)] for k, (a, b) in sorted(self.supports.items())}
        if len(self.thresholds):
            out["thresholds"] = [float(t) for t in self.thresholds]
        return out


def _jsonable(v):
    if isinstance(v, M.PaymentRule):
        return v.to_config()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _grid_c(n: int) -> float:
    return ((n - 1) / n) ** (n - 1)


def grid_cdf(n: int) -> D.Cdf:
    """``G(x) = (n-1)((1-x)^(-1/(n-1)) - 1)`` on ``[0, 1 - ((n-1)/n)^(n-1)]``."""
    if n < 2:
        raise ContractError("grid CDFs need n >= 2")
    hi = 1.0 - _grid_c(n)
    return D.Cdf([D.Piece.power_reciprocal(0.0, hi, n - 1.0, 1.0, 1.0 / (n - 1), -(n - 1.0))], label=f"grid-G(n={n})")


def grid_poa(n: int) -> float:
    return 1.0 / (1.0 - ((n - 1) / n) ** n)


def grid_optimal_allocation(n: int, d: int | None = None) -> np.ndarray:
    """Owner of each grid item: the sum of its digits modulo ``n``."""
    dims = n if d is None else d
    if n < 2 or (d is None and n > GRID_MAX_STORED) or n**dims > max(GRID_D_MAX_ITEMS, GRID_MAX_STORED**GRID_MAX_STORED):
        raise CapacityError("grid allocations are stored only for small grids")
    idx = np.arange(n**dims)
    digits = (idx[:, None] // n ** np.arange(dims)[None, :]) % n
    return digits.sum(axis=1) % n


def _grid_game(n: int, d: int, scale: float, dummy_values, rule, direction_of) -> M.AuctionGame:
    m = n**d
    vals = [GridProjection.of(n, direction_of(i), scale, d) for i in range(n)]
    vals.append(Additive(m, tuple(dummy_values)))
    return M.AuctionGame("item", n + 1, m, tuple(vals), rule, M.favor(n))


def grid_instance(n: int, store: bool = True) -> ConstructedInstance:
    """``n`` real players on ``[n]^n`` plus a dummy bidding 0 that wins ties at 0.

    With ``store=False`` only the closed-form predictions are produced, so
    any ``n >= 2`` is accepted.
    """
    if n < 2:
        raise CapacityError("grid instances need n >= 2")
    if store and n > GRID_MAX_STORED:
        raise CapacityError(f"grid_instance stores n^n items; n={n} exceeds {GRID_MAX_STORED}")
    m = n**n
    c = _grid_c(n)
    util = Prediction((n - 1.0) ** (n - 1))
    sw = Prediction(m * (1.0 - ((n - 1) / n) ** n))
    opt = Prediction(float(m))
    poa = Prediction(grid_poa(n))
    limit = E / (E - 1.0)
    if not store:
        return ConstructedInstance("grid", {"n": n}, None, None, (util,) * n + (Prediction(0.0),), sw, opt, poa, limit)
    G = grid_cdf(n)
    game = _grid_game(n, n, 1.0, np.zeros(m), M.first_price(), lambda i: i)
    strategies = [D.SliceUniform((n, n), i, G, 0.0) for i in range(n)]
    strategies.append(D.Atom(tuple(np.zeros(m))))
    return ConstructedInstance(
        "grid", {"n": n}, game, D.MixedProfile(tuple(strategies)),
        (util,) * n + (Prediction(0.0),), sw, opt, poa, limit,
        supports={i: (0.0, 1.0 - c) for i in range(n)},
        thresholds=tuple(np.full(m, 1.0 - c)),
        cdfs={"G": G},
    )


def _rule_range_check(rule: M.PaymentRule, m: int, target: float, what: str) -> np.ndarray:
    """Per-item bids ``T_j`` with ``q^w_j(T_j) = target``."""
    T = np.empty(m)
    for j in range(m):
        try:
            t = float(rule.win_inverse(j, np.array(target)))
        except ContractError as exc:
            raise ContractError(f"{what}: {exc}") from exc
        if not np.isfinite(t) or t < 0 or abs(float(rule.win(j, np.array(t))) - target) > 1e-9 * max(1.0, target):
            raise ContractError(f"{what}: {target} is outside the range of the winner payment on item {j}")
        T[j] = t
    return T


def _require_increasing_at_zero(rule: M.PaymentRule, T: np.ndarray) -> None:
    for j, t in enumerate(T):
        if float(rule.win(j, np.array(t * 1e-6))) <= 0.0:
            raise ContractError(
                f"winner payment on item {j} is flat at 0; this construction needs it strictly increasing near 0"
            )


def _composite_cdf(f, hi, label, inverse=None) -> D.Cdf:
    return D.Cdf([D.Piece.composite(0.0, hi, f, inverse, label)], label=label)


def grid_general_cdf(n: int, rule: M.PaymentRule, V: float, item: int, T: float) -> D.Cdf:
    c = _grid_c(n)

    def G(x):
        qw, ql = rule.win(item, x), rule.lose(item, x)
        return n * np.power((V * c + ql) / (V - qw + ql), 1.0 / (n - 1)) - n + 1

    return _composite_cdf(G, T, f"grid-G_{item}")


def grid_instance_general(n: int, rule: M.PaymentRule, V: float = 1.0) -> ConstructedInstance:
    """Grid instance for a bid-dependent rule: values scaled by ``V``, item-specific CDFs."""
    if n < 2 or n > GRID_GENERAL_MAX:
        raise CapacityError(f"grid_instance_general supports 2 <= n <= {GRID_GENERAL_MAX}")
    if rule.kind == "rank-based":
        raise UnsupportedError("the grid construction uses bid-dependent rules")
    if not V > 0:
        raise ContractError("V must be positive")
    m = n**n
    c = _grid_c(n)
    rule.check(hi=1.0, m=min(m, rule.items or 1))
    T = _rule_range_check(rule, m, V * (1.0 - c), "grid_instance_general")
    _require_increasing_at_zero(rule, T)
    cache: dict = {}
    per_item = []
    for j in range(m):
        key = (rule.win_curves[0 if len(rule.win_curves) == 1 else j],
               rule.lose_curves[0 if len(rule.lose_curves) == 1 else j])
        if key not in cache:
            cache[key] = grid_general_cdf(n, rule, V, j, T[j])
        per_item.append(cache[key])
    for F in cache.values():
        if abs(float(F(F.support_hi)) - 1.0) > 1e-9 or abs(float(F(0.0))) > 1e-9:
            raise ContractError("item-specific CDF is not valid on [0, T_j]")
    game = _grid_game(n, n, V, np.zeros(m), rule, lambda i: i)
    strategies = [D.SliceUniform((n, n), i, tuple(per_item), 0.0) for i in range(n)]
    strategies.append(D.Atom(tuple(np.zeros(m))))
    util = Prediction(V * n ** (n - 1) * c)
    return ConstructedInstance(
        "grid-general", {"n": n, "rule": rule, "V": V}, game, D.MixedProfile(tuple(strategies)),
        (util,) * n + (Prediction(0.0),),
        Prediction(V * (m - (n - 1.0) ** n)), Prediction(V * m), Prediction(grid_poa(n)), E / (E - 1.0),
        supports={i: (0.0, float(T.max())) for i in range(n)},
        thresholds=tuple(T),
        cdfs={f"G_{j}": F for j, F in enumerate(per_item) if j < 1 or len(cache) > 1},
    )


def subadditive_cdfs(m: int, v: float):
    """``(G, F)``: the unit-demand bidder's CDF ``G`` and the common-bid CDF ``F`` on ``[0, 1/m]``."""
    G = D.Cdf([D.Piece.rational(0.0, 1.0 / m, 0.0, m - 1.0, 1.0, -1.0)], label=f"sub-G(m={m})")
    F = D.Cdf([D.Piece.reciprocal(0.0, 1.0 / m, v - 1.0 / m, v)], label=f"sub-F(m={m},v={v})")
    return G, F


def _subadditive_bound(m: int, v: float, V: float = 1.0) -> float:
    return V + v + V * V / (m * v) - V / m


def _two_player_opt(m: int, v: float, V: float) -> float:
    return max(2.0 * V, V + v) if m >= 2 else max(2.0 * V, v)


def subadditive_instance(m: int, v: float | None = None) -> ConstructedInstance:
    """Two bidders on ``m`` items: unit-demand worth ``v`` against an all-or-nothing bonus bidder."""
    if m < 2:
        raise ContractError("subadditive instances need m >= 2")
    v = 1.0 / math.sqrt(m) if v is None else float(v)
    if not v > 1.0 / m:
        raise ContractError("the profile is an equilibrium only for v > 1/m")
    G, F = subadditive_cdfs(m, v)
    game = M.AuctionGame("item", 2, m, (SubadditiveLBPlayer1(m, v=v), SubadditiveLBPlayer2(m, V=1.0)),
                         M.first_price(), M.favor(1))
    profile = D.MixedProfile((D.SliceUniform((m, 1), 0, G, 0.0), D.CorrelatedInverse(F, m)))
    bound = _subadditive_bound(m, v)
    opt = _two_player_opt(m, v, 1.0)
    return ConstructedInstance(
        "subadditive", {"m": m, "v": v}, game, profile,
        (Prediction(v - 1.0 / m), Prediction(1.0)),
        Prediction(bound, "bound"), Prediction(opt), Prediction(opt / bound, "bound"), 2.0,
        supports={0: (0.0, 1.0 / m), 1: (0.0, 1.0 / m)},
        thresholds=tuple(np.full(m, 1.0 / m)),
        cdfs={"G": G, "F": F},
        extra={"zero_probability": 1.0 - 1.0 / (m * v)},
    )


def subadditive_general_cdfs(m: int, V: float, v: float, rule: M.PaymentRule, item: int, T: float):
    def G(x):
        qw, ql = rule.win(item, x), rule.lose(item, x)
        return ((m - 1) * qw + ql) / (V - qw + ql)

    def F(y):
        qw, ql = rule.win(item, y), rule.lose(item, y)
        return (v - V / m + ql) / (v - qw + ql)

    return _composite_cdf(G, T, f"sub-G_{item}"), _composite_cdf(F, T, f"sub-F_{item}")


def subadditive_general(m: int, V: float = 1.0, rule: M.PaymentRule | None = None,
                        v: float | None = None) -> ConstructedInstance:
    """Two-bidder subadditive instance for bid-dependent or rank-based payments.

    The common-bid bidder draws one level ``rho`` and bids ``F_j^{-1}(rho)``
    on every item, bidding 0 while ``rho < (v - V/m)/v``.
    """
    rule = M.first_price() if rule is None else rule
    if m < 2:
        raise ContractError("subadditive instances need m >= 2")
    v = V / math.sqrt(m) if v is None else float(v)
    if not (V / m < v < V):
        raise ContractError("need V/m < v < V")
    rule.check(hi=1.0, m=min(m, rule.items or 1))
    T = _rule_range_check(rule, m, V / m, "subadditive_general")
    _require_increasing_at_zero(rule, T)
    Gs, Fs, cache = [], [], {}
    for j in range(m):
        key = (rule.win_curves[0 if len(rule.win_curves) == 1 else j],
               rule.lose_curves[0 if len(rule.lose_curves) == 1 else j])
        if key not in cache:
            cache[key] = subadditive_general_cdfs(m, V, v, rule, j, T[j])
        Gs.append(cache[key][0])
        Fs.append(cache[key][1])
    threshold = (v - V / m) / v
    game = M.AuctionGame("item", 2, m, (SubadditiveLBPlayer1(m, v=v), SubadditiveLBPlayer2(m, V=V)), rule, M.favor(1))
    profile = D.MixedProfile((D.SliceUniform((m, 1), 0, tuple(Gs), 0.0),
                              D.CorrelatedInverse(tuple(Fs), m, threshold)))
    bound = _subadditive_bound(m, v, V)
    opt = _two_player_opt(m, v, V)
    return ConstructedInstance(
        "subadditive-general", {"m": m, "V": V, "v": v, "rule": rule}, game, profile,
        (Prediction(v - V / m), Prediction(V)),
        Prediction(bound, "bound"), Prediction(opt), Prediction(opt / bound, "bound"), 2.0,
        supports={0: (0.0, float(T.max())), 1: (0.0, float(T.max()))},
        thresholds=tuple(T),
        cdfs={"G_0": Gs[0], "F_0": Fs[0]},
        extra={"zero_threshold": threshold},
    )


def discriminatory_cdfs(v: float):
    G = D.Cdf([D.Piece.rational(0.0, 0.5, 0.0, 1.0, 1.0, -1.0)], label="disc-G")
    F = D.Cdf([D.Piece.reciprocal(0.0, 0.5, v - 0.5, v)], label=f"disc-F(v={v})")
    return G, F


def discriminatory_submodular_welfare(v: float) -> float:
    """``2 - (1 - v) P[x > y]`` with ``x ~ G``, ``y ~ F``, by quadrature."""
    G, F = discriminatory_cdfs(v)
    # P[y < x] = F(x) for x > 0 since F has no atom above 0
    return 2.0 - (1.0 - v) * G.expect(lambda x: F(x))


def discriminatory_submodular(v: float = 0.643) -> ConstructedInstance:
    """Two units; bidder 0 wants one unit (worth ``v``), bidder 1 is additive (1 per unit)."""
    if not (0.5 < v < 1.0):
        raise ContractError("v must lie in (1/2, 1)")
    G, F = discriminatory_cdfs(v)
    game = M.AuctionGame("multi-unit", 2, 2, (MultiUnit(2, (0.0, v, v), "submodular"),
                                              MultiUnit(2, (0.0, 1.0, 2.0), "additive")),
                         M.first_price(), M.favor(1))
    profile = D.MixedProfile((D.MultiUnitFlat(1, G, 2), D.MultiUnitFlat(2, F, 2)))
    sw = discriminatory_submodular_welfare(v)
    return ConstructedInstance(
        "discriminatory-submodular", {"v": v}, game, profile,
        (Prediction(v - 0.5), Prediction(1.0)),
        Prediction(sw, "quadrature"), Prediction(2.0), Prediction(2.0 / sw, "quadrature"), None,
        supports={0: (0.0, 0.5), 1: (0.0, 0.5)},
        thresholds=(0.5, 0.5),
        cdfs={"G": G, "F": F},
    )


def discriminatory_subadditive(m: int, v: float | None = None) -> ConstructedInstance:
    """Multi-unit analogue of :func:`subadditive_instance` with flat bids."""
    if m < 2:
        raise ContractError("need m >= 2 units")
    v = 1.0 / math.sqrt(m) if v is None else float(v)
    if not v > 1.0 / m:
        raise ContractError("the profile is an equilibrium only for v > 1/m")
    if v >= 1.0:
        raise ContractError("the unit-demand bidder needs v < 1")
    G, F = subadditive_cdfs(m, v)
    vals1 = (0.0,) + (v,) * m
    vals2 = (0.0,) + (1.0,) * (m - 1) + (2.0,)
    game = M.AuctionGame("multi-unit", 2, m, (MultiUnit(m, vals1, "oxs-witness"), MultiUnit(m, vals2, "subadditive")),
                         M.first_price(), M.favor(1))
    profile = D.MixedProfile((D.MultiUnitFlat(1, G, m), D.MultiUnitFlat(m, F, m)))
    bound = _subadditive_bound(m, v)
    return ConstructedInstance(
        "discriminatory-subadditive", {"m": m, "v": v}, game, profile,
        (Prediction(v - 1.0 / m), Prediction(1.0)),
        Prediction(bound, "bound"), Prediction(2.0), Prediction(2.0 / bound, "bound"), 2.0,
        supports={0: (0.0, 1.0 / m), 1: (0.0, 1.0 / m)},
        thresholds=tuple(np.full(m, 1.0 / m)),
        cdfs={"G": G, "F": F},
    )


def grid_d_threshold(n: int, d: int) -> float:
    """Smallest scale ``v`` for which multi-item deviations are ruled out under independent coverage."""
    return (1.0 - 1.0 / n) ** (-n / d + 1)


def grid_d_bottom_threshold(n: int, d: int) -> float:
    """Smallest ``v`` at which bidding just above ``v - 1`` on ``k >= 2`` items of a column is no better than on one.

    Each same-direction opponent meets a column in exactly one item, so the
    chance that all ``k`` bottom bids are overbid is the chance that the
    ``n/d - 1`` same-direction opponents cover all ``k`` items, computed by
    inclusion-exclusion. Returns ``inf`` when no ``v`` suffices.
    """
    _check_grid_d(n, d)
    same = n // d - 1
    f2 = (1.0 - 1.0 / n) ** same
    worst = 1.0
    for k in range(2, n + 1):
        cover = sum((-1) ** t * math.comb(k, t) * ((n - t) / n) ** same for t in range(k + 1))
        slope = 1.0 - cover - k * f2
        if slope >= 0:
            return math.inf
        worst = max(worst, (k - 1) * f2 / -slope)
    return worst


def _check_grid_d(n: int, d: int):
    if n < 2 or d < 1 or n % d != 0:
        raise ContractError("grid_instance_d needs d to divide n")


def grid_d_poa(n: int, d: int, v: float | None = None) -> float:
    v = grid_d_threshold(n, d) if v is None else v
    return v / (v - (1.0 - 1.0 / n) ** n)


def grid_d_cdf(n: int, v: float) -> D.Cdf:
    """``G(x) = (n-1)((v-x)^(-1/(n-1)) - 1)`` on ``[v-1, v-((n-1)/n)^(n-1)]``."""
    return D.Cdf([D.Piece.power_reciprocal(v - 1.0, v - _grid_c(n), n - 1.0, v, 1.0 / (n - 1), -(n - 1.0))],
                 label=f"grid-d-G(n={n},v={v})")


def grid_instance_d(n: int, d: int, v: float | None = None, store: bool = True) -> ConstructedInstance:
    """``n`` real players in ``d`` direction groups on ``[n]^d``; dummy bids ``v - 1`` and wins those ties."""
    _check_grid_d(n, d)
    v_min = grid_d_threshold(n, d)
    v = v_min if v is None else float(v)
    if v < v_min - 1e-12:
        raise ContractError(f"v must be at least {v_min}")
    m = n**d
    util = Prediction(n ** (d - 1) * (1.0 - 1.0 / n) ** (n - 1))
    sw = Prediction(m * (v - (1.0 - 1.0 / n) ** n))
    opt = Prediction(m * v)
    poa = Prediction(grid_d_poa(n, d, v))
    limit = 1.0 / (1.0 - math.exp(-1.0 - 1.0 / d))
    dummy_util = Prediction(0.0)
    params = {"n": n, "d": d, "v": v}
    extra = {"coverage_threshold": v_min, "bottom_threshold": grid_d_bottom_threshold(n, d)}
    if not store:
        return ConstructedInstance("grid-d", params, None, None, (util,) * n + (dummy_util,), sw, opt, poa, limit,
                                   extra=extra)
    if m > GRID_D_MAX_ITEMS:
        raise CapacityError(f"grid_instance_d stores n^d items; {m} exceeds {GRID_D_MAX_ITEMS}")
    group = n // d
    G = grid_d_cdf(n, v)
    game = _grid_game(n, d, v, np.full(m, v - 1.0), M.first_price(), lambda i: i // group)
    strategies = [D.SliceUniform((n, d), i // group, G, v - 1.0) for i in range(n)]
    strategies.append(D.Atom(tuple(np.full(m, v - 1.0))))
    return ConstructedInstance(
        "grid-d", params, game, D.MixedProfile(tuple(strategies)),
        (util,) * n + (dummy_util,), sw, opt, poa, limit,
        supports={i: (v - 1.0, v - _grid_c(n)) for i in range(n)},
        thresholds=tuple(np.full(m, v - _grid_c(n))),
        cdfs={"G": G},
        extra=extra,
    )


BAYES_L = 1.0 - 2.0 / E
BAYES_R = 1.0 - 1.0 / E


def bayesian_cdfs():
    """``(H, G, F)``: value law of bidder 1, bid law of bidder 0, induced bid law of bidder 1."""
    l, r = BAYES_L, BAYES_R
    H = D.Cdf([D.Piece.const(0.0, l, 0.5), D.Piece.rational(l, 1.0, 2.0, 0.0, E + 2.0, -E)], label="bayes-H")
    G = D.uniform(l, r)
    F = D.Cdf([D.Piece.const(0.0, l, 0.5), D.Piece.reciprocal(l, r, 1.0 / E, 1.0)], label="bayes-F")
    return H, G, F


def bayesian_bid(v2):
    v2 = np.asarray(v2, dtype=float)
    return np.where(v2 >= BAYES_L, 0.5 * (v2 + BAYES_L), 0.0)


def bayesian_welfare() -> float:
    """Expected welfare: bidder 0 (value 1) wins unless bidder 1 outbids her."""
    H, G, _ = bayesian_cdfs()
    return H.expect(lambda v2: 1.0 if v2 < BAYES_L else v2 * float(G(bayesian_bid(v2))) + 1.0 - float(G(bayesian_bid(v2))))


def bayesian_single_item() -> ConstructedInstance:
    """One item; bidder 0 values it at 1, bidder 1's value is drawn from ``H``."""
    H, G, F = bayesian_cdfs()
    game = M.AuctionGame("item", 2, 1, (Additive(1, (1.0,)), Additive(1, (1.0,))), M.first_price(), M.TieBreak())
    profile = D.MixedProfile((D.IndependentPerItem(G, 1), D.BayesianBid(H, bayesian_bid, F)))
    sw = bayesian_welfare()
    u1 = 1.0 / E
    u2 = H.expect(lambda v2: float(G(bayesian_bid(v2))) * (v2 - float(bayesian_bid(v2))))
    return ConstructedInstance(
        "bayesian", {}, game, profile,
        (Prediction(u1), Prediction(u2, "quadrature")),
        Prediction(sw, "quadrature"), Prediction(1.0), Prediction(1.0 / sw, "quadrature"), None,
        supports={0: (BAYES_L, BAYES_R), 1: (BAYES_L, BAYES_R)},
        cdfs={"H": H, "G": G, "F": F},
        extra={"l": BAYES_L, "r": BAYES_R},
    )


def anonymity_example(eps: float = 0.01) -> ConstructedInstance:
    """One item, values ``(1, eps)``; bidder 1 pays only ``eps`` per unit of winning bid."""
    if not (0.0 < eps <= 1.0):
        raise ContractError("eps must lie in (0, 1]")
    rules = (M.first_price(), M.bid_dependent(M.linear(eps), M.ZERO))
    game = M.AuctionGame("item", 2, 1, (Additive(1, (1.0,)), Additive(1, (eps,))), M.first_price(), M.favor(1),
                         player_rules=rules)
    profile = D.MixedProfile((D.Atom((1.0,)), D.Atom((1.0,))))
    return ConstructedInstance(
        "anonymity", {"eps": eps}, game, profile,
        (Prediction(0.0), Prediction(0.0)),
        Prediction(eps), Prediction(1.0), Prediction(1.0 / eps), None,
    )


def _rule_by_name(name):
    if isinstance(name, M.PaymentRule):
        return name
    if isinstance(name, dict):
        return M.PaymentRule.from_config(name)
    table = {"first-price": M.first_price, "all-pay": M.all_pay, "rank-all-pay": M.rank_all_pay}
    if name not in table:
        raise ContractError(f"unknown payment rule {name!r}")
    return table[name]()


REGISTRY = {
    "grid": lambda p: grid_instance(int(p["n"]), store=p.get("store", True)),
    "grid-general": lambda p: grid_instance_general(int(p["n"]), _rule_by_name(p.get("rule", "first-price")),
                                                    float(p.get("V", 1.0))),
    "subadditive": lambda p: subadditive_instance(int(p["m"]), p.get("v")),
    "subadditive-general": lambda p: subadditive_general(int(p["m"]), float(p.get("V", 1.0)),
                                                         _rule_by_name(p.get("rule", "first-price")), p.get("v")),
    "discriminatory-submodular": lambda p: discriminatory_submodular(float(p.get("v", 0.643))),
    "discriminatory-subadditive": lambda p: discriminatory_subadditive(int(p["m"]), p.get("v")),
    "grid-d": lambda p: grid_instance_d(int(p["n"]), int(p["d"]), p.get("v"), store=p.get("store", True)),
    "bayesian": lambda p: bayesian_single_item(),
    "anonymity": lambda p: anonymity_example(float(p.get("eps", 0.01))),
}


def construct(name: str, **params) -> ConstructedInstance:
    """Build a construction by registry name."""
    if name not in REGISTRY:
        raise ContractError(f"unknown construction {name!r}; known: {sorted(REGISTRY)}")
    try:
        return REGISTRY[name](params)
    except KeyError as exc:
        raise ContractError(f"construction {name!r} needs parameter {exc.args[0]!r}") from exc
