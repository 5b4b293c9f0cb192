"""Auction formats, payment rules, tie policies, and pure-profile evaluation.

Two formats are supported:

* ``item``: simultaneous single-item auctions; each item goes to its highest
  bidder and payments follow a :class:`PaymentRule`.
* ``multi-unit``: discriminatory auction of ``m`` identical units; every
  player submits ``m`` non-increasing bids, the top ``m`` bids win and
  winners pay their winning bids.

Evaluation is vectorized over draws: bids are shaped ``(draws, n, m)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from poalab import kernels
from poalab.errors import ContractError, UnsupportedError
from poalab.rng import counter_uniform
from poalab.valuations import MultiUnit, Valuation

MONOTONE_TOL = 1e-12
THETA_GRID = 1 << 14

FORMATS = ("item", "multi-unit")


# ---------------------------------------------------------------------------
# Payment curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Curve:
    """Non-decreasing continuous payment curve with ``q(0) = 0``.

    Kinds and parameters:

    * ``zero``
    * ``linear``: ``c * x``
    * ``power``: ``c * x**p``
    * ``affine-power``: ``c * ((x + s)**p - s**p)``
    * ``joined``: ``knots`` and ``parts``; part ``k`` applies from ``knots[k]``
      on and is shifted to meet the previous part continuously
    """

    kind: str
    c: float = 1.0
    p: float = 1.0
    s: float = 0.0
    knots: tuple = ()
    parts: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "power", "affine-power", "joined"):
            raise ContractError(f"unknown curve kind {self.kind!r}")
        if self.kind in ("linear", "power", "affine-power") and self.c < 0:
            raise ContractError("curve scale must be non-negative")
        if self.kind in ("power", "affine-power") and self.p <= 0:
            raise ContractError("curve exponent must be positive")
        if self.kind == "affine-power" and self.s < 0:
            raise ContractError("affine-power shift must be non-negative")
        if self.kind == "joined":
            if len(self.knots) != len(self.parts) or not self.parts or self.knots[0] != 0.0:
                raise ContractError("joined curves need one knot per part, starting at 0")
            if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
                raise ContractError("joined-curve knots must increase")
            offsets = [0.0]
            for k in range(1, len(self.parts)):
                edge = self.knots[k]
                offsets.append(offsets[-1] + float(self.parts[k - 1](edge)) - float(self.parts[k](edge)))
            object.__setattr__(self, "_offsets", tuple(offsets))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "linear":
            return self.c * x
        if self.kind == "power":
            return self.c * np.power(np.maximum(x, 0.0), self.p)
        if self.kind == "affine-power":
            return self.c * (np.power(np.maximum(x, 0.0) + self.s, self.p) - self.s**self.p)
        k = np.searchsorted(np.asarray(self.knots), x, side="right") - 1
        k = np.clip(k, 0, len(self.parts) - 1)
        out = np.zeros_like(x)
        for idx, part in enumerate(self.parts):
            sel = k == idx
            if np.any(sel):
                out[sel] = part(x[sel]) + self._offsets[idx]
        return out

    def inverse(self, y):
        """Smallest ``x >= 0`` with ``q(x) = y``; requires ``y`` in the curve's range."""
        y = np.asarray(y, dtype=float)
        if self.kind == "zero":
            raise ContractError("the zero curve has no inverse")
        if self.kind == "linear":
            return y / self.c
        if self.kind == "power":
            return np.power(y / self.c, 1.0 / self.p)
        if self.kind == "affine-power":
            return np.power(y / self.c + self.s**self.p, 1.0 / self.p) - self.s
        starts = np.array([float(self(np.array(kn))) for kn in self.knots])
        k = np.clip(np.searchsorted(starts, y, side="right") - 1, 0, len(self.parts) - 1)
        out = np.zeros_like(y)
        for idx, part in enumerate(self.parts):
            sel = k == idx
            if np.any(sel):
                out[sel] = part.inverse(y[sel] - self._offsets[idx])
        return out

    def to_config(self) -> dict:
        cfg = {"kind": self.kind}
        if self.kind in ("linear", "power", "affine-power"):
            cfg["c"] = float(self.c)
        if self.kind in ("power", "affine-power"):
            cfg["p"] = float(self.p)
        if self.kind == "affine-power":
            cfg["s"] = float(self.s)
        if self.kind == "joined":
            cfg["knots"] = list(map(float, self.knots))
            cfg["parts"] = [p.to_config() for p in self.parts]
        return cfg

    @staticmethod
    def from_config(cfg: dict) -> "Curve":
        kind = cfg["kind"]
        if kind == "joined":
            return Curve("joined", knots=tuple(cfg["knots"]), parts=tuple(Curve.from_config(p) for p in cfg["parts"]))
        return Curve(kind, c=cfg.get("c", 1.0), p=cfg.get("p", 1.0), s=cfg.get("s", 0.0))


ZERO = Curve("zero")
IDENTITY = Curve("linear", c=1.0)


def linear(c: float = 1.0) -> Curve:
    return Curve("linear", c=c)


def power(c: float, p: float) -> Curve:
    return Curve("power", c=c, p=p)


def affine_power(c: float, p: float, s: float) -> Curve:
    return Curve("affine-power", c=c, p=p, s=s)


def joined(knots, parts) -> Curve:
    return Curve("joined", knots=tuple(knots), parts=tuple(parts))


def _apply_per_item(curves: tuple, x: np.ndarray) -> np.ndarray:
    """Apply per-item curves along the last axis of ``x``; a 1-tuple broadcasts."""
    if len(curves) == 1:
        return curves[0](x)
    out = np.empty_like(x, dtype=float)
    groups: dict = {}
    for j, c in enumerate(curves):
        groups.setdefault(c, []).append(j)
    for c, cols in groups.items():
        out[..., cols] = c(x[..., cols])
    return out


# ---------------------------------------------------------------------------
# Payment rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PaymentRule:
    """Per-item payment curves.

    ``kind`` is ``first-price``, ``all-pay``, ``bid-dependent`` or ``rank-based``.
    ``win_curves``/``lose_curves`` hold one curve per item or a single shared
    curve. For ``rank-based`` rules ``rank_curves[r - 2]`` is the payment at
    rank ``r >= 2``; ranks past the end reuse the last entry, and
    ``lose_curves`` mirrors rank 2.
    """

    kind: str
    win_curves: tuple = (IDENTITY,)
    lose_curves: tuple = (ZERO,)
    rank_curves: tuple = ()

    def __post_init__(self):
        if self.kind not in ("first-price", "all-pay", "bid-dependent", "rank-based"):
            raise ContractError(f"unknown payment rule {self.kind!r}")
        if self.kind == "rank-based":
            if not self.rank_curves:
                raise ContractError("rank-based rules need at least one losing-rank curve")
            object.__setattr__(self, "lose_curves", tuple(self.rank_curves[0]))
        if len(self.win_curves) != len(self.lose_curves) and 1 not in (len(self.win_curves), len(self.lose_curves)):
            raise ContractError("winner and loser curves must cover the same items")

    @property
    def items(self) -> int | None:
        """Number of items with dedicated curves, or ``None`` when shared."""
        k = max(len(self.win_curves), len(self.lose_curves))
        return None if k == 1 else k

    def _curve(self, curves, item):
        return curves[0] if len(curves) == 1 else curves[item]

    def win(self, item: int, x):
        return self._curve(self.win_curves, item)(x)

    def lose(self, item: int, x, rank: int = 2):
        if self.kind == "rank-based":
            r = min(max(rank, 2) - 2, len(self.rank_curves) - 1)
            return self._curve(self.rank_curves[r], item)(x)
        return self._curve(self.lose_curves, item)(x)

    def win_inverse(self, item: int, y):
        return self._curve(self.win_curves, item).inverse(y)

    def win_all(self, x: np.ndarray) -> np.ndarray:
        """Winner payments for bids along the last (item) axis."""
        return _apply_per_item(self.win_curves, x)

    def lose_all(self, x: np.ndarray, rank: np.ndarray | None = None) -> np.ndarray:
        """Loser payments for bids along the last axis; ``rank`` is used by rank-based rules."""
        if self.kind != "rank-based" or rank is None:
            return _apply_per_item(self.lose_curves, x)
        out = np.zeros_like(x, dtype=float)
        r_idx = np.clip(rank - 2, 0, len(self.rank_curves) - 1)
        for k, curves in enumerate(self.rank_curves):
            sel = r_idx == k
            if np.any(sel):
                out = np.where(sel, _apply_per_item(tuple(curves), x), out)
        return out

    def check(self, hi: float = 1.0, points: int = 1025, m: int | None = None) -> None:
        """Assert the documented curve invariants on ``[0, hi]``."""
        xs = np.linspace(0.0, hi, points)
        k = m or self.items or 1
        any_positive = False
        for j in range(k):
            w = np.asarray(self.win(j, xs))
            ls = [np.asarray(self.lose(j, xs, r)) for r in range(2, 2 + max(1, len(self.rank_curves)))]
            if abs(w[0]) > 1e-12 or any(abs(l[0]) > 1e-12 for l in ls):
                raise ContractError("payment curves must vanish at 0")
            if np.any(np.diff(w) < -MONOTONE_TOL) or any(np.any(np.diff(l) < -MONOTONE_TOL) for l in ls):
                raise ContractError("payment curves must be non-decreasing")
            if any(np.any(l > w + 1e-12) for l in ls):
                raise ContractError("loser payments may not exceed winner payments")
            any_positive |= bool(np.any(w > 0))
        if not any_positive:
            raise ContractError("some winner payment must be positive")

    def to_config(self) -> dict:
        if self.kind in ("first-price", "all-pay"):
            return {"kind": self.kind}
        cfg = {"kind": self.kind, "win": [c.to_config() for c in self.win_curves]}
        if self.kind == "rank-based":
            cfg["ranks"] = [[c.to_config() for c in cs] for cs in self.rank_curves]
        else:
            cfg["lose"] = [c.to_config() for c in self.lose_curves]
        return cfg

    @staticmethod
    def from_config(cfg: dict) -> "PaymentRule":
        kind = cfg["kind"]
        if kind == "first-price":
            return first_price()
        if kind == "all-pay":
            return all_pay()
        win = tuple(Curve.from_config(c) for c in cfg["win"])
        if kind == "rank-based":
            ranks = tuple(tuple(Curve.from_config(c) for c in cs) for cs in cfg["ranks"])
            return PaymentRule("rank-based", win, rank_curves=ranks)
        return PaymentRule("bid-dependent", win, tuple(Curve.from_config(c) for c in cfg["lose"]))


def first_price() -> PaymentRule:
    return PaymentRule("first-price", (IDENTITY,), (ZERO,))


def all_pay() -> PaymentRule:
    return PaymentRule("all-pay", (IDENTITY,), (IDENTITY,))


def bid_dependent(win, lose) -> PaymentRule:
    """Bid-dependent rule from one curve or a per-item sequence for each side."""
    w = (win,) if isinstance(win, Curve) else tuple(win)
    l = (lose,) if isinstance(lose, Curve) else tuple(lose)
    return PaymentRule("bid-dependent", w, l)


def rank_based(win, ranks) -> PaymentRule:
    """Rank-based rule; ``ranks[k]`` is the curve (or per-item curves) at rank ``k + 2``."""
    w = (win,) if isinstance(win, Curve) else tuple(win)
    rc = tuple((c,) if isinstance(c, Curve) else tuple(c) for c in ranks)
    return PaymentRule("rank-based", w, rank_curves=rc)


def rank_all_pay() -> PaymentRule:
    """All-pay auction written in rank form: every rank pays its own bid."""
    return rank_based(IDENTITY, [IDENTITY])


def _ratio_sup(win: Curve, lose: Curve, hi: float, grid: int) -> float | None:
    xs = np.unique(np.concatenate([np.linspace(0.0, hi, grid // 2), np.geomspace(hi * 1e-9, hi, grid // 2)]))
    w, l = win(xs), lose(xs)
    ok = w > 0
    if not np.any(ok):
        return None
    ratio = np.where(ok, l / np.where(ok, w, 1.0), -np.inf)
    k = int(np.argmax(ratio))
    best = float(ratio[k])
    lo_x, hi_x = xs[max(k - 1, 0)], xs[min(k + 1, xs.size - 1)]

    def f(x):
        wx = float(win(np.array(x)))
        return float(lose(np.array(x))) / wx if wx > 0 else -np.inf

    from poalab.distributions import golden_max

    if hi_x > lo_x:
        _, val = golden_max(f, float(lo_x), float(hi_x))
        best = max(best, val)
    return best


def theta(rule: PaymentRule, hi: float = 1.0, m: int | None = None, grid: int = THETA_GRID) -> float:
    """Largest ratio of loser to winner payment over items and bids in ``(0, hi]``."""
    if rule.kind == "first-price":
        return 0.0
    if rule.kind == "all-pay":
        return 1.0
    k = m or rule.items or 1
    sups = []
    rank_sets = rule.rank_curves if rule.kind == "rank-based" else (rule.lose_curves,)
    for j in range(k):
        for curves in rank_sets:
            s = _ratio_sup(rule._curve(rule.win_curves, j), rule._curve(curves, j), hi, grid)
            if s is not None:
                sups.append(s)
    if not sups:
        raise ContractError("winner payments vanish on the whole bid range")
    return float(min(1.0, max(0.0, max(sups))))


# ---------------------------------------------------------------------------
# Ties, games, outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TieBreak:
    """Tie policy: ``favor`` a player, ``lexicographic`` (lowest index), or ``seeded-random``."""

    policy: str = "lexicographic"
    player: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.policy not in ("favor", "lexicographic", "seeded-random"):
            raise ContractError(f"unknown tie policy {self.policy!r}")

    def priority(self, n: int, shape: tuple, draw_ids: np.ndarray, slot: np.ndarray | None = None) -> np.ndarray:
        """Priority keys shaped ``shape + (n,)``; larger keys win ties.

        ``shape`` is ``(draws, positions)``; positions are items or unit slots.
        """
        B, P = shape
        if self.policy == "seeded-random":
            pos = np.arange(P)[None, :, None] if slot is None else slot
            return counter_uniform(self.seed, draw_ids[:, None, None], pos, np.arange(n)[None, None, :])
        key = -np.arange(n, dtype=float)
        if self.policy == "favor":
            key = key.copy()
            key[self.player] = 1.0
        return np.broadcast_to(key, (B, P, n))

    def to_config(self) -> dict:
        cfg = {"policy": self.policy}
        if self.policy == "favor":
            cfg["player"] = self.player
        if self.policy == "seeded-random":
            cfg["seed"] = self.seed
        return cfg


def favor(player: int) -> TieBreak:
    return TieBreak("favor", player=player)


@dataclass(frozen=True)
class AuctionGame:
    """Players, items or units, valuations, payment rule, tie policy.

    ``player_rules`` optionally overrides the rule per player; it exists only
    for the non-anonymous example and leaves every other path untouched.
    """

    format: str
    n: int
    m: int
    valuations: tuple
    rule: PaymentRule = field(default_factory=first_price)
    tie: TieBreak = field(default_factory=TieBreak)
    player_rules: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "valuations", tuple(self.valuations))
        if self.format not in FORMATS:
            raise ContractError(f"format must be one of {FORMATS}")
        if len(self.valuations) != self.n:
            raise ContractError(f"expected {self.n} valuations, got {len(self.valuations)}")
        for v in self.valuations:
            if not isinstance(v, Valuation) or v.m != self.m:
                raise ContractError("every valuation must be defined on the game's m items")
        if self.format == "multi-unit":
            if not all(isinstance(v, MultiUnit) for v in self.valuations):
                raise ContractError("discriminatory auctions need multi-unit valuations")
            if self.rule.kind != "first-price" or self.player_rules is not None:
                raise UnsupportedError("discriminatory auctions charge winning bids only")
        if self.player_rules is not None and len(self.player_rules) != self.n:
            raise ContractError("player_rules needs one rule per player")
        if self.tie.policy == "favor" and not (0 <= self.tie.player < self.n):
            raise ContractError("favored player out of range")

    def rule_of(self, player: int) -> PaymentRule:
        return self.rule if self.player_rules is None else self.player_rules[player]

    @property
    def anonymous(self) -> bool:
        return self.player_rules is None


@dataclass(frozen=True)
class Outcome:
    """Result of one pure profile. ``allocation`` is per-item owner or per-player unit counts."""

    allocation: np.ndarray
    payments: np.ndarray
    values: np.ndarray
    utilities: np.ndarray

    @property
    def welfare(self) -> float:
        return float(self.values.sum())

    def to_json(self) -> dict:
        return {
            "allocation": self.allocation.tolist(),
            "payments": [float(x) for x in self.payments],
            "values": [float(x) for x in self.values],
            "utilities": [float(x) for x in self.utilities],
        }


@dataclass
class BatchOutcome:
    """Vectorized outcomes: ``won`` is ``(draws, n, m)`` boolean, the rest ``(draws, n)``."""

    won: np.ndarray
    payments: np.ndarray
    values: np.ndarray

    @property
    def utilities(self) -> np.ndarray:
        return self.values - self.payments

    @property
    def welfare(self) -> np.ndarray:
        return self.values.sum(axis=1)


def _validate_bids(game: AuctionGame, bids: np.ndarray) -> np.ndarray:
    bids = np.asarray(bids, dtype=float)
    if bids.ndim == 2:
        bids = bids[None]
    if bids.shape[1:] != (game.n, game.m):
        raise ContractError(f"bids must be shaped (draws, {game.n}, {game.m}), got {bids.shape}")
    if np.any(bids < 0) or not np.all(np.isfinite(bids)):
        raise ContractError("bids must be finite and non-negative")
    if game.format == "multi-unit" and np.any(np.diff(bids, axis=2) > MONOTONE_TOL):
        raise ContractError("multi-unit bid vectors must be non-increasing")
    return bids


def _order_by_priority(values: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """Indices along the last axis sorted by (value desc, key desc)."""
    o = np.argsort(-keys, axis=-1, kind="stable")
    v_sorted = np.take_along_axis(values, o, axis=-1)
    o2 = np.argsort(-v_sorted, axis=-1, kind="stable")
    return np.take_along_axis(o, o2, axis=-1)


def item_winners(game: AuctionGame, bids: np.ndarray, draw_ids: np.ndarray | None = None) -> np.ndarray:
    """Winner per (draw, item) for bids shaped ``(draws, n, m)``."""
    if game.tie.policy == "favor":
        return kernels.winners(bids, game.tie.player)
    if game.tie.policy == "lexicographic":
        return kernels.winners(bids, -1)
    B = bids.shape[0]
    ids = np.arange(B) if draw_ids is None else np.asarray(draw_ids)
    b = np.moveaxis(bids, 1, 2)
    top = b.max(axis=2, keepdims=True)
    keys = game.tie.priority(game.n, (B, game.m), ids)
    keys = np.where(b == top, keys, -1.0)
    return np.argmax(keys, axis=2).astype(np.int32)


def item_ranks(game: AuctionGame, bids: np.ndarray, draw_ids: np.ndarray | None = None) -> np.ndarray:
    """Rank (1 = highest) of each bid on each item, ties ordered by the tie policy."""
    B = bids.shape[0]
    ids = np.arange(B) if draw_ids is None else np.asarray(draw_ids)
    b = np.moveaxis(bids, 1, 2)
    keys = game.tie.priority(game.n, (B, game.m), ids)
    order = _order_by_priority(b, np.asarray(keys, dtype=float))
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(1, game.n + 1)[None, None, :], axis=2)
    return np.moveaxis(ranks, 2, 1)


def evaluate_batch(game: AuctionGame, bids, draw_ids=None, validate: bool = True) -> BatchOutcome:
    """Outcomes for many pure profiles at once; ``draw_ids`` key seeded ties."""
    bids = _validate_bids(game, bids) if validate else np.asarray(bids, dtype=float)
    B, n, m = bids.shape
    if game.format == "multi-unit":
        return _evaluate_multi_unit(game, bids, draw_ids)
    win_idx = item_winners(game, bids, draw_ids)
    won = win_idx[:, None, :] == np.arange(n)[None, :, None]
    need_rank = any(game.rule_of(i).kind == "rank-based" for i in range(n))
    ranks = item_ranks(game, bids, draw_ids) if need_rank else None
    payments = np.zeros((B, n))
    for i in range(n):
        rule = game.rule_of(i)
        x = bids[:, i, :]
        if rule.kind == "first-price":
            payments[:, i] = np.where(won[:, i, :], x, 0.0).sum(axis=1)
        elif rule.kind == "all-pay":
            payments[:, i] = x.sum(axis=1)
        else:
            qw = rule.win_all(x)
            ql = rule.lose_all(x, None if ranks is None else ranks[:, i, :])
            payments[:, i] = np.where(won[:, i, :], qw, ql).sum(axis=1)
    values = np.column_stack([game.valuations[i].value_batch(won[:, i, :]) for i in range(n)])
    return BatchOutcome(won, payments, values)


def _evaluate_multi_unit(game: AuctionGame, bids: np.ndarray, draw_ids) -> BatchOutcome:
    B, n, m = bids.shape
    ids = np.arange(B) if draw_ids is None else np.asarray(draw_ids)
    flat = bids.reshape(B, n * m)
    owner = np.repeat(np.arange(n), m)
    if game.tie.policy == "seeded-random":
        key = counter_uniform(game.tie.seed, ids[:, None], np.arange(n * m)[None, :])
    else:
        pk = -np.arange(n, dtype=float)
        if game.tie.policy == "favor":
            pk[game.tie.player] = 1.0
        # within one player, earlier slots first so won bids stay a prefix
        key = np.broadcast_to(pk[owner] - np.tile(np.arange(m), n) * 1e-6 / max(m, 1), (B, n * m))
    order = _order_by_priority(flat, key)[:, :m]
    counts = np.zeros((B, n), dtype=np.int64)
    np.add.at(counts, (np.arange(B)[:, None], owner[order]), 1)
    won = np.arange(m)[None, None, :] < counts[:, :, None]
    payments = np.where(won, bids, 0.0).sum(axis=2)
    values = np.column_stack([game.valuations[i].value_units(counts[:, i]) for i in range(n)])
    return BatchOutcome(won, payments, values)


def evaluate(game: AuctionGame, bids, draw_id: int = 0) -> Outcome:
    """Allocation, payments and utilities of one pure profile (``n`` bid vectors)."""
    bids = np.asarray(bids, dtype=float)
    if bids.shape != (game.n, game.m):
        raise ContractError(f"bids must be shaped ({game.n}, {game.m}), got {bids.shape}")
    res = evaluate_batch(game, bids[None], np.array([draw_id]))
    won = res.won[0]
    if game.format == "multi-unit":
        allocation = won.sum(axis=1)
    else:
        allocation = np.argmax(won, axis=0)
    return Outcome(allocation, res.payments[0], res.values[0], res.utilities[0])


def beta_sorted(bids, m: int) -> np.ndarray:
    """The ``m`` winning bids of a discriminatory auction, ascending."""
    flat = np.asarray(bids, dtype=float).ravel()
    if flat.size < m:
        raise ContractError(f"need at least {m} bids, got {flat.size}")
    return np.sort(flat)[flat.size - m:]


def beta_sorted_batch(bids: np.ndarray, m: int) -> np.ndarray:
    """Row-wise :func:`beta_sorted` for bids shaped ``(draws, players, m)``."""
    flat = np.asarray(bids, dtype=float).reshape(bids.shape[0], -1)
    if flat.shape[1] < m:
        raise ContractError(f"need at least {m} bids per draw")
    return np.sort(flat, axis=1)[:, flat.shape[1] - m:]


def single_item_rule_payment(rule: PaymentRule, x, won):
    """Payment of a single-item bidder with bid ``x`` who wins iff ``won``."""
    x = np.asarray(x, dtype=float)
    return np.where(won, rule.win(0, x), rule.lose(0, x))
