"""Numerical certification of (approximate) mixed Nash equilibria.

Expected utilities of pure deviations are computed by one of three routes,
chosen automatically:

``closed-form``
    Grid games where the bidder values column projections, one opponent is
    a constant "dummy" bid ``beta`` that wins ties, and every other opponent
    bids a common quantile level on one slice of the grid. Per column the
    probability of winning nothing has an exact expression; see
    :class:`ColumnModel`.
``exact``
    Every opponent is driven by one uniform level per scenario. Splitting
    each level range where an opponent bid crosses the deviation bid leaves
    pieces on which the outcome for the deviator is constant, so a weighted
    sum of piece midpoints is exact.
``monte-carlo``
    Common random numbers across deviations, 99% normal confidence radius.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from poalab import distributions as D
from poalab import mechanisms as M
from poalab.errors import ContractError, UnsupportedError
from poalab.rng import resolve_seed, stream
from poalab.valuations import Additive, GridProjection

Z99 = 2.576
GL_NODES = 32
EXACT_CHUNK = 200_000
VECTOR_PIECES = 4096
VECTOR_ROWS = 400_000
MC_CHUNK = 50_000
DEFAULT_MC_SAMPLES = 1_000_000
_PIECE_MIN = 1e-14


@dataclass(frozen=True)
class UtilityEstimate:
    value: float
    method: str
    se: float = 0.0
    samples: int = 0

    @property
    def radius(self) -> float:
        return Z99 * self.se


# ---------------------------------------------------------------------------
# Deviation families
# ---------------------------------------------------------------------------


def bid_grid(lo: float, hi: float, points: int, extra=()) -> np.ndarray:
    """Sorted unique grid on ``[lo, hi]`` with ``extra`` points merged in exactly."""
    g = np.linspace(lo, hi, points)
    ex = np.asarray([e for e in extra if np.isfinite(e) and e >= 0], dtype=float)
    return np.unique(np.concatenate([g, ex]))


@dataclass(frozen=True)
class SingleItemBid:
    """Bid ``x`` on one item and ``base`` on the others."""

    grid: tuple
    items: tuple | None = None
    base: float = 0.0
    label: str = "single-item"

    def candidates(self, m: int) -> np.ndarray:
        items = range(m) if self.items is None else self.items
        g = np.asarray(self.grid)
        rows = []
        for j in items:
            r = np.full((g.size, m), self.base)
            r[:, j] = g
            rows.append(r)
        return np.vstack(rows)


@dataclass(frozen=True)
class UniformAllItems:
    """The same bid on every item (a flat vector in multi-unit games)."""

    grid: tuple
    label: str = "uniform"

    def candidates(self, m: int) -> np.ndarray:
        return np.repeat(np.asarray(self.grid, dtype=float)[:, None], m, axis=1)


@dataclass(frozen=True)
class SliceBid:
    """Bid ``x`` on the grid slice ``w[direction] = index``, ``base`` elsewhere."""

    shape: tuple
    direction: int
    grid: tuple
    index: int = 0
    base: float = 0.0
    label: str = "slice"

    def candidates(self, m: int) -> np.ndarray:
        n, d = self.shape
        if n**d != m:
            raise ContractError("slice shape does not match the item count")
        digit = (np.arange(m) // n**self.direction) % n
        g = np.asarray(self.grid)
        out = np.full((g.size, m), self.base)
        out[:, digit == self.index] = g[:, None]
        return out


@dataclass(frozen=True)
class PerColumnBid:
    """Independent choice per column of up to ``k`` bids above ``base``.

    ``k = 1`` uses ``grid``; patterns with two or more raised bids use
    ``coarse``. Without a grid structure the whole item set is one column
    and raised positions are drawn from ``positions`` (default: the first
    four items).
    """

    grid: tuple
    k: int = 2
    coarse: tuple = ()
    base: float = 0.0
    positions: tuple | None = None
    label: str = "per-column"

    def patterns(self, width: int, positions=None) -> np.ndarray:
        pos = list(range(width)) if positions is None else list(positions)
        rows = [np.full(width, self.base)]
        g = np.asarray(self.grid)
        c = np.asarray(self.coarse if self.coarse else self.grid[:: max(1, len(self.grid) // 16)])
        for p in pos:
            r = np.full((g.size, width), self.base)
            r[:, p] = g
            rows.append(r)
        for kk in range(2, min(self.k, len(pos)) + 1):
            vals = np.array(list(itertools.product(c, repeat=kk)))
            for combo in itertools.combinations(pos, kk):
                r = np.full((vals.shape[0], width), self.base)
                r[:, list(combo)] = vals
                rows.append(r)
        return np.vstack([np.atleast_2d(r) for r in rows])

    def candidates(self, m: int) -> np.ndarray:
        pos = self.positions if self.positions is not None else tuple(range(min(m, 4)))
        return self.patterns(m, pos)


@dataclass(frozen=True)
class MultiUnitVector:
    """Non-increasing unit-bid vectors with at most ``levels`` distinct values (``levels <= 3``).

    Flat vectors use ``grid``, two-level vectors ``pairs`` (default ``grid``)
    and three-level vectors ``coarse``.
    """

    grid: tuple
    levels: int = 3
    coarse: tuple = ()
    pairs: tuple = ()
    label: str = "multi-unit-vector"

    def candidates(self, m: int) -> np.ndarray:
        if not 1 <= self.levels <= 3:
            raise ContractError("multi-unit deviations use 1 to 3 levels")
        g = np.asarray(self.grid)
        c = np.asarray(self.coarse if self.coarse else self.grid[:: max(1, len(self.grid) // 24)])
        rows = [np.repeat(g[:, None], m, axis=1)]
        if self.levels >= 2 and m >= 2:
            pg = np.asarray(self.pairs) if self.pairs else g
            hi, lo = np.meshgrid(pg, pg, indexing="ij")
            keep = hi > lo
            pairs = np.column_stack([hi[keep], lo[keep]])
            for cut in range(1, m):
                r = np.empty((pairs.shape[0], m))
                r[:, :cut] = pairs[:, :1]
                r[:, cut:] = pairs[:, 1:]
                rows.append(r)
        if self.levels >= 3 and m >= 3:
            trip = np.array([t for t in itertools.combinations(np.sort(c)[::-1], 3)])
            for a in range(1, m - 1):
                for b in range(a + 1, m):
                    r = np.empty((trip.shape[0], m))
                    r[:, :a] = trip[:, :1]
                    r[:, a:b] = trip[:, 1:2]
                    r[:, b:] = trip[:, 2:]
                    rows.append(r)
        return np.vstack(rows)


@dataclass(frozen=True)
class FixedList:
    """Explicit deviation vectors."""

    bids: tuple
    label: str = "fixed"

    def candidates(self, m: int) -> np.ndarray:
        b = np.atleast_2d(np.asarray(self.bids, dtype=float))
        if b.shape[1] != m:
            raise ContractError("fixed deviations must have one bid per item")
        return b


# ---------------------------------------------------------------------------
# Utility engines
# ---------------------------------------------------------------------------


class ColumnModel:
    """Closed-form utilities for a grid bidder facing a dummy and slice bidders.

    ``u_j = G_j(b_j)`` is the level below which an opponent covering item
    ``j`` is outbid. Opponents whose slices run across the bidder's columns
    cover a whole column with probability ``1/n`` (``c_across`` of them);
    opponents sharing the bidder's direction cover exactly one item of each
    column, chosen uniformly (``c_along`` of them).
    """

    def __init__(self, valuation: GridProjection, rule: M.PaymentRule, beta: float,
                 cdf_of_item: tuple, c_across: int, c_along: int):
        self.val = valuation
        self.rule = rule
        self.beta = float(beta)
        self.n = valuation.n
        self.cols = valuation.columns()
        self.cdf_of_item = cdf_of_item
        self.c_across = c_across
        self.c_along = c_along
        groups: dict = {}
        for j, F in enumerate(cdf_of_item):
            groups.setdefault(id(F), (F, []))[1].append(j)
        self._groups = [(F, np.asarray(js)) for F, js in groups.values()]
        n = self.n
        assign = list(itertools.product(range(n), repeat=c_along))
        self._counts = np.stack([np.bincount(np.asarray(a, dtype=np.int64), minlength=n) for a in assign])

    @staticmethod
    def applies(game: M.AuctionGame, profile: D.MixedProfile, player: int):
        """Return a :class:`ColumnModel` when the structure matches, else ``None``."""
        val = game.valuations[player]
        if game.format != "item" or not game.anonymous or not isinstance(val, GridProjection):
            return None
        if game.rule.kind == "rank-based" or game.tie.policy != "favor" or game.tie.player == player:
            return None
        dummy = profile[game.tie.player]
        if not isinstance(dummy, D.Atom):
            return None
        base = np.asarray(dummy.bids, dtype=float)
        if np.ptp(base) != 0.0:
            return None
        beta = float(base[0])
        shape = (val.n, val.dims)
        per_item = None
        c_across = c_along = 0
        for k in range(game.n):
            if k in (player, game.tie.player):
                continue
            s = profile[k]
            if not isinstance(s, D.SliceUniform) or tuple(s.shape) != shape or s.base != beta:
                return None
            if per_item is None:
                per_item = s.per_item
            elif any(a is not b for a, b in zip(per_item, s.per_item)):
                return None
            if s.direction == val.direction:
                c_along += 1
            else:
                c_across += 1
        if per_item is None:
            return None
        for F in dict.fromkeys(per_item):
            if F.atoms or float(F(beta)) > 0.0 or F.support_lo < beta:
                return None
        return ColumnModel(val, game.rule, beta, per_item, c_across, c_along)

    def levels(self, bids: np.ndarray) -> np.ndarray:
        u = np.zeros_like(bids)
        for F, js in self._groups:
            u[:, js] = F(bids[:, js].ravel()).reshape(bids.shape[0], js.size)
        return u

    def column_utilities(self, bids: np.ndarray) -> np.ndarray:
        """Expected utility per column, shaped ``(draws, columns)``."""
        bids = np.atleast_2d(np.asarray(bids, dtype=float))
        n = self.n
        active = bids > self.beta
        u = np.where(active, self.levels(bids), 0.0)
        base_p = 1.0 - 1.0 / n + u / n
        p_win = np.where(active, base_p ** (self.c_across + self.c_along), 0.0)
        pay = np.where(True, self.rule.win_all(bids) * p_win + self.rule.lose_all(bids) * (1.0 - p_win), 0.0)
        uc = u[:, self.cols]
        ac = active[:, self.cols]
        key = np.where(ac, uc, -1.0)
        order = np.argsort(-key, axis=2, kind="stable")
        s = np.take_along_axis(key, order, axis=2)
        act_sorted = s >= 0.0
        h = np.where(act_sorted, (1.0 - 1.0 / n + np.clip(s, 0.0, 1.0) / n) ** self.c_across, 0.0)
        B, C, _ = s.shape
        h_ext = np.concatenate([np.ones((B, C, 1)), h, np.zeros((B, C, 1))], axis=2)
        mass = h_ext[:, :, :-1] - h_ext[:, :, 1:]
        q = np.zeros((B, C, n + 1))
        s_pos = np.clip(s, 0.0, 1.0)
        for cnt in self._counts:
            cs = cnt[order]
            factor = np.where(act_sorted, 1.0 - np.power(s_pos, cs), 1.0)
            q[:, :, 1:] += np.cumprod(factor, axis=2)
        q[:, :, 1:] /= self._counts.shape[0]
        q[:, :, 0] = 1.0
        p_none = np.sum(mass * q, axis=2)
        value = self.val.scale * (1.0 - p_none)
        return value - pay[:, self.cols].sum(axis=2)

    def utilities(self, bids: np.ndarray) -> np.ndarray:
        return self.column_utilities(bids).sum(axis=1)


def _opponent_rows(strategy, bid: np.ndarray, pooled: bool = False):
    """Piece midpoints and weights; ``pooled`` compares every unit bid against every own bid."""
    rows, weights = [], []
    for sc in strategy.scenarios():
        if pooled:
            lv = np.unique(np.concatenate([sc.levels_against(np.full(bid.size, b)) for b in np.unique(bid)]))
        else:
            lv = sc.levels_against(bid)
        lens = np.diff(lv)
        keep = lens > _PIECE_MIN
        if not np.any(keep):
            continue
        mids = 0.5 * (lv[:-1] + lv[1:])[keep]
        rows.append(sc.bids_at(mids))
        weights.append(sc.weight * lens[keep])
    return np.vstack(rows), np.concatenate(weights)


class ExactEngine:
    """Piecewise enumeration over opponents' uniform levels."""

    def __init__(self, game: M.AuctionGame, profile: D.MixedProfile, player: int):
        self.game = game
        self.player = player
        self.opponents = [(k, profile[k]) for k in range(game.n) if k != player]
        for _, s in self.opponents:
            s.scenarios()

    @staticmethod
    def applies(game, profile, player) -> bool:
        if game.tie.policy == "seeded-random":
            return False
        for k in range(game.n):
            if k == player:
                continue
            try:
                profile[k].scenarios()
            except UnsupportedError:
                return False
        return True

    def _level_table(self, sc: D.Scenario, bids: np.ndarray) -> np.ndarray:
        """Sorted crossing levels of one scenario for every deviation, shaped ``(D, L)``."""
        Dn = bids.shape[0]
        cols = [np.zeros(Dn), np.ones(Dn), np.full(Dn, float(sc.threshold))]
        if self.game.format == "multi-unit":
            for F in dict.fromkeys(sc.cdfs):
                for c in range(bids.shape[1]):
                    cols += [F.left_limit(bids[:, c]), F(bids[:, c])]
        else:
            for j, F in zip(sc.covered, sc.cdfs):
                cols += [F.left_limit(bids[:, j]), F(bids[:, j])]
        return np.sort(np.clip(np.column_stack(cols), 0.0, 1.0), axis=1)

    def _piece_count(self, sc: D.Scenario) -> int:
        per = len(dict.fromkeys(sc.cdfs)) * self.game.m if self.game.format == "multi-unit" else len(sc.covered)
        return 2 * per + 2

    def _vectorized(self, bids: np.ndarray) -> np.ndarray:
        g = self.game
        Dn = bids.shape[0]
        tables = []
        for _, s in self.opponents:
            rows, wts = [], []
            for sc in s.scenarios():
                lv = self._level_table(sc, bids)
                mids = 0.5 * (lv[:, :-1] + lv[:, 1:])
                P = mids.shape[1]
                rows.append(sc.bids_at(mids.ravel()).reshape(Dn, P, g.m))
                wts.append(sc.weight * np.diff(lv, axis=1))
            tables.append((np.concatenate(rows, axis=1), np.concatenate(wts, axis=1)))
        counts = [t[1].shape[1] for t in tables]
        idx = np.indices(counts).reshape(len(counts), -1)
        R = idx.shape[1]
        out = np.zeros(Dn)
        step = max(1, EXACT_CHUNK // R)
        for d0 in range(0, Dn, step):
            d1 = min(Dn, d0 + step)
            tens = np.empty((d1 - d0, R, g.n, g.m))
            w = np.ones((d1 - d0, R))
            for (k, _), (rows, wts), ix in zip(self.opponents, tables, idx):
                tens[:, :, k, :] = rows[d0:d1][:, ix]
                w *= wts[d0:d1][:, ix]
            tens[:, :, self.player, :] = bids[d0:d1, None, :]
            res = M.evaluate_batch(g, tens.reshape(-1, g.n, g.m), validate=False)
            u = (res.values[:, self.player] - res.payments[:, self.player]).reshape(d1 - d0, R)
            out[d0:d1] = np.sum(w * u, axis=1)
        return out

    def utilities(self, bids: np.ndarray) -> np.ndarray:
        bids = np.atleast_2d(np.asarray(bids, dtype=float))
        g = self.game
        product = math.prod(sum(self._piece_count(sc) for sc in s.scenarios()) for _, s in self.opponents)
        if bids.shape[0] > 1 and product <= VECTOR_PIECES:
            step = max(1, VECTOR_ROWS // product)
            return np.concatenate([self._vectorized(bids[i:i + step]) for i in range(0, bids.shape[0], step)])
        out = np.zeros(bids.shape[0])
        buf_b, buf_w, buf_id = [], [], []
        size = 0

        def flush():
            nonlocal buf_b, buf_w, buf_id, size
            if not buf_b:
                return
            tens = np.concatenate(buf_b)
            w = np.concatenate(buf_w)
            ids = np.concatenate(buf_id)
            res = M.evaluate_batch(g, tens, validate=False)
            u = res.values[:, self.player] - res.payments[:, self.player]
            np.add.at(out, ids, w * u)
            buf_b, buf_w, buf_id, size = [], [], [], 0

        for d, bid in enumerate(bids):
            parts = [_opponent_rows(s, bid, g.format == "multi-unit") for _, s in self.opponents]
            counts = [p[0].shape[0] for p in parts]
            idx = np.indices(counts).reshape(len(counts), -1)
            R = idx.shape[1]
            tens = np.empty((R, g.n, g.m))
            w = np.ones(R)
            for (k, _), (rows, wts), ix in zip(self.opponents, parts, idx):
                tens[:, k, :] = rows[ix]
                w *= wts[ix]
            tens[:, self.player, :] = bid
            buf_b.append(tens)
            buf_w.append(w)
            buf_id.append(np.full(R, d))
            size += R
            if size >= EXACT_CHUNK:
                flush()
        flush()
        return out


class MonteCarloEngine:
    """Common-random-number estimates; the opponent sample is shared by all deviations."""

    def __init__(self, game, profile, player, samples: int, seed: int):
        self.game, self.profile, self.player = game, profile, player
        self.samples = int(samples)
        self.seed = seed

    def _opponent_chunk(self, c: int, size: int) -> np.ndarray:
        g = self.game
        tens = np.zeros((size, g.n, g.m))
        for k in range(g.n):
            if k != self.player:
                tens[:, k, :] = self.profile[k].sample(stream(self.seed, "opponents", self.player, k, c), size)
        return tens

    def _chunks(self):
        c, left = 0, self.samples
        while left > 0:
            size = min(MC_CHUNK, left)
            yield c, size
            c += 1
            left -= size

    def utilities(self, bids: np.ndarray):
        bids = np.atleast_2d(np.asarray(bids, dtype=float))
        s1 = np.zeros(bids.shape[0])
        s2 = np.zeros(bids.shape[0])
        for c, size in self._chunks():
            tens = self._opponent_chunk(c, size)
            ids = np.arange(size) + c * MC_CHUNK
            for d, bid in enumerate(bids):
                tens[:, self.player, :] = bid
                res = M.evaluate_batch(self.game, tens, ids, validate=False)
                u = res.values[:, self.player] - res.payments[:, self.player]
                s1[d] += u.sum()
                s2[d] += (u * u).sum()
        mean = s1 / self.samples
        var = np.maximum(s2 / self.samples - mean**2, 0.0)
        return mean, np.sqrt(var / self.samples)

    def as_profile(self):
        s1 = s2 = 0.0
        own = self.profile[self.player]
        for c, size in self._chunks():
            tens = self._opponent_chunk(c, size)
            tens[:, self.player, :] = own.sample(stream(self.seed, "own", self.player, c), size)
            res = M.evaluate_batch(self.game, tens, np.arange(size) + c * MC_CHUNK, validate=False)
            u = res.values[:, self.player] - res.payments[:, self.player]
            s1 += u.sum()
            s2 += (u * u).sum()
        mean = s1 / self.samples
        return mean, math.sqrt(max(s2 / self.samples - mean**2, 0.0) / self.samples)


class Evaluator:
    """Expected utility of one player's pure bids against the others' mixed strategies."""

    def __init__(self, game: M.AuctionGame, profile: D.MixedProfile, player: int, method: str = "auto",
                 samples: int = DEFAULT_MC_SAMPLES, seed: int | None = None):
        if len(profile) != game.n:
            raise ContractError("profile length must equal the number of players")
        if not (0 <= player < game.n):
            raise ContractError("player index out of range")
        if any(isinstance(profile[k], D.BayesianBid) for k in range(game.n) if k == player):
            raise UnsupportedError("use bayesian_utility for a player whose bid depends on a private value")
        self.game, self.profile, self.player = game, profile, player
        self.seed = resolve_seed(seed)
        self.samples = samples
        self.column = None
        if method in ("auto", "closed-form"):
            self.column = ColumnModel.applies(game, profile, player)
            if self.column is None and method == "closed-form":
                raise UnsupportedError("no closed form for this profile structure")
        if self.column is not None:
            self.method = "closed-form"
        elif method in ("auto", "exact") and ExactEngine.applies(game, profile, player):
            self.method = "exact"
            self.exact = ExactEngine(game, profile, player)
        elif method in ("auto", "monte-carlo"):
            self.method = "monte-carlo"
        else:
            raise UnsupportedError(f"method {method!r} is not available for this profile")
        if self.method == "monte-carlo":
            self.mc = MonteCarloEngine(game, profile, player, samples, self.seed)

    def batch(self, bids):
        """Utilities and standard errors for each row of ``bids``."""
        bids = np.atleast_2d(np.asarray(bids, dtype=float))
        if bids.shape[1] != self.game.m:
            raise ContractError("deviation vectors need one bid per item")
        if np.any(bids < 0):
            raise ContractError("bids must be non-negative")
        if self.game.format == "multi-unit" and np.any(np.diff(bids, axis=1) > M.MONOTONE_TOL):
            raise ContractError("multi-unit bid vectors must be non-increasing")
        if self.method == "closed-form":
            return self.column.utilities(bids), np.zeros(bids.shape[0])
        if self.method == "exact":
            return self.exact.utilities(bids), np.zeros(bids.shape[0])
        return self.mc.utilities(bids)

    def utility(self, bid) -> UtilityEstimate:
        val, se = self.batch(np.asarray(bid, dtype=float)[None, :])
        return UtilityEstimate(float(val[0]), self.method, float(se[0]), self.samples if self.method == "monte-carlo" else 0)

    def _own_level_breaks(self, sc: D.Scenario) -> np.ndarray:
        lv = {0.0, 1.0, float(sc.threshold)}
        points = set()
        for k in range(self.game.n):
            if k == self.player:
                continue
            s = self.profile[k]
            for F in s.cdfs():
                points.update(p for p, _ in F.atoms)
            try:
                for osc in s.scenarios():
                    points.update(np.unique(osc.base).tolist())
            except UnsupportedError:
                pass
        for F in dict.fromkeys(sc.cdfs):
            for r0, r1, _ in F.level_segments():
                lv.update((r0, r1))
            for p in points:
                lv.add(float(F.left_limit(p)))
                lv.add(float(F(p)))
        return np.unique(np.clip(np.fromiter(lv, float), 0.0, 1.0))

    def as_profile(self) -> UtilityEstimate:
        """Expected utility of the player's own mixed strategy."""
        own = self.profile[self.player]
        if self.method == "monte-carlo":
            val, se = self.mc.as_profile()
            return UtilityEstimate(val, self.method, se, self.samples)
        try:
            scenarios = own.scenarios()
        except UnsupportedError:
            mc = MonteCarloEngine(self.game, self.profile, self.player, self.samples, self.seed)
            val, se = mc.as_profile()
            return UtilityEstimate(val, "monte-carlo", se, self.samples)
        nodes, wts = np.polynomial.legendre.leggauss(GL_NODES)
        total = 0.0
        for sc in scenarios:
            br = self._own_level_breaks(sc)
            rhos, ws = [], []
            for a, b in zip(br[:-1], br[1:]):
                if b - a <= _PIECE_MIN:
                    continue
                rhos.append(0.5 * (b - a) * nodes + 0.5 * (a + b))
                ws.append(0.5 * (b - a) * wts)
            rho = np.concatenate(rhos)
            w = np.concatenate(ws)
            vals, _ = self.batch(sc.bids_at(rho))
            total += sc.weight * float(np.dot(w, vals))
        return UtilityEstimate(total, self.method)


def expected_utility(game, profile, player, bid="as-profile", method="auto", samples=DEFAULT_MC_SAMPLES,
                     seed=None) -> UtilityEstimate:
    """Expected utility of ``player`` bidding ``bid`` (or its own strategy) against the profile."""
    ev = Evaluator(game, profile, player, method, samples, seed)
    if isinstance(bid, str):
        if bid != "as-profile":
            raise ContractError("bid must be a vector or 'as-profile'")
        return ev.as_profile()
    return ev.utility(bid)


# ---------------------------------------------------------------------------
# Regret and reports
# ---------------------------------------------------------------------------


@dataclass
class RegretResult:
    regret: float
    deviation: np.ndarray
    deviation_utility: float
    equilibrium_utility: float
    method: str
    radius: float = 0.0
    family: str = ""


def _best_per_column(ev: Evaluator, fam: PerColumnBid):
    cm = ev.column
    n = cm.n
    pats = fam.patterns(n)
    m = ev.game.m
    cols = cm.cols
    bids = np.full((pats.shape[0], m), fam.base)
    bids[:, cols.reshape(-1)] = np.tile(pats, (1, cols.shape[0]))
    per_col = cm.column_utilities(bids)
    best = np.argmax(per_col, axis=0)
    dev = np.full(m, fam.base)
    for c, p in enumerate(best):
        dev[cols[c]] = pats[p]
    total = float(per_col[best, np.arange(cols.shape[0])].sum())
    return dev, total


def best_response_regret(game, profile, player, family, method="auto", samples=DEFAULT_MC_SAMPLES, seed=None,
                         evaluator: Evaluator | None = None, equilibrium: UtilityEstimate | None = None) -> RegretResult:
    """Best deviation within ``family`` and its regret against the profile's own utility."""
    ev = evaluator or Evaluator(game, profile, player, method, samples, seed)
    eq = equilibrium or ev.as_profile()
    if isinstance(family, PerColumnBid) and ev.column is not None:
        dev, val = _best_per_column(ev, family)
        se = 0.0
    else:
        cands = family.candidates(game.m)
        if cands.size == 0:
            raise ContractError("deviation family is empty")
        vals, ses = ev.batch(cands)
        k = int(np.argmax(vals))
        dev, val, se = cands[k], float(vals[k]), float(ses[k])
    radius = Z99 * math.hypot(se, eq.se)
    return RegretResult(max(0.0, val - eq.value), np.asarray(dev), val, eq.value, ev.method, radius,
                        getattr(family, "label", type(family).__name__))


@dataclass
class PlayerReport:
    player: int
    equilibrium_utility: float
    deviation_utility: float
    regret: float
    deviation: list
    family: str
    method: str
    radius: float = 0.0
    samples: int = 0
    verdict: str = "PASS"
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "player": self.player,
            "equilibrium_utility": _num(self.equilibrium_utility),
            "deviation_utility": _num(self.deviation_utility),
            "regret": _num(self.regret),
            "best_deviation": [_num(x) for x in self.deviation],
            "family": self.family,
            "method": self.method,
            "ci99_radius": _num(self.radius),
            "samples": self.samples,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


def _num(x):
    x = float(x)
    return round(x, 12) if math.isfinite(x) else str(x)


@dataclass
class EquilibriumReport:
    eps: float
    players: list
    verdict: str
    notes: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    @property
    def certified_eps(self) -> float:
        return max((p.regret + p.radius for p in self.players), default=0.0)

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "certified_eps": _num(self.certified_eps),
            "verdict": self.verdict,
            "players": [p.to_json() for p in self.players],
            "notes": list(self.notes),
            "checks": self.checks,
        }

    def summary(self) -> str:
        lines = [f"{'player':>6} {'eq utility':>14} {'best dev':>14} {'regret':>12} {'method':>12}  family"]
        for p in self.players:
            lines.append(f"{p.player:>6} {p.equilibrium_utility:>14.8f} {p.deviation_utility:>14.8f} "
                         f"{p.regret:>12.3e} {p.method:>12}  {p.family}")
        lines.append(f"verdict: {self.verdict} at eps={self.eps:g} (certified {self.certified_eps:.3e})")
        return "\n".join(lines)


def _verdict(regret: float, radius: float, eps: float) -> str:
    if regret + radius <= eps:
        return "PASS"
    if regret - radius > eps:
        return "FAIL"
    return "INDETERMINATE"


def _combine(verdicts) -> str:
    if "FAIL" in verdicts:
        return "FAIL"
    if "INDETERMINATE" in verdicts:
        return "INDETERMINATE"
    return "PASS"


def verify_equilibrium(game, profile, families: dict, eps: float, method="auto", samples=DEFAULT_MC_SAMPLES,
                       seed=None) -> EquilibriumReport:
    """Check every listed player's regret over its deviation families against ``eps``."""
    if any(isinstance(s, D.BayesianBid) for s in profile.strategies):
        raise UnsupportedError("Bayesian profiles are verified by verify_bayesian")
    reports = []
    for player in sorted(families):
        fams = families[player]
        if not fams:
            raise ContractError(f"player {player} has no deviation families")
        ev = Evaluator(game, profile, player, method, samples, seed)
        eq = ev.as_profile()
        best = None
        for fam in fams:
            res = best_response_regret(game, profile, player, fam, evaluator=ev, equilibrium=eq)
            if best is None or res.deviation_utility > best.deviation_utility:
                best = res
        reports.append(PlayerReport(
            player, eq.value, best.deviation_utility, best.regret, list(best.deviation), best.family, best.method,
            best.radius, eq.samples, _verdict(best.regret, best.radius, eps)))
    return EquilibriumReport(eps, reports, _combine([r.verdict for r in reports]))


# ---------------------------------------------------------------------------
# Bayesian single-item check
# ---------------------------------------------------------------------------


def bayesian_utility(game, profile, player, value: float, bids) -> np.ndarray:
    """Utilities of a bidder with private ``value`` for each bid in ``bids`` (single item)."""
    if game.format != "item" or game.m != 1 or game.n != 2:
        raise UnsupportedError("Bayesian evaluation covers the two-bidder single-item case only")
    vals = list(game.valuations)
    vals[player] = Additive(1, (float(value),))
    g = dataclasses.replace(game, valuations=tuple(vals))
    others = [profile[k] for k in range(game.n) if k != player]
    if any(isinstance(s, D.BayesianBid) for s in others) and isinstance(profile[player], D.BayesianBid):
        raise UnsupportedError("at most one bidder may have a private value")
    prof = profile.replace(player, D.Atom((0.0,)))
    return ExactEngine(g, prof, player).utilities(np.asarray(bids, dtype=float).reshape(-1, 1))


def verify_bayesian(game, profile, eps: float, grid_points: int = 4096, sampled_values: int = 20, seed=None,
                    constant_tol: float = 1e-4, extra_bids=()) -> EquilibriumReport:
    """Check a two-bidder single-item profile where one bidder's bid depends on its private value.

    Recorded in ``checks``:

    * ``support_constant``: the known-value bidder's utility varies by at
      most ``constant_tol`` across its own support;
    * ``best_response_bids``: at each sampled private value the best grid
      bid is within one grid step of the prescribed bid;
    * ``full_range_regret``: the known-value bidder's regret over the whole
      grid ``[0, value]`` is at most ``eps``.

    The verdict requires all three.
    """
    b_idx = [k for k in range(game.n) if isinstance(profile[k], D.BayesianBid)]
    if len(b_idx) != 1 or game.m != 1 or game.n != 2:
        raise UnsupportedError("Bayesian verification covers one private-value bidder on one item")
    bp = b_idx[0]
    kp = 1 - bp
    seed = resolve_seed(seed)
    bstrat: D.BayesianBid = profile[bp]
    own_cdf = profile[kp].cdfs()[0]
    lo, hi = own_cdf.support_lo, own_cdf.support_hi
    known_value = game.valuations[kp].value([0])
    grid = bid_grid(0.0, known_value, grid_points, (1e-9, lo, hi, *extra_bids))
    ev = Evaluator(game, profile, kp, "exact")
    u_grid, _ = ev.batch(grid[:, None])
    eq = ev.as_profile().value
    k = int(np.argmax(u_grid))
    on_support = (grid >= lo) & (grid <= hi)
    spread = float(np.ptp(u_grid[on_support]))
    reg0 = max(0.0, float(u_grid[k]) - eq)
    checks = {
        "support_constant": {"spread": _num(spread), "tol": constant_tol, "ok": spread <= constant_tol},
        "full_range_regret": {"regret": _num(reg0), "best_bid": _num(grid[k]), "eps": eps, "ok": reg0 <= eps},
    }
    v0 = "PASS" if checks["support_constant"]["ok"] and reg0 <= eps else "FAIL"
    reports = [PlayerReport(kp, eq, float(u_grid[k]), reg0, [float(grid[k])], "single-item", "exact", verdict=v0,
                            notes=[f"utility spread on [{lo:.6f}, {hi:.6f}] is {spread:.3e}"])]
    values = bstrat.value_cdf.sample(stream(seed, "bayesian-values"), sampled_values)
    worst = (0.0, 0.0, 0.0, 0.0)
    gap_ok, max_gap = True, 0.0
    for v2 in np.sort(values):
        v2 = float(v2)
        prescribed = float(bstrat.bid_map(np.array([v2]))[0])
        vgrid = bid_grid(0.0, max(v2, 1e-12), grid_points, (prescribed,))
        u = bayesian_utility(game, profile, bp, v2, vgrid)
        u_eq = float(bayesian_utility(game, profile, bp, v2, [prescribed])[0])
        j = int(np.argmax(u))
        reg = max(0.0, float(u[j]) - u_eq)
        if u[j] > 0.0:
            gap = abs(float(vgrid[j]) - prescribed)
            max_gap = max(max_gap, gap)
            gap_ok &= gap <= float(np.max(np.diff(vgrid))) + 1e-12
        if reg >= worst[0]:
            worst = (reg, float(u[j]), u_eq, float(vgrid[j]))
    checks["best_response_bids"] = {"values": int(sampled_values), "max_gap": _num(max_gap), "ok": bool(gap_ok)}
    v1 = "PASS" if worst[0] <= eps and gap_ok else "FAIL"
    reports.append(PlayerReport(bp, worst[2], worst[1], worst[0], [worst[3]], "sampled-values", "exact",
                                samples=int(sampled_values), verdict=v1,
                                notes=[f"max |best grid bid - prescribed bid| = {max_gap:.3e}"]))
    report = EquilibriumReport(eps, sorted(reports, key=lambda r: r.player), _combine([v0, v1]))
    report.checks = checks
    return report


# ---------------------------------------------------------------------------
# Default deviation families per construction
# ---------------------------------------------------------------------------


def _extras(inst, base: float = 0.0):
    ex = {0.0, base, base + 1e-9}
    for lo, hi in inst.supports.values():
        ex.update((lo, hi, lo + 1e-9))
    ex.update(np.unique(np.asarray(inst.thresholds, dtype=float)).tolist() if len(inst.thresholds) else [])
    return sorted(ex)


def default_families(inst, points: int = 257, coarse: int = 17) -> dict:
    """Deviation families matching each construction's case analysis."""
    name = inst.name
    game = inst.game
    if game is None:
        raise UnsupportedError("closed-form-only instances have no game to verify")
    top = max((hi for _, hi in inst.supports.values()), default=1.0)
    fams: dict = {}
    if name in ("grid", "grid-general", "grid-d"):
        n = game.n - 1
        val0 = game.valuations[0]
        base = float(inst.profile[n].bids[0])
        hi = base + 1.25 * (top - base)
        grid = tuple(bid_grid(base, hi, points, _extras(inst, base)))
        cgrid = tuple(bid_grid(base, top, coarse, [base + 1e-9, top]))
        k = min(3, n)
        for i in range(n):
            d = game.valuations[i].direction
            fams[i] = [
                SliceBid((val0.n, val0.dims), d, grid, base=base),
                PerColumnBid(grid, k=k, coarse=cgrid, base=base),
                UniformAllItems(grid),
            ]
        small = tuple(bid_grid(0.0, hi, 9, [base, base + 1e-9]))
        fams[n] = [UniformAllItems(small), SingleItemBid(small, items=(0,), base=base)]
    elif name in ("subadditive", "subadditive-general"):
        m = game.m
        grid = tuple(bid_grid(0.0, 1.25 * top, points, _extras(inst)))
        cgrid = tuple(bid_grid(0.0, top, coarse, [1e-9, top]))
        fams[0] = [SingleItemBid(grid), PerColumnBid(grid, k=2, coarse=cgrid), UniformAllItems(grid)]
        fams[1] = [UniformAllItems(grid), SingleItemBid(grid, items=(0,)),
                   FixedList(tuple(map(tuple, _ordered_vectors(m, cgrid, seed=m))))]
    elif name in ("discriminatory-submodular", "discriminatory-subadditive"):
        grid = tuple(bid_grid(0.0, 1.25 * top, points, _extras(inst)))
        cgrid = tuple(bid_grid(0.0, 1.25 * top, coarse, [1e-9, top]))
        pgrid = grid if game.m <= 4 else tuple(bid_grid(0.0, 1.25 * top, 4 * coarse, _extras(inst)))
        for i in range(2):
            fams[i] = [MultiUnitVector(grid, 3, cgrid, pgrid)]
    elif name == "anonymity":
        grid = tuple(bid_grid(0.0, 2.0, 4096, [1.0]))
        fams = {0: [SingleItemBid(grid)], 1: [SingleItemBid(grid)]}
    else:
        raise UnsupportedError(f"no default families for {name!r}")
    return fams


def _ordered_vectors(m: int, grid, seed: int, count: int = 400) -> np.ndarray:
    """Random non-increasing vectors plus 'bid y on the first k items' patterns."""
    g = np.asarray(grid)
    rng = stream(seed, "ordered-vectors")
    rand = -np.sort(-rng.choice(g, size=(count, m)), axis=1)
    prefix = []
    for kk in range(1, m):
        for y in g:
            r = np.zeros(m)
            r[:kk] = y
            prefix.append(r)
    return np.vstack([rand, np.array(prefix)])


def verify_instance(inst, eps: float = 2e-3, points: int = 257, coarse: int = 17, method: str = "auto",
                    samples: int = DEFAULT_MC_SAMPLES, seed=None) -> EquilibriumReport:
    """Verify a construction with its default deviation families."""
    if inst.name == "bayesian":
        return verify_bayesian(inst.game, inst.profile, eps, seed=seed)
    fams = default_families(inst, points, coarse)
    return verify_equilibrium(inst.game, inst.profile, fams, eps, method, samples, seed)
