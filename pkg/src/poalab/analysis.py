"""Welfare and price-of-anarchy numbers, plus the theta-dependent guarantee and its single-item check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from poalab import constructions as C
from poalab import distributions as D
from poalab import mechanisms as M
from poalab.errors import CapacityError, ContractError, UnsupportedError
from poalab.rng import resolve_seed, stream
from poalab.valuations import MultiUnit, full_table

MAX_BRUTE_PLAYERS = 4
MAX_BRUTE_ITEMS = 12
MC_CHUNK = 20_000
LEMMA_TOL = 1e-6
LAMBDA_SERIES_RADIUS = 1e-4
LOWER_BOUND_TAG = "LOWER-BOUND-ON-POA"
EXACT_TAG = "EXACT"


# ---------------------------------------------------------------------------
# Optimal welfare
# ---------------------------------------------------------------------------


def _brute_item_welfare(game: M.AuctionGame):
    m = game.m
    masks = np.arange(1 << m, dtype=np.int64)
    full = (1 << m) - 1
    tables = [full_table(v) for v in game.valuations]
    best = tables[0].copy()
    choices = []
    for t in tables[1:]:
        new = np.full_like(best, -np.inf)
        pick = np.zeros(masks.size, dtype=np.int64)
        for T in range(1 << m):
            sup = masks[(masks & T) == T]
            cand = t[T] + best[sup ^ T]
            better = cand > new[sup]
            new[sup[better]] = cand[better]
            pick[sup[better]] = T
        choices.append(pick)
        best = new
    alloc = np.full(m, -1, dtype=np.int64)
    S = full
    for i in range(game.n - 1, 0, -1):
        T = int(choices[i - 1][S])
        alloc[[j for j in range(m) if T >> j & 1]] = i
        S ^= T
    alloc[[j for j in range(m) if S >> j & 1]] = 0
    return float(best[full]), alloc


def _multi_unit_welfare(game: M.AuctionGame):
    m = game.m
    best = np.array([game.valuations[0].value_units(u) for u in range(m + 1)], dtype=float)
    picks = []
    for v in game.valuations[1:]:
        own = v.value_units(np.arange(m + 1))
        new = np.full(m + 1, -np.inf)
        pick = np.zeros(m + 1, dtype=np.int64)
        for u in range(m + 1):
            cand = own[: u + 1] + best[u::-1]
            k = int(np.argmax(cand))
            new[u], pick[u] = cand[k], k
        picks.append(pick)
        best = new
    units = np.zeros(game.n, dtype=np.int64)
    u = m
    for i in range(game.n - 1, 0, -1):
        units[i] = picks[i - 1][u]
        u -= units[i]
    units[0] = u
    return float(best[m]), units


def welfare_of(game: M.AuctionGame, allocation) -> float:
    """Welfare of an allocation (owner per item, or units per player)."""
    alloc = np.asarray(allocation)
    if game.format == "multi-unit":
        if alloc.shape != (game.n,) or alloc.sum() > game.m or np.any(alloc < 0):
            raise ContractError("multi-unit allocations give a unit count per player")
        return float(sum(v.value_units(int(k)) for v, k in zip(game.valuations, alloc)))
    if alloc.shape != (game.m,):
        raise ContractError("item allocations give one owner per item")
    return float(sum(game.valuations[i].value(np.flatnonzero(alloc == i)) for i in range(game.n)))


def _known_optimum(inst: C.ConstructedInstance):
    name, game = inst.name, inst.game
    if name in ("grid", "grid-general", "grid-d"):
        n = game.n - 1
        owner = C.grid_optimal_allocation(n, game.valuations[0].dims)
        return float(inst.optimal_sw.value), np.asarray(owner, dtype=np.int64)
    if name in ("subadditive", "subadditive-general"):
        return float(inst.optimal_sw.value), np.ones(game.m, dtype=np.int64)
    return None


def optimal_welfare(target):
    """Maximum welfare and a maximizing allocation.

    ``target`` is an :class:`~poalab.mechanisms.AuctionGame` or a constructed
    instance. Item games are solved exactly over bundle partitions when
    ``n <= 4`` and ``m <= 12``; multi-unit games by a dynamic program over
    unit counts. Larger constructions fall back to their known optimal
    allocation, whose welfare is recomputed from the valuations.
    """
    inst = target if isinstance(target, C.ConstructedInstance) else None
    game = inst.game if inst is not None else target
    if game is None:
        return float(inst.optimal_sw.value), None
    if game.format == "multi-unit":
        if not all(isinstance(v, MultiUnit) for v in game.valuations):
            raise ContractError("multi-unit games need unit-count valuations")
        return _multi_unit_welfare(game)
    if game.n <= MAX_BRUTE_PLAYERS and game.m <= MAX_BRUTE_ITEMS:
        return _brute_item_welfare(game)
    known = _known_optimum(inst) if inst is not None else None
    if known is None:
        raise CapacityError(f"no exact optimum for {game.n} players and {game.m} items without a known allocation")
    value, alloc = known
    got = welfare_of(game, alloc)
    if abs(got - value) > 1e-9 * max(1.0, value):
        raise ContractError(f"known allocation yields {got}, expected {value}")
    return got, alloc


# ---------------------------------------------------------------------------
# Expected welfare and PoA
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WelfareEstimate:
    value: float
    method: str
    se: float = 0.0
    samples: int = 0
    is_bound: bool = False
    fallback: bool = False

    @property
    def radius(self) -> float:
        return 2.576 * self.se

    def to_json(self) -> dict:
        return {"value": self.value, "method": self.method, "se": self.se, "samples": self.samples,
                "is_bound": self.is_bound, "fallback": self.fallback}


def _quadrature_welfare(inst: C.ConstructedInstance) -> float | None:
    if inst.name == "discriminatory-submodular":
        return C.discriminatory_submodular_welfare(inst.params["v"])
    if inst.name == "bayesian":
        return C.bayesian_welfare()
    return None


def _mc_welfare(game: M.AuctionGame, profile: D.MixedProfile, samples: int, seed: int):
    s1 = s2 = 0.0
    done = 0
    c = 0
    while done < samples:
        size = min(MC_CHUNK, samples - done)
        bids = np.empty((size, game.n, game.m))
        realized = {}
        for k, s in enumerate(profile.strategies):
            rs = stream(seed, "welfare", k, c)
            if isinstance(s, D.BayesianBid):
                realized[k], bids[:, k, :] = s.sample_values(rs, size)
            else:
                bids[:, k, :] = s.sample(rs, size)
        ids = np.arange(size) + done
        res = M.evaluate_batch(game, bids, ids, validate=False)
        vals = res.values.copy()
        for k, v in realized.items():
            vals[:, k] = res.won[:, k, 0] * v
        w = vals.sum(axis=1)
        s1 += float(w.sum())
        s2 += float((w * w).sum())
        done += size
        c += 1
    mean = s1 / samples
    return mean, math.sqrt(max(s2 / samples - mean * mean, 0.0) / samples)


def expected_welfare(target, profile=None, method: str = "closed-form", samples: int = 10**6,
                     seed=None) -> WelfareEstimate:
    """Expected welfare by ``closed-form``, ``quadrature`` or ``mc``.

    Closed forms and quadratures come from the construction; requesting one
    for a structure that has none falls back to Monte Carlo with
    ``fallback=True``.
    """
    inst = target if isinstance(target, C.ConstructedInstance) else None
    if method not in ("closed-form", "quadrature", "mc"):
        raise ContractError(f"unknown welfare method {method!r}")
    if inst is not None:
        game, profile = inst.game, inst.profile
        pred = inst.expected_sw
        if method == "closed-form" and pred.source in ("closed-form", "bound"):
            return WelfareEstimate(float(pred.value), "closed-form", is_bound=pred.source == "bound")
        if method == "quadrature":
            q = _quadrature_welfare(inst)
            if q is not None:
                return WelfareEstimate(float(q), "quadrature")
    else:
        game = target
        if profile is None:
            raise ContractError("a game needs a profile")
    if game is None:
        raise UnsupportedError("closed-form-only instance has no game to simulate")
    val, se = _mc_welfare(game, profile, int(samples), resolve_seed(seed))
    return WelfareEstimate(val, "mc", se, int(samples), fallback=method != "mc")


@dataclass
class PoAResult:
    expected_sw: WelfareEstimate
    optimal_sw: float
    ratio: float
    limit: float | None = None
    tag: str = EXACT_TAG
    mc: WelfareEstimate | None = None
    notes: list = field(default_factory=list)

    @property
    def is_lower_bound(self) -> bool:
        return self.tag == LOWER_BOUND_TAG

    def to_json(self) -> dict:
        return {
            "expected_sw": self.expected_sw.to_json(),
            "optimal_sw": self.optimal_sw,
            "ratio": self.ratio,
            "limit": self.limit,
            "tag": self.tag,
            "mc": None if self.mc is None else self.mc.to_json(),
            "notes": list(self.notes),
        }


def poa(target, profile=None, method: str = "closed-form", samples: int = 10**6, seed=None,
        attach_mc: bool = False) -> PoAResult:
    """OPT / E[SW]; bound-based welfare values give a ratio tagged as a lower bound on the PoA."""
    inst = target if isinstance(target, C.ConstructedInstance) else None
    if inst is not None and method == "closed-form" and inst.expected_sw.source == "quadrature":
        method = "quadrature"
    sw = expected_welfare(target, profile, method, samples, seed)
    opt, _ = optimal_welfare(target)
    if sw.value <= 0:
        raise ContractError("expected welfare must be positive")
    res = PoAResult(sw, opt, opt / sw.value, None if inst is None else inst.limit,
                    LOWER_BOUND_TAG if sw.is_bound else EXACT_TAG)
    if attach_mc and inst is not None and inst.game is not None:
        res.mc = expected_welfare(inst, method="mc", samples=samples, seed=seed)
    return res


# ---------------------------------------------------------------------------
# Welfare guarantee as a function of theta
# ---------------------------------------------------------------------------


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (0.0 <= theta <= 1.0) or math.isnan(theta):
        raise ContractError("theta must lie in [0, 1]")
    return theta


def lambda_theta_formula(theta: float) -> float:
    """Direct evaluation with ``expm1`` to limit cancellation; undefined at 1."""
    t = _check_theta(theta) - 1.0
    if t == 0.0:
        raise ContractError("the direct formula is singular at theta = 1")
    return (t + t * t - math.expm1(t)) / (t * t)


def lambda_theta_series(theta: float) -> float:
    """Fourth-order expansion around ``theta = 1``."""
    t = _check_theta(theta) - 1.0
    return 0.5 - t / 6.0 - t * t / 24.0 - t**3 / 120.0 - t**4 / 720.0


def lambda_theta(theta: float) -> float:
    """Welfare fraction guaranteed at payment ratio ``theta``; its reciprocal bounds the PoA."""
    t = _check_theta(theta) - 1.0
    if abs(t) < LAMBDA_SERIES_RADIUS:
        return lambda_theta_series(theta)
    return lambda_theta_formula(theta)


def poa_bound(theta: float) -> float:
    return 1.0 / lambda_theta(theta)


# ---------------------------------------------------------------------------
# Single-item lemma certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LemmaCertificate:
    holds: bool
    margin: float
    best_bid: float
    best_value: float
    expected_win_payment: float
    theta: float
    lam: float
    v: float


def certify_lemma_submodular_gen(rule: M.PaymentRule, F: D.Cdf, v: float, grid: int = 4096,
                                 theta: float | None = None, tol: float = LEMMA_TOL) -> LemmaCertificate:
    """Check ``max_a [F(a)(v - qw(a) + ql(a)) - ql(a)] + E[qw(p)] >= lambda(theta) v`` for ``p ~ F``."""
    if not v > 0:
        raise ContractError("v must be positive")
    hi = max(float(v), F.support_hi)
    th = M.theta(rule, hi=hi, m=1) if theta is None else float(theta)
    a, A = D.argmax_bid(F, float(v), rule, 0, grid, hi=hi)
    eq = F.expect(lambda x: float(rule.win(0, np.array([x]))[0]))
    lam = lambda_theta(th)
    margin = A + eq - lam * v
    return LemmaCertificate(margin >= -tol, float(margin), float(a), float(A), float(eq), float(th), float(lam),
                            float(v))


# ---------------------------------------------------------------------------
# Multi-unit winning-bid distributions
# ---------------------------------------------------------------------------


@dataclass
class MultiUnitCdfs:
    points: np.ndarray
    F: np.ndarray
    G: np.ndarray
    F_av: np.ndarray
    identity_residual: float
    identity_tolerance: float
    identity_ok: bool
    beta_means: np.ndarray
    mean_av: float
    mean_av_from_cdf: float
    samples: int


def multiunit_cdfs(game: M.AuctionGame, profile: D.MixedProfile, player: int, units: int,
                   samples: int = 10**5, seed=None, points=None) -> MultiUnitCdfs:
    """Empirical laws of the opponents' winning bids ``beta_1 <= ... <= beta_m``.

    ``F[j]`` is the CDF of ``beta_{j+1}``, ``G[j] = F[j] - F[j+1]`` (last row
    ``F[m-1]``), and ``F_av`` averages the first ``units`` rows. The summed
    identity ``sum_{j<=k} F_j = sum_j min(j, k) G_j`` is checked for every
    ``k``; it is exact algebra, so the tolerance covers rounding only.
    """
    if game.format != "multi-unit":
        raise ContractError("winning-bid distributions are defined for multi-unit games")
    m = game.m
    if not (1 <= units <= m):
        raise ContractError("units must lie in 1..m")
    seed = resolve_seed(seed)
    bids = np.stack([profile[k].sample(stream(seed, "beta", k), samples)
                     for k in range(game.n) if k != player], axis=1)
    beta = M.beta_sorted_batch(bids, m)
    if points is None:
        points = np.unique(np.concatenate([np.linspace(0.0, float(beta.max()) * 1.05 + 1e-12, 201),
                                           np.unique(beta[:, :].ravel())[:: max(1, beta.size // 400)]]))
    points = np.asarray(points, dtype=float)
    F = np.stack([np.searchsorted(np.sort(beta[:, j]), points, side="right") / samples for j in range(m)])
    G = F.copy()
    G[:-1] -= F[1:]
    jj = np.arange(1, m + 1)[:, None]
    worst = 0.0
    for k in range(1, m + 1):
        lhs = F[:k].sum(axis=0)
        rhs = (np.minimum(jj, k) * G).sum(axis=0)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    tol = 64 * m * np.finfo(float).eps
    F_av = F[:units].mean(axis=0)
    means = beta.mean(axis=0)
    mean_av = float(means[:units].mean())
    grid = np.sort(np.unique(np.concatenate([[0.0], beta[:, :units].ravel()])))
    emp = np.stack([np.searchsorted(np.sort(beta[:, j]), grid, side="right") / samples for j in range(units)])
    surv = 1.0 - emp.mean(axis=0)
    mean_cdf = float(np.sum(surv[:-1] * np.diff(grid)))
    return MultiUnitCdfs(points, F, G, F_av, worst, tol, worst <= tol, means, mean_av, mean_cdf, samples)


# ---------------------------------------------------------------------------
# Binomial identities behind the multi-item deviation bound
# ---------------------------------------------------------------------------


def binomial_identity_residuals(k_max: int = 20, xs=None) -> tuple:
    """Largest errors of ``sum_r C(k,r) x^r (1-x)^(k-r) = 1 - (1-x)^k`` and of its r-weighted form ``= k x``."""
    xs = np.round(np.arange(1, 10) / 10.0, 12) if xs is None else np.asarray(xs, dtype=float)
    e1 = e2 = 0.0
    for k in range(1, k_max + 1):
        r = np.arange(1, k + 1)[:, None]
        terms = special.comb(k, r) * xs[None, :] ** r * (1.0 - xs[None, :]) ** (k - r)
        e1 = max(e1, float(np.max(np.abs(terms.sum(axis=0) - (1.0 - (1.0 - xs) ** k)))))
        e2 = max(e2, float(np.max(np.abs((r * terms).sum(axis=0) - k * xs))))
    return e1, e2


def poa_sweep(name: str, sizes, **params) -> list:
    """``(size, PoA)`` pairs for a construction family in closed-form mode."""
    key = {"grid": "n", "grid-d": "n", "subadditive": "m", "discriminatory-subadditive": "m"}.get(name)
    if key is None:
        raise UnsupportedError(f"no size sweep for {name!r}")
    out = []
    for s in sizes:
        p = dict(params)
        p[key] = int(s)
        if name in ("grid", "grid-d"):
            p["store"] = False
        inst = C.construct(name, **p)
        out.append((int(s), float(inst.poa.value)))
    return out
