"""Piecewise-analytic CDFs with atoms, the worst-case price law, and structured strategies.

A :class:`Cdf` is a list of contiguous :class:`Piece` objects. Piece ``k``
gives ``F`` on ``[lo_k, lo_{k+1})`` (the last piece is closed); ``F`` is 0
left of the first piece and 1 from the last piece's upper end on. Atoms are
the jumps at piece starts and are reported explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from poalab.errors import ContractError, UnsupportedError

SIMPSON_TOL = 1e-10
SIMPSON_DEPTH = 40
ARGMAX_GRID = 4096
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_ATOM_EPS = 1e-15


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = SIMPSON_TOL, max_depth: int = SIMPSON_DEPTH) -> float:
    """Adaptive Simpson quadrature of a scalar function on ``[a, b]``."""
    if b <= a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, max_depth)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) * (flo + 4.0 * flm + fmid) / 6.0
        right = (hi - mid) * (fmid + 4.0 * frm + fhi) / 6.0
        delta = left + right - est
        if depth <= 0 or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth - 1))
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth - 1))
    return total


def golden_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-13, max_iter: int = 200):
    """Golden-section search for a maximum of a unimodal scalar function on ``[a, b]``."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _bisect_inverse(f, lo, hi, y, iters=90):
    """Vectorized inf{x in [lo, hi] : f(x) >= y} for non-decreasing ``f``."""
    a = np.full_like(y, lo, dtype=float)
    b = np.full_like(y, hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        ok = f(mid) >= y
        b = np.where(ok, mid, b)
        a = np.where(ok, a, mid)
    return b


class Piece:
    """One analytic segment of a CDF."""

    __slots__ = ("lo", "hi", "kind", "params", "_f", "_finv")

    def __init__(self, lo, hi, kind, params, f, finv=None):
        if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
            raise ContractError(f"bad piece interval [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)
        self.kind = kind
        self.params = dict(params)
        self._f = f
        self._finv = finv

    def __call__(self, x):
        return self._f(np.asarray(x, dtype=float))

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if self._finv is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                x = self._finv(y)
            return np.clip(np.nan_to_num(x, nan=self.lo), self.lo, self.hi)
        return _bisect_inverse(self._f, self.lo, self.hi, y)

    def to_config(self) -> dict:
        if self.kind == "composite":
            raise UnsupportedError("composite pieces are rebuilt from their construction, not serialized")
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi, "params": dict(self.params)}

    @staticmethod
    def const(lo, hi, c):
        return Piece(lo, hi, "const", {"c": c}, lambda x: np.full_like(x, float(c), dtype=float),
                     lambda y: np.full_like(y, float(lo), dtype=float))

    @staticmethod
    def linear(lo, hi, a, b):
        """``a + b x``."""
        return Piece(lo, hi, "linear", {"a": a, "b": b}, lambda x: a + b * x, lambda y: (y - a) / b)

    @staticmethod
    def reciprocal(lo, hi, a, b):
        """``a / (b - x)``."""
        return Piece(lo, hi, "reciprocal", {"a": a, "b": b}, lambda x: a / (b - x), lambda y: b - a / y)

    @staticmethod
    def power_reciprocal(lo, hi, a, b, p, c):
        """``a (b - x)^(-p) + c``."""
        return Piece(lo, hi, "power-reciprocal", {"a": a, "b": b, "p": p, "c": c},
                     lambda x: a * np.power(b - x, -p) + c,
                     lambda y: b - np.power((y - c) / a, -1.0 / p))

    @staticmethod
    def rational(lo, hi, a, b, c, d):
        """``(a + b x) / (c + d x)``."""
        return Piece(lo, hi, "rational", {"a": a, "b": b, "c": c, "d": d},
                     lambda x: (a + b * x) / (c + d * x),
                     lambda y: (a - y * c) / (y * d - b))

    @staticmethod
    def composite(lo, hi, f, finv=None, label=""):
        """Arbitrary vectorized expression; inverted by bisection unless ``finv`` is given."""
        return Piece(lo, hi, "composite", {"label": label}, f, finv)

    @staticmethod
    def from_config(cfg: dict) -> "Piece":
        kind, lo, hi, p = cfg["kind"], cfg["lo"], cfg["hi"], cfg.get("params", {})
        makers = {
            "const": lambda: Piece.const(lo, hi, p["c"]),
            "linear": lambda: Piece.linear(lo, hi, p["a"], p["b"]),
            "reciprocal": lambda: Piece.reciprocal(lo, hi, p["a"], p["b"]),
            "power-reciprocal": lambda: Piece.power_reciprocal(lo, hi, p["a"], p["b"], p["p"], p["c"]),
            "rational": lambda: Piece.rational(lo, hi, p["a"], p["b"], p["c"], p["d"]),
        }
        if kind not in makers:
            raise ContractError(f"unknown piece kind {kind!r}")
        return makers[kind]()


class Cdf:
    """Right-continuous, non-decreasing CDF on a bounded non-negative support."""

    def __init__(self, pieces: Sequence[Piece], label: str = "", check: bool = True):
        pieces = list(pieces)
        if not pieces:
            raise ContractError("a CDF needs at least one piece")
        for prev, nxt in zip(pieces, pieces[1:]):
            if abs(prev.hi - nxt.lo) > 1e-12 * max(1.0, abs(prev.hi)):
                raise ContractError(f"pieces must be contiguous: {prev.hi} vs {nxt.lo}")
        if pieces[0].lo < 0:
            raise ContractError("supports must be non-negative")
        self.pieces = pieces
        self.label = label
        self._lo = np.array([p.lo for p in pieces])
        self._start = np.array([float(p(p.lo)) for p in pieces])
        self._end = np.array([float(p(p.hi)) for p in pieces])
        if abs(self._end[-1] - 1.0) > 1e-9:
            raise ContractError(f"CDF must reach 1 at the top of its support, got {self._end[-1]}")
        self._end[-1] = 1.0
        if check:
            self._validate()
        atoms = []
        prev = 0.0
        for p, s, e in zip(pieces, self._start, self._end):
            if s - prev > _ATOM_EPS:
                atoms.append((p.lo, float(s - prev)))
            prev = e
        self.atoms = tuple(atoms)

    def _validate(self):
        prev = 0.0
        for p, s, e in zip(self.pieces, self._start, self._end):
            if s < prev - 1e-12 or s < -1e-12 or e > 1.0 + 1e-9:
                raise ContractError(f"CDF not monotone or out of [0,1] at {p.lo}")
            if p.hi > p.lo:
                xs = np.linspace(p.lo, p.hi, 257)
                ys = p(xs)
                if np.any(np.diff(ys) < -1e-12) or not np.all(np.isfinite(ys)):
                    raise ContractError(f"piece on [{p.lo}, {p.hi}] is not non-decreasing")
            prev = e

    @property
    def support_lo(self) -> float:
        return self.pieces[0].lo

    @property
    def support_hi(self) -> float:
        return self.pieces[-1].hi

    @property
    def breakpoints(self) -> np.ndarray:
        """Piece boundaries, including both support ends."""
        return np.unique(np.concatenate([self._lo, [self.support_hi]]))

    def is_continuous(self, above: float = -np.inf) -> bool:
        """True when there is no atom strictly above ``above``."""
        return all(pt <= above for pt, _ in self.atoms)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros_like(x)
        idx = np.searchsorted(self._lo, x, side="right") - 1
        for k, p in enumerate(self.pieces):
            sel = idx == k
            if np.any(sel):
                out[sel] = p(np.minimum(x[sel], p.hi))
        out[x >= self.support_hi] = 1.0
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if scalar else out

    def left_limit(self, x):
        """``F(x-)``: probability of a value strictly below ``x``."""
        x = np.asarray(x, dtype=float)
        out = np.atleast_1d(self(x)).astype(float)
        xs = np.atleast_1d(x)
        for pt, mass in self.atoms:
            out = np.where(xs == pt, out - mass, out)
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if x.ndim == 0 else out

    def quantile(self, rho):
        """Generalized inverse ``inf{x : F(x) >= rho}``."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < -1e-12) or np.any(rho > 1.0 + 1e-12) or np.any(np.isnan(rho)):
            raise ContractError("quantile levels must lie in [0, 1]")
        scalar = rho.ndim == 0
        r = np.clip(np.atleast_1d(rho), 0.0, 1.0)
        k = np.minimum(np.searchsorted(self._end, r, side="left"), len(self.pieces) - 1)
        out = np.empty_like(r)
        for i, p in enumerate(self.pieces):
            sel = k == i
            if not np.any(sel):
                continue
            rr = r[sel]
            at_lo = self._start[i] >= rr
            val = np.full_like(rr, p.lo)
            if np.any(~at_lo):
                val[~at_lo] = p.inverse(rr[~at_lo])
            out[sel] = val
        return float(out[0]) if scalar else out

    def sample(self, stream: np.random.Generator, size=None):
        """Inverse-transform draws using ``stream``."""
        return self.quantile(stream.random(size))

    def expectation(self) -> float:
        """``E[X] = integral of (1 - F)`` over the support, piece by piece."""
        total = self.support_lo
        for p in self.pieces:
            if p.hi > p.lo:
                total += adaptive_simpson(lambda x, p=p: 1.0 - float(p(x)), p.lo, p.hi)
        return total

    def level_segments(self):
        """Probability-level segments ``(r0, r1, atom_point or None)`` covering [0, 1].

        On an atom segment the quantile is constant; on the others it is
        smooth inside a single piece.
        """
        segs = []
        prev = 0.0
        for p, s, e in zip(self.pieces, self._start, self._end):
            if s > prev + _ATOM_EPS:
                segs.append((prev, float(s), p.lo))
            if e > s + _ATOM_EPS:
                segs.append((float(s), float(e), None))
            prev = max(prev, float(e))
        return segs

    def expect(self, g: Callable, tol: float = SIMPSON_TOL) -> float:
        """``E[g(X)]`` as the integral of ``g(quantile(r))`` over levels ``r``; atoms exact."""
        total = 0.0
        for r0, r1, point in self.level_segments():
            if point is not None:
                total += (r1 - r0) * float(g(point))
            else:
                total += adaptive_simpson(lambda r: float(g(self.quantile(r))), r0, r1, tol=tol)
        return total

    def to_config(self) -> dict:
        return {"label": self.label, "pieces": [p.to_config() for p in self.pieces]}

    @staticmethod
    def from_config(cfg: dict) -> "Cdf":
        return Cdf([Piece.from_config(p) for p in cfg["pieces"]], label=cfg.get("label", ""))

    def __repr__(self):
        return f"Cdf({self.label or 'anonymous'}, support=[{self.support_lo}, {self.support_hi}], atoms={len(self.atoms)})"


def cdf_eval(F: Cdf, x):
    return F(x)


def quantile(F: Cdf, rho):
    return F.quantile(rho)


def sample(F: Cdf, stream: np.random.Generator, size=None):
    return F.sample(stream, size)


def expectation(F: Cdf) -> float:
    return F.expectation()


def point_mass(p: float) -> Cdf:
    return Cdf([Piece.const(p, p, 1.0)], label=f"point({p})")


def uniform(a: float, b: float) -> Cdf:
    if b <= a:
        raise ContractError("uniform needs a < b")
    return Cdf([Piece.linear(a, b, -a / (b - a), 1.0 / (b - a))], label=f"uniform({a},{b})")


def discrete(points, masses) -> Cdf:
    """Finitely supported law with the given masses (merged on equal points)."""
    pts = np.asarray(points, dtype=float)
    w = np.asarray(masses, dtype=float)
    if pts.shape != w.shape or pts.size == 0 or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ContractError("discrete law needs matching points and masses summing to 1")
    uniq, inv = np.unique(pts, return_inverse=True)
    mass = np.bincount(inv, weights=w)
    cum = np.cumsum(mass)
    cum[-1] = 1.0
    pieces = [Piece.const(uniq[k], uniq[k + 1], float(cum[k])) for k in range(uniq.size - 1)]
    pieces.append(Piece.const(uniq[-1], uniq[-1], 1.0))
    return Cdf(pieces, label="discrete")


def piecewise_linear(knots, starts, ends) -> Cdf:
    """Linear from ``starts[k]`` to ``ends[k]`` on ``[knots[k], knots[k+1]]``; jumps are atoms."""
    pieces = []
    for k in range(len(knots) - 1):
        lo, hi = float(knots[k]), float(knots[k + 1])
        slope = (ends[k] - starts[k]) / (hi - lo)
        pieces.append(Piece.linear(lo, hi, starts[k] - slope * lo, slope))
    return Cdf(pieces, label="piecewise-linear")


def hat_F(v: float) -> Cdf:
    """Worst-case price law: ``v / (e (v - x))`` up to ``(1 - 1/e) v``; atom ``1/e`` at 0."""
    if not v > 0:
        raise ContractError("hat_F needs v > 0")
    return Cdf([Piece.reciprocal(0.0, (1.0 - 1.0 / math.e) * v, v / math.e, v)], label=f"hat_F({v})")


def discretize_cdf(F: Cdf, points: int) -> Cdf:
    """Law on ``points`` quantiles at mid-levels ``(k + 1/2) / points``, each with equal mass."""
    levels = (np.arange(points) + 0.5) / points
    return discrete(F.quantile(levels), np.full(points, 1.0 / points))


def _objective(F: Cdf, v: float, rule, item: int):
    if rule is None:
        return lambda a: np.asarray(F(a)) * (v - np.asarray(a))
    def obj(a):
        a = np.asarray(a, dtype=float)
        qw, ql = rule.win(item, a), rule.lose(item, a)
        return np.asarray(F(a)) * (v - qw + ql) - ql
    return obj


def argmax_bid(F: Cdf, v: float, rule=None, item: int = 0, grid: int = ARGMAX_GRID, hi: float | None = None):
    """Best pure bid against price law ``F`` for a bidder of value ``v``.

    Maximizes ``F(a)(v - a)``, or ``F(a)(v - q^w(a) + q^l(a)) - q^l(a)`` when a
    bid-dependent ``rule`` is given. Searches a ``grid``-point lattice plus all
    piece boundaries, then refines by golden section inside the winning cell.
    Ties go to the smallest bid. Returns ``(a_star, A)``.
    """
    if not v > 0:
        raise ContractError("argmax_bid needs v > 0")
    f = _objective(F, v, rule, item)
    if hi is None:
        hi = v if rule is None else max(F.support_hi, 0.0)
    cand = np.linspace(0.0, hi, grid)
    extra = F.breakpoints
    cand = np.unique(np.concatenate([cand, extra[(extra >= 0) & (extra <= hi)]]))
    vals = f(cand)
    best = float(np.max(vals))
    tol = 1e-12 * max(1.0, abs(best))
    k = int(np.flatnonzero(vals >= best - tol)[0])
    a_star, val = float(cand[k]), float(vals[k])
    scalar = lambda a: float(f(np.array([a]))[0])
    for lo, up in ((k - 1, k), (k, k + 1)):
        if lo < 0 or up >= cand.size:
            continue
        a, fa = golden_max(scalar, float(cand[lo]), float(cand[up]))
        if fa > val + tol:
            a_star, val = a, fa
    return a_star, val


# ---------------------------------------------------------------------------
# Structured strategies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """One branch of a strategy driven by a single uniform level ``rho``.

    Items in ``covered`` bid ``quantile_j(rho)`` (or 0 when ``rho < threshold``);
    every other item bids ``base[j]``.
    """

    weight: float
    covered: np.ndarray
    cdfs: tuple
    base: np.ndarray
    threshold: float = 0.0

    def bids_at(self, rho: np.ndarray) -> np.ndarray:
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        out = np.repeat(self.base[None, :], rho.size, axis=0)
        if self.covered.size:
            zero = rho < self.threshold
            cache = {}
            for j, F in zip(self.covered, self.cdfs):
                key = id(F)
                if key not in cache:
                    cache[key] = F.quantile(np.clip(rho, 0.0, 1.0))
                out[:, j] = np.where(zero, 0.0, cache[key])
        return out

    def levels_against(self, own: np.ndarray) -> np.ndarray:
        """Levels of ``rho`` where a covered bid crosses the matching entry of ``own``."""
        lv = [0.0, 1.0]
        if self.threshold > 0:
            lv.append(self.threshold)
        for j, F in zip(self.covered, self.cdfs):
            b = float(own[j])
            lv.append(float(F.left_limit(b)))
            lv.append(float(F(b)))
            if self.threshold > 0 and b == 0.0:
                lv.append(self.threshold)
        return np.unique(np.clip(lv, 0.0, 1.0))


class Strategy:
    """Base class of the structured randomized strategies."""

    m: int

    def scenarios(self) -> list:
        raise UnsupportedError(f"{type(self).__name__} is not driven by one uniform level")

    def sample(self, stream: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def cdfs(self) -> list:
        return []


@dataclass(frozen=True)
class Atom(Strategy):
    """Pure bid vector."""

    bids: tuple

    @property
    def m(self):
        return len(self.bids)

    def scenarios(self):
        return [Scenario(1.0, np.zeros(0, dtype=np.int64), (), np.asarray(self.bids, dtype=float))]

    def sample(self, stream, size):
        return np.repeat(np.asarray(self.bids, dtype=float)[None, :], size, axis=0)


def _per_item(cdfs, m):
    if isinstance(cdfs, Cdf):
        return (cdfs,) * m
    cdfs = tuple(cdfs)
    if len(cdfs) != m:
        raise ContractError(f"need one CDF per item ({m}), got {len(cdfs)}")
    return cdfs


@dataclass(frozen=True)
class SliceUniform(Strategy):
    """Pick ``l`` uniformly, bid ``quantile_j(rho)`` on the slice ``w[direction] = l``, ``base`` elsewhere.

    The level ``rho`` is shared across the slice, so identical per-item CDFs
    give a single common bid. ``shape = (n, d)`` describes the grid ``[n]^d``.
    """

    shape: tuple
    direction: int
    cdf: object
    base: float = 0.0

    def __post_init__(self):
        n, d = self.shape
        if not (0 <= self.direction < d):
            raise ContractError("slice direction out of range")
        object.__setattr__(self, "_cdfs", _per_item(self.cdf, n**d))
        idx = np.arange(n**d)
        digit = (idx // n**self.direction) % n
        object.__setattr__(self, "_members", [np.flatnonzero(digit == ell) for ell in range(n)])

    @property
    def m(self):
        return self.shape[0] ** self.shape[1]

    @property
    def per_item(self) -> tuple:
        return self._cdfs

    def slice_items(self, ell: int) -> np.ndarray:
        return self._members[ell]

    def cdfs(self):
        return list(dict.fromkeys(self._cdfs))

    def scenarios(self):
        n = self.shape[0]
        base = np.full(self.m, float(self.base))
        return [Scenario(1.0 / n, mem, tuple(self._cdfs[j] for j in mem), base) for mem in self._members]

    def sample(self, stream, size):
        n = self.shape[0]
        ell = stream.integers(0, n, size=size)
        rho = stream.random(size)
        out = np.full((size, self.m), float(self.base))
        cache = {}
        for j in range(self.m):
            F = self._cdfs[j]
            if id(F) not in cache:
                cache[id(F)] = F.quantile(rho)
        for k, mem in enumerate(self._members):
            rows = np.flatnonzero(ell == k)
            if rows.size == 0:
                continue
            for j in mem:
                out[rows, j] = cache[id(self._cdfs[j])][rows]
        return out


@dataclass(frozen=True)
class CorrelatedInverse(Strategy):
    """Bid ``quantile_j(rho)`` on every item for a shared ``rho``; bid 0 when ``rho < threshold``."""

    cdf: object
    m_items: int
    threshold: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "_cdfs", _per_item(self.cdf, self.m_items))
        if not (0.0 <= self.threshold < 1.0):
            raise ContractError("threshold must lie in [0, 1)")

    @property
    def m(self):
        return self.m_items

    @property
    def per_item(self) -> tuple:
        return self._cdfs

    def cdfs(self):
        return list(dict.fromkeys(self._cdfs))

    def scenarios(self):
        return [Scenario(1.0, np.arange(self.m), self._cdfs, np.zeros(self.m), self.threshold)]

    def sample(self, stream, size):
        rho = stream.random(size)
        return Scenario(1.0, np.arange(self.m), self._cdfs, np.zeros(self.m), self.threshold).bids_at(rho)


@dataclass(frozen=True)
class IndependentPerItem(Strategy):
    """Independent draw per item."""

    cdf: object
    m_items: int

    def __post_init__(self):
        object.__setattr__(self, "_cdfs", _per_item(self.cdf, self.m_items))

    @property
    def m(self):
        return self.m_items

    def cdfs(self):
        return list(dict.fromkeys(self._cdfs))

    def scenarios(self):
        if self.m != 1:
            return super().scenarios()
        return [Scenario(1.0, np.arange(1), self._cdfs, np.zeros(1))]

    def sample(self, stream, size):
        return np.column_stack([F.sample(stream, size) for F in self._cdfs])


@dataclass(frozen=True)
class MultiUnitFlat(Strategy):
    """Bid a common draw on the first ``k`` units and 0 on the rest."""

    k: int
    cdf: Cdf
    m_units: int

    def __post_init__(self):
        if not (1 <= self.k <= self.m_units):
            raise ContractError("flat multi-unit bids need 1 <= k <= m")

    @property
    def m(self):
        return self.m_units

    def cdfs(self):
        return [self.cdf]

    def scenarios(self):
        return [Scenario(1.0, np.arange(self.k), (self.cdf,) * self.k, np.zeros(self.m))]

    def sample(self, stream, size):
        x = self.cdf.sample(stream, size)
        out = np.zeros((size, self.m))
        out[:, : self.k] = x[:, None]
        return out


@dataclass(frozen=True)
class BayesianBid(Strategy):
    """Valuation-indexed bid map ``b(v)`` for a value drawn from ``value_cdf`` (single item).

    ``bid_cdf`` is the induced law of the bid; opponents only see that law.
    """

    value_cdf: Cdf
    bid_map: Callable
    bid_cdf: Cdf

    @property
    def m(self):
        return 1

    def cdfs(self):
        return [self.bid_cdf]

    def scenarios(self):
        return [Scenario(1.0, np.arange(1), (self.bid_cdf,), np.zeros(1))]

    def sample_values(self, stream, size):
        vals = self.value_cdf.sample(stream, size)
        return vals, np.asarray(self.bid_map(vals), dtype=float)[:, None]

    def sample(self, stream, size):
        return self.sample_values(stream, size)[1]


@dataclass(frozen=True)
class MixedProfile:
    """One structured strategy per player."""

    strategies: tuple

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(self.strategies))

    def __len__(self):
        return len(self.strategies)

    def __getitem__(self, i):
        return self.strategies[i]

    def replace(self, player: int, strategy: Strategy) -> "MixedProfile":
        s = list(self.strategies)
        s[player] = strategy
        return MixedProfile(tuple(s))

    @property
    def is_bayesian(self) -> bool:
        return any(isinstance(s, BayesianBid) for s in self.strategies)
