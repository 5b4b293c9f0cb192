"""Valuation classes over item sets and unit counts, with brute-force class checks.

Item sets are passed as sorted index sequences, integer bitmasks, or boolean
masks of length ``m``. Batched evaluation takes a boolean array shaped
``(draws, m)`` and returns one value per row; this is the path used by the
Monte Carlo and exact-enumeration code.

Grid items are indexed by the little-endian mixed-radix encoding of
``w in [n]^d``: item ``sum_k w_k * n**k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from poalab import kernels
from poalab.errors import CapacityError, ContractError, DomainError

MAX_TABULATED_ITEMS = 20
MAX_CHECK_ITEMS = 12
CLASSES = ("additive", "oxs-witness", "submodular", "xos-witness", "subadditive")


def item_set(items, m: int) -> np.ndarray:
    """Normalize an item set to a sorted array of distinct indices in ``[0, m)``."""
    if isinstance(items, (int, np.integer)) and not isinstance(items, bool):
        if items < 0 or items >= (1 << m):
            raise DomainError(f"bitmask {items} does not fit {m} items")
        return np.array([j for j in range(m) if (items >> j) & 1], dtype=np.int64)
    arr = np.asarray(list(items) if not isinstance(items, np.ndarray) else items)
    if arr.dtype == bool:
        if arr.shape != (m,):
            raise DomainError(f"mask length {arr.shape} does not match {m} items")
        return np.flatnonzero(arr)
    arr = np.asarray(arr, dtype=np.int64).ravel()
    if arr.size and (arr.min() < 0 or arr.max() >= m):
        raise DomainError(f"item index out of range for {m} items: {arr.tolist()}")
    if arr.size != np.unique(arr).size:
        raise DomainError("item set contains duplicates")
    return np.sort(arr)


def _mask(items, m: int) -> np.ndarray:
    out = np.zeros(m, dtype=bool)
    out[item_set(items, m)] = True
    return out


def all_masks(m: int) -> np.ndarray:
    """Boolean matrix of all ``2**m`` subsets; row ``s`` is bitmask ``s``."""
    s = np.arange(1 << m, dtype=np.int64)
    return ((s[:, None] >> np.arange(m)) & 1).astype(bool)


@dataclass(frozen=True)
class Valuation:
    """Set function ``2^[m] -> R>=0``; subclasses implement ``value_batch``."""

    m: int

    tag: str = field(default="subadditive", init=False)

    def value_batch(self, won: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value(self, items) -> float:
        """Value of one bundle given as indices, bitmask, or boolean mask."""
        return float(self.value_batch(_mask(items, self.m)[None, :])[0])

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Additive(Valuation):
    values: tuple = ()
    tag: str = field(default="additive", init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.m,) or np.any(vals < 0):
            raise ContractError("additive values must be m non-negative numbers")

    def value_batch(self, won):
        return np.asarray(won, dtype=float) @ np.asarray(self.values, dtype=float)

    def to_config(self):
        return {"kind": "additive", "values": list(map(float, self.values))}


@dataclass(frozen=True)
class UnitDemand(Valuation):
    values: tuple = ()
    tag: str = field(default="oxs-witness", init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.m,) or np.any(vals < 0):
            raise ContractError("unit-demand values must be m non-negative numbers")

    def value_batch(self, won):
        won = np.asarray(won, dtype=bool)
        return np.max(np.where(won, np.asarray(self.values, dtype=float), 0.0), axis=1, initial=0.0)

    def to_config(self):
        return {"kind": "unit-demand", "values": list(map(float, self.values))}


@dataclass(frozen=True)
class Xos(Valuation):
    """Maximum over additive clauses."""

    clauses: tuple = ()
    tag: str = field(default="xos-witness", init=False)

    def __post_init__(self):
        c = np.asarray(self.clauses, dtype=float)
        if c.ndim != 2 or c.shape[1] != self.m or c.shape[0] == 0 or np.any(c < 0):
            raise ContractError("XOS clauses must be a non-empty (k, m) non-negative table")

    def value_batch(self, won):
        c = np.asarray(self.clauses, dtype=float)
        return np.max(np.asarray(won, dtype=float) @ c.T, axis=1)

    def to_config(self):
        return {"kind": "xos", "clauses": np.asarray(self.clauses, dtype=float).tolist()}


@dataclass(frozen=True)
class GridProjection(Valuation):
    """``scale`` times the number of distinct projections of a bundle along ``direction``.

    The ground set is ``[n]^d``; ``d`` defaults to ``n``.
    """

    n: int = 2
    direction: int = 0
    scale: float = 1.0
    d: int | None = None
    tag: str = field(default="submodular", init=False)

    def __post_init__(self):
        d = self.n if self.d is None else self.d
        if self.n < 1 or d < 1 or not (0 <= self.direction < d):
            raise ContractError("grid needs n >= 1, d >= 1 and 0 <= direction < d")
        if self.m != self.n**d:
            raise ContractError(f"grid ground set has {self.n**d} items, got m={self.m}")
        idx = np.arange(self.m, dtype=np.int64)
        low = self.n**self.direction
        proj = (idx // (low * self.n)) * low + idx % low
        object.__setattr__(self, "_proj", proj)

    @classmethod
    def of(cls, n: int, direction: int, scale: float = 1.0, d: int | None = None) -> "GridProjection":
        """Grid valuation on ``[n]^d`` with the item count filled in."""
        dims = n if d is None else d
        return cls(n**dims, n=n, direction=direction, scale=scale, d=d)

    @property
    def dims(self) -> int:
        return self.n if self.d is None else self.d

    @property
    def projection(self) -> np.ndarray:
        """Projection residue of each item; residues range over ``n**(d-1)`` values."""
        return self._proj

    def columns(self) -> np.ndarray:
        """Item indices of every column, shaped ``(n**(d-1), n)``; column ``r`` has residue ``r``."""
        order = np.argsort(self._proj, kind="stable")
        return order.reshape(self.n ** (self.dims - 1), self.n)

    def value_batch(self, won):
        counts = kernels.projection_counts(won, self._proj, self.n ** (self.dims - 1))
        return counts.astype(float) * self.scale

    def to_config(self):
        return {"kind": "grid-projection", "n": self.n, "d": self.dims,
                "direction": self.direction, "scale": float(self.scale)}


@dataclass(frozen=True)
class Tabulated(Valuation):
    """Dense table over all ``2**m`` bitmasks, with a class tag."""

    table: tuple = ()
    class_tag: str = "subadditive"

    def __post_init__(self):
        if self.m > MAX_TABULATED_ITEMS:
            raise CapacityError(f"tabulated valuations support at most {MAX_TABULATED_ITEMS} items")
        t = np.asarray(self.table, dtype=float)
        if t.shape != (1 << self.m,):
            raise ContractError(f"table needs 2**{self.m} entries, got {t.shape}")
        if abs(t[0]) > 0:
            raise ContractError("valuation must be normalized: v(empty) = 0")
        s = np.arange(1 << self.m)
        for j in range(self.m):
            lacking = s[(s >> j) & 1 == 0]
            if np.any(t[lacking] > t[lacking | (1 << j)] + 1e-12):
                raise ContractError("tabulated valuation is not monotone")
        object.__setattr__(self, "tag", self.class_tag)
        object.__setattr__(self, "_arr", t)

    def value_batch(self, won):
        won = np.asarray(won, dtype=np.int64)
        return self._arr[won @ (np.int64(1) << np.arange(self.m, dtype=np.int64))]

    def to_config(self):
        return {"kind": "tabulated", "table": self._arr.tolist(), "class": self.class_tag}


@dataclass(frozen=True)
class SubadditiveLBPlayer1(Valuation):
    """Unit-demand bidder worth ``v`` for any non-empty bundle."""

    v: float = 1.0
    tag: str = field(default="oxs-witness", init=False)

    def value_batch(self, won):
        return np.any(np.asarray(won, dtype=bool), axis=1) * float(self.v)

    def to_config(self):
        return {"kind": "subadditive-lb-1", "v": float(self.v)}


@dataclass(frozen=True)
class SubadditiveLBPlayer2(Valuation):
    """Worth ``V`` for one to ``m-1`` items and ``2V`` for the full set."""

    V: float = 1.0
    tag: str = field(default="subadditive", init=False)

    def value_batch(self, won):
        k = np.asarray(won, dtype=bool).sum(axis=1)
        return np.where(k == self.m, 2.0 * self.V, np.where(k > 0, float(self.V), 0.0))

    def to_config(self):
        return {"kind": "subadditive-lb-2", "V": float(self.V)}


@dataclass(frozen=True)
class MultiUnit(Valuation):
    """Value of receiving ``k`` identical units, ``values[k]`` for k = 0..m."""

    values: tuple = ()
    class_tag: str = "subadditive"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.m + 1,):
            raise ContractError("multi-unit values need m+1 entries v(0..m)")
        if v[0] != 0.0 or np.any(np.diff(v) < -1e-12):
            raise ContractError("multi-unit values must start at 0 and be non-decreasing")
        object.__setattr__(self, "tag", self.class_tag)
        object.__setattr__(self, "_arr", v)

    def value_units(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=np.int64)
        if np.any(k < 0) or np.any(k > self.m):
            raise DomainError("unit count out of range")
        return self._arr[k]

    def value(self, items) -> float:
        if isinstance(items, (int, np.integer)):
            return float(self.value_units(items))
        return float(self.value_units(len(item_set(items, self.m))))

    def value_batch(self, won):
        return self._arr[np.asarray(won, dtype=bool).sum(axis=1)]

    def to_config(self):
        return {"kind": "multi-unit", "values": self._arr.tolist(), "class": self.class_tag}


def full_table(v: Valuation, m: int | None = None) -> np.ndarray:
    """Values of all ``2**m`` bundles, indexed by bitmask."""
    m = v.m if m is None else m
    if m != v.m:
        raise ContractError(f"valuation has {v.m} items, asked for {m}")
    if m > MAX_TABULATED_ITEMS:
        raise CapacityError(f"cannot tabulate {m} items")
    return v.value_batch(all_masks(m))


def _is_additive(t, m, tol):
    singles = t[1 << np.arange(m)]
    return bool(np.all(np.abs(all_masks(m).astype(float) @ singles - t) <= tol))


def _is_submodular(t, m, tol):
    # local form: v(S+j) + v(S+k) >= v(S+j+k) + v(S) for j != k outside S
    s = np.arange(1 << m)
    for j in range(m):
        for k in range(j + 1, m):
            base = s[((s >> j) & 1 == 0) & ((s >> k) & 1 == 0)]
            lhs = t[base | (1 << j)] + t[base | (1 << k)]
            rhs = t[base | (1 << j) | (1 << k)] + t[base]
            if np.any(lhs < rhs - tol):
                return False
    return True


def _is_subadditive(t, m, tol):
    s = np.arange(1 << m)
    for a in range(1 << m):
        if np.any(t[a | s] > t[a] + t + tol):
            return False
    return True


def _oxs_value(units: np.ndarray, items: np.ndarray) -> float:
    if items.size == 0:
        return 0.0
    w = units[:, items]
    rows, cols = linear_sum_assignment(w, maximize=True)
    return float(w[rows, cols].sum())


def check_class(v: Valuation, cls: str, m: int | None = None, witness=None, tol: float = 1e-9) -> bool:
    """Brute-force class membership over every bundle (``m <= 12``).

    ``oxs-witness`` takes a ``(k, m)`` table of unit-demand values and
    ``xos-witness`` a ``(k, m)`` table of additive clauses; both check that
    the witness reproduces ``v`` on every bundle.
    """
    if cls not in CLASSES:
        raise ContractError(f"unknown class {cls!r}; expected one of {CLASSES}")
    m = v.m if m is None else m
    if m > MAX_CHECK_ITEMS:
        raise CapacityError(f"class checks enumerate 2**m bundles; m={m} exceeds {MAX_CHECK_ITEMS}")
    t = full_table(v, m)
    if cls == "additive":
        return _is_additive(t, m, tol)
    if cls == "submodular":
        return _is_submodular(t, m, tol)
    if cls == "subadditive":
        return _is_subadditive(t, m, tol)
    if witness is None:
        raise ContractError(f"{cls} needs a witness decomposition")
    w = np.asarray(witness, dtype=float)
    if w.ndim != 2 or w.shape[1] != m:
        raise ContractError("witness must be a (k, m) table")
    masks = all_masks(m)
    if cls == "xos-witness":
        rebuilt = np.max(masks.astype(float) @ w.T, axis=1)
    else:
        rebuilt = np.array([_oxs_value(w, np.flatnonzero(row)) for row in masks])
    return bool(np.all(np.abs(rebuilt - t) <= tol))


def grid_oxs_witness(v: GridProjection) -> np.ndarray:
    """Unit-demand parts reproducing a grid valuation: one part per projection residue.

    Part ``r`` values each item of column ``r`` at ``scale`` and everything else at 0.
    """
    k = v.n ** (v.dims - 1)
    w = np.zeros((k, v.m))
    w[v.projection, np.arange(v.m)] = v.scale
    return w


def witness_agreement(v: Valuation, witness, kind: str, bundles=None, tol: float = 1e-9) -> bool:
    """Check a witness on the given bundles (boolean rows); all bundles when omitted."""
    w = np.asarray(witness, dtype=float)
    masks = all_masks(v.m) if bundles is None else np.asarray(bundles, dtype=bool)
    target = v.value_batch(masks)
    if kind == "xos-witness":
        rebuilt = np.max(masks.astype(float) @ w.T, axis=1)
    elif kind == "oxs-witness":
        rebuilt = np.array([_oxs_value(w, np.flatnonzero(row)) for row in masks])
    else:
        raise ContractError(f"unknown witness kind {kind!r}")
    return bool(np.all(np.abs(rebuilt - target) <= tol))


def from_config(cfg: dict, m: int) -> Valuation:
    """Inverse of ``Valuation.to_config``."""
    kind = cfg.get("kind")
    if kind == "additive":
        return Additive(m, tuple(cfg["values"]))
    if kind == "unit-demand":
        return UnitDemand(m, tuple(cfg["values"]))
    if kind == "xos":
        return Xos(m, tuple(map(tuple, cfg["clauses"])))
    if kind == "grid-projection":
        return GridProjection(m, n=cfg["n"], direction=cfg["direction"], scale=cfg.get("scale", 1.0),
                              d=cfg.get("d"))
    if kind == "tabulated":
        return Tabulated(m, tuple(cfg["table"]), cfg.get("class", "subadditive"))
    if kind == "subadditive-lb-1":
        return SubadditiveLBPlayer1(m, v=cfg["v"])
    if kind == "subadditive-lb-2":
        return SubadditiveLBPlayer2(m, V=cfg["V"])
    if kind == "multi-unit":
        return MultiUnit(m, tuple(cfg["values"]), cfg.get("class", "subadditive"))
    raise ContractError(f"unknown valuation kind {kind!r}")
