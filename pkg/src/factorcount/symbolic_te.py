"""Ordinal-pattern symbolization and symbolic transfer entropy (STE).

A symbol is the ascending rank order of ``m`` samples spaced ``l`` apart,
stored as the tuple ``(k_1, ..., k_m)`` of 1-based positions such that
``x(i + (k_1-1) l) <= x(i + (k_2-1) l) <= ...``.  Ties keep temporal order.
Internally each symbol is an integer code (its lexicographic rank among the
``m!`` permutations).

STE from a source ``y`` to a target ``x`` with step ``delta`` is the plug-in

    sum p(x_{i+d}, x_i, y_i) log2[ p(x_{i+d} | x_i, y_i) / p(x_{i+d} | x_i) ]

in bits.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import stats

from .ingest import ReturnMatrix


@dataclass(frozen=True)
class SymbolSequence:
    codes: np.ndarray
    m: int
    l: int = 1

    def __post_init__(self):
        codes = np.asarray(self.codes)
        if codes.ndim != 1 or not np.issubdtype(codes.dtype, np.integer):
            raise ValueError("symbol codes must be a 1-d integer array")
        if codes.size and (codes.min() < 0 or codes.max() >= math.factorial(self.m)):
            raise ValueError(f"symbol codes must lie in [0, {self.m}!)")
        object.__setattr__(self, "codes", codes.astype(np.int64))

    def __len__(self) -> int:
        return len(self.codes)

    @property
    def patterns(self) -> list[tuple[int, ...]]:
        """Symbols as 1-based rank tuples."""
        table = _permutations(self.m)
        return [table[c] for c in self.codes]


def _permutations(m: int) -> list[tuple[int, ...]]:
    return list(itertools.permutations(range(1, m + 1)))


def _lehmer_codes(perms: np.ndarray) -> np.ndarray:
    """Lexicographic rank of each row of a permutation array."""
    n, m = perms.shape
    codes = np.zeros(n, dtype=np.int64)
    for j in range(m - 1):
        smaller_later = (perms[:, j + 1 :] < perms[:, j : j + 1]).sum(axis=1)
        codes += smaller_later * math.factorial(m - 1 - j)
    return codes


def symbolize(x, m: int, l: int = 1) -> SymbolSequence:
    """Map a real sequence to its ordinal-pattern symbols.

    The output has ``len(x) - (m-1)*l`` symbols.
    """
    if not 2 <= m <= 7:
        raise ValueError(f"embedding dimension must be in 2..7, got {m}")
    if l < 1:
        raise ValueError(f"delay must be >= 1, got {l}")
    x = np.asarray(x, dtype=float)
    span = (m - 1) * l + 1
    if x.ndim != 1 or len(x) < span:
        raise ValueError(f"sequence too short for m={m}, l={l}: need {span}, got {len(x)}")
    windows = sliding_window_view(x, span)[:, ::l]
    order = np.argsort(windows, axis=1, kind="stable")
    return SymbolSequence(_lehmer_codes(order + 1), m, l)


def permutation_entropy(s: SymbolSequence) -> float:
    """Shannon entropy of the symbol frequencies, in bits."""
    if len(s) == 0:
        raise ValueError("empty symbol sequence")
    _, counts = np.unique(s.codes, return_counts=True)
    f = counts / counts.sum()
    return float(max(0.0, -(f * np.log2(f)).sum()))


@dataclass(frozen=True)
class SteEstimate:
    value: float  # bits
    delta: int
    counts: np.ndarray  # joint counts indexed [x_future, x_now, y_now]
    alphabet_sizes: tuple[int, int]  # observed (target, source)

    @property
    def n_triples(self) -> int:
        return int(self.counts.sum())


def _dense(codes: np.ndarray) -> tuple[np.ndarray, int]:
    uniq, inv = np.unique(codes, return_inverse=True)
    return inv.astype(np.int64), len(uniq)


def _ste_from_counts(counts: np.ndarray) -> np.ndarray:
    """STE in bits from joint counts with shape (..., Sx, Sx, Sy)."""
    n = counts.sum(axis=(-3, -2, -1), keepdims=True)
    n_ab = counts.sum(axis=-1, keepdims=True)  # (future, now)
    n_bc = counts.sum(axis=-3, keepdims=True)  # (now, source)
    n_b = counts.sum(axis=(-3, -1), keepdims=True)  # now
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = counts * n_b / (n_ab * n_bc)
        terms = np.where(counts > 0, counts * np.log2(ratio), 0.0)
    value = terms.sum(axis=(-3, -2, -1)) / n[..., 0, 0, 0]
    return np.maximum(value, 0.0)


class _TripleIndex:
    """Precomputed target part of the triple index for one (source, target) pair."""

    def __init__(self, source: SymbolSequence, target: SymbolSequence, delta: int):
        if len(source) != len(target):
            raise ValueError(f"length mismatch: source {len(source)}, target {len(target)}")
        if delta < 1:
            raise ValueError(f"delta must be >= 1, got {delta}")
        if len(target) <= delta:
            raise ValueError("no usable (future, present, source) triples")
        x, self.sx = _dense(target.codes)
        y, self.sy = _dense(source.codes[:-delta])
        self.base = (x[delta:] * self.sx + x[:-delta]) * self.sy
        self.y = y
        self.delta = delta

    @property
    def size(self) -> int:
        return self.sx * self.sx * self.sy

    def counts(self, y: np.ndarray) -> np.ndarray:
        c = np.bincount(self.base + y, minlength=self.size)
        return c.reshape(self.sx, self.sx, self.sy)

    def _xlogx(self) -> np.ndarray:
        k = np.arange(len(self.y) + 1, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(k > 0, k * np.log(k), 0.0)

    def permutation_statistic(self, ys: np.ndarray) -> np.ndarray:
        """Part of ``N ln2 * STE`` that changes when the source is permuted.

        The (future, present) and present counts only involve the target, so
        ``sum c log c`` over the full triples minus the same sum over the
        (present, source) pairs orders surrogates exactly as STE does.
        ``ys`` has shape ``(k, N)``; returns ``k`` values.
        """
        ys = np.atleast_2d(ys)
        k = ys.shape[0]
        table = self._xlogx()
        idx = (np.arange(k)[:, None] * self.size + self.base[None, :] + ys).ravel()
        c = np.bincount(idx, minlength=k * self.size).reshape(k, self.sx, self.sx * self.sy)
        bc = c.sum(axis=1)
        return table[c].sum(axis=(1, 2)) - table[bc].sum(axis=1)


def ste(source: SymbolSequence, target: SymbolSequence, delta: int = 1) -> SteEstimate:
    """Plug-in symbolic transfer entropy from ``source`` to ``target``, in bits."""
    tri = _TripleIndex(source, target, delta)
    counts = tri.counts(tri.y)
    value = float(_ste_from_counts(counts))
    return SteEstimate(value, delta, counts, (tri.sx, tri.sy))


def chi2_pvalue(est: SteEstimate, alphabet_sizes: tuple[int, int] | None = None, n: int | None = None) -> float:
    """Asymptotic p-value: ``2 N ln2 * STE`` is referred to chi2 with
    ``D = Sx (Sx - 1) (Sy - 1)`` degrees of freedom."""
    sx, sy = est.alphabet_sizes if alphabet_sizes is None else alphabet_sizes
    n = est.n_triples if n is None else n
    if sx < 1 or sy < 1 or n < 1:
        raise ValueError("alphabet sizes and triple count must be positive")
    dof = sx * (sx - 1) * (sy - 1)
    if dof == 0 or est.value <= 0:
        return 1.0
    return float(stats.chi2.sf(2.0 * n * math.log(2.0) * est.value, dof))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (tuple, list)):
        return np.random.default_rng(np.random.SeedSequence([int(s) for s in seed]))
    return np.random.default_rng(seed)


def surrogate_pvalue(
    source: SymbolSequence,
    target: SymbolSequence,
    delta: int = 1,
    n_surrogates: int = 100,
    seed=0,
) -> float:
    """Permutation p-value: the source symbols are shuffled, the target is left
    alone, so its own transition law is untouched.

    ``seed`` may be an int, a sequence of ints (hashed into one stream) or a
    ``numpy.random.Generator``.
    """
    if n_surrogates < 19:
        raise ValueError("need at least 19 surrogates")
    tri = _TripleIndex(source, target, delta)
    return _surrogate_test(tri, _rng(seed), n_surrogates)[1]


def _surrogate_test(tri: _TripleIndex, rng: np.random.Generator, n_surrogates: int) -> tuple[float, float]:
    observed = float(_ste_from_counts(tri.counts(tri.y)))
    perms = rng.permuted(np.broadcast_to(tri.y, (n_surrogates, len(tri.y))), axis=1)
    stat = tri.permutation_statistic(perms)
    ref = float(tri.permutation_statistic(tri.y)[0])
    # slack so exact ties are not split by rounding
    exceed = int(np.sum(stat >= ref - 1e-11 * max(abs(ref), 1.0)))
    return observed, (1 + exceed) / (1 + n_surrogates)


@dataclass(frozen=True)
class SteMatrix:
    assets: tuple[str, ...]
    values: np.ndarray  # [source, target], bits
    pvalues: np.ndarray
    mask: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def total_bits(self) -> float:
        return float(self.values[self.mask].sum())

    @property
    def n_significant(self) -> int:
        return int(self.mask.sum())

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source", "target", "ste_bits", "pvalue", "significant"])
            p = len(self.assets)
            for a in range(p):
                for b in range(p):
                    if a == b:
                        continue
                    w.writerow(
                        [
                            self.assets[a],
                            self.assets[b],
                            repr(float(self.values[a, b])),
                            repr(float(self.pvalues[a, b])),
                            int(bool(self.mask[a, b])),
                        ]
                    )

    @classmethod
    def from_csv(cls, path: str | Path, level: float | None = None) -> "SteMatrix":
        with Path(path).open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or set(rows[0]) != {"source", "target", "ste_bits", "pvalue", "significant"}:
            raise ValueError(f"{path}: not an STE matrix CSV")
        assets: list[str] = []
        for r in rows:
            for key in ("source", "target"):
                if r[key] not in assets:
                    assets.append(r[key])
        pos = {a: i for i, a in enumerate(assets)}
        p = len(assets)
        values = np.zeros((p, p))
        pvalues = np.ones((p, p))
        mask = np.zeros((p, p), dtype=bool)
        for r in rows:
            a, b = pos[r["source"]], pos[r["target"]]
            values[a, b] = float(r["ste_bits"])
            pvalues[a, b] = float(r["pvalue"])
            mask[a, b] = r["significant"].strip() in ("1", "true", "True")
        if level is not None:
            mask = pvalues < level
            np.fill_diagonal(mask, False)
        return cls(tuple(assets), values, pvalues, mask, {"source": str(path)})


def _returns_array(returns) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(returns, ReturnMatrix):
        return returns.values, returns.assets
    arr = np.asarray(returns, dtype=float)
    return arr, tuple(f"x{j}" for j in range(arr.shape[1]))


def pairwise_ste_matrix(
    returns,
    dt: int = 1,
    m: int = 3,
    l: int = 1,
    delta: int = 1,
    level: float = 0.10,
    method: str = "surrogate",
    n_surrogates: int = 100,
    seed: int = 0,
) -> SteMatrix:
    """STE from every series ``X_a(t)`` to every other series shifted ahead, ``Y_b(t + dt)``.

    Rows of the result index sources, columns targets.  With the surrogate
    method the pair ``(a, b)`` draws from its own stream seeded by
    ``(seed, a, b)``, so results do not depend on evaluation order.
    """
    if method not in ("chi2", "surrogate"):
        raise ValueError(f"unknown significance method {method!r}")
    if method == "surrogate" and n_surrogates < 19:
        raise ValueError("need at least 19 surrogates")
    data, assets = _returns_array(returns)
    n, p = data.shape
    if p < 2:
        raise ValueError("need at least two series")
    if dt < 0 or dt >= n:
        raise ValueError(f"lag dt={dt} out of range for {n} observations")
    sources = [symbolize(data[: n - dt, a], m, l) for a in range(p)]
    targets = [symbolize(data[dt:, b], m, l) for b in range(p)]

    values = np.zeros((p, p))
    pvalues = np.ones((p, p))
    for a in range(p):
        for b in range(p):
            if a == b:
                continue
            if method == "chi2":
                est = ste(sources[a], targets[b], delta)
                values[a, b] = est.value
                pvalues[a, b] = chi2_pvalue(est)
            else:
                tri = _TripleIndex(sources[a], targets[b], delta)
                values[a, b], pvalues[a, b] = _surrogate_test(tri, _rng((seed, a, b)), n_surrogates)
    mask = pvalues < level
    np.fill_diagonal(mask, False)
    params = {
        "dt": dt,
        "m": m,
        "l": l,
        "delta": delta,
        "level": level,
        "method": method,
        "n_surrogates": n_surrogates if method == "surrogate" else None,
        "seed": seed if method == "surrogate" else None,
    }
    return SteMatrix(assets, values, pvalues, mask, params)


@dataclass(frozen=True)
class GridCell:
    dt: int
    m: int
    total_bits: float
    count: int


@dataclass
class GridScanReport:
    cells: list[GridCell]
    selected: tuple[int, int]
    tau: float
    matrices: dict = field(default_factory=dict, repr=False)

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["dt", "m", "total_bits", "count", "selected"])
            for c in self.cells:
                w.writerow([c.dt, c.m, repr(c.total_bits), c.count, int((c.dt, c.m) == self.selected)])

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "selected": {"dt": self.selected[0], "m": self.selected[1]},
            "cells": [
                {"dt": c.dt, "m": c.m, "total_bits": c.total_bits, "count": c.count}
                for c in self.cells
            ],
        }


def select_cell(cells: Sequence[GridCell], tau: float = 0.9) -> tuple[int, int]:
    """Among cells whose significant-pair count is at least ``tau`` times the
    best count, take the one carrying the most significant bits."""
    if not cells:
        raise ValueError("empty grid")
    best = max(c.count for c in cells)
    eligible = [c for c in cells if c.count >= tau * best]
    pick = max(eligible, key=lambda c: c.total_bits)  # first wins ties
    return pick.dt, pick.m


def grid_scan(
    returns,
    dts: Iterable[int] = (0, 1, 2, 3),
    ms: Iterable[int] = (2, 3, 4),
    l: int = 1,
    delta: int = 1,
    level: float = 0.10,
    method: str = "surrogate",
    n_surrogates: int = 100,
    seed: int = 0,
    tau: float = 0.9,
) -> GridScanReport:
    dts, ms = list(dts), list(ms)
    if not dts or not ms:
        raise ValueError("grid scan needs at least one dt and one m")
    cells = []
    matrices = {}
    for dt in dts:
        for m in ms:
            mat = pairwise_ste_matrix(returns, dt, m, l, delta, level, method, n_surrogates, seed)
            matrices[(dt, m)] = mat
            cells.append(GridCell(dt, m, mat.total_bits, mat.n_significant))
    return GridScanReport(cells, select_cell(cells, tau), tau, matrices)
