"""Largest-eigenvalue tests: Wishart identity test and the greatest-root test
for canonical correlations, with the sequential factor count built on it.

The greatest-root law ``theta(p, m, n)`` is that of the largest eigenvalue of
``(A + B)^{-1} B`` for independent ``A ~ W_p(m, I)``, ``B ~ W_p(n, I)``.  Its
logit ``W = log(theta / (1 - theta))`` is approximately ``mu + sigma * TW1``.
Under independence of the two CCA blocks, the largest squared canonical
correlation is ``theta(p, n - q - 1, q)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .tracy_widom import TracyWidomTable, tw_sf, tw_table


def _default_table(table: TracyWidomTable | None) -> TracyWidomTable:
    if table is None:
        return tw_table(1)
    if table.beta != 1:
        raise ValueError("real-valued tests use the beta = 1 table")
    return table


def wishart_centering(n: int, p: int) -> tuple[float, float]:
    """Second-order centering and scaling for the top eigenvalue of ``W_p(n, I)``."""
    a, b = math.sqrt(n - 0.5), math.sqrt(p - 0.5)
    mu = (a + b) ** 2
    sigma = (a + b) * (1 / a + 1 / b) ** (1 / 3)
    return mu, sigma


def wishart_largest_eig_pvalue(n: int, p: int, lambda1: float, table: TracyWidomTable | None = None) -> float:
    """P-value of the largest eigenvalue ``lambda1`` of ``X'X / n`` under ``Sigma = I``."""
    if n < 2 or p < 2:
        raise ValueError("n and p must be at least 2")
    if not lambda1 > 0:
        raise ValueError("eigenvalue must be positive")
    mu, sigma = wishart_centering(n, p)
    return tw_sf(_default_table(table), (n * lambda1 - mu) / sigma)


@dataclass(frozen=True)
class GreatestRootParams:
    p: int
    m: int
    n: int
    gamma: float
    phi: float
    mu: float
    sigma: float


def greatest_root_params(p: int, m: int, n: int) -> GreatestRootParams:
    """Centering and scale of the logit greatest root of ``theta(p, m, n)``.

    Requires ``m >= p``: otherwise ``A`` is singular and the greatest root
    equals 1 almost surely, so there is nothing to approximate.
    """
    if p < 1 or n < 1 or m < 1:
        raise ValueError("dimensions must be positive")
    if m < p:
        raise ValueError(f"theta({p}, {m}, {n}) is degenerate: need m >= p")
    total = m + n - 1
    lo = (min(p, n) - 0.5) / total
    hi = (max(p, n) - 0.5) / total
    if not (0 < lo < 1 and 0 < hi < 1):
        raise ValueError(f"angle arguments outside (0, 1) for theta({p}, {m}, {n})")
    gamma = 2 * math.asin(math.sqrt(lo))
    phi = 2 * math.asin(math.sqrt(hi))
    mu = 2 * math.log(math.tan((phi + gamma) / 2))
    sigma3 = 16 / total**2 / (math.sin(phi + gamma) ** 2 * math.sin(phi) * math.sin(gamma))
    return GreatestRootParams(p, m, n, gamma, phi, mu, sigma3 ** (1 / 3))


def logit(theta: float) -> float:
    return math.log(theta / (1 - theta))


def greatest_root_pvalue(params: GreatestRootParams, theta: float, table: TracyWidomTable | None = None) -> float:
    if not 0 < theta < 1:
        raise ValueError(f"greatest root must lie in (0, 1), got {theta}")
    return tw_sf(_default_table(table), (logit(theta) - params.mu) / params.sigma)


@dataclass(frozen=True)
class FactorTest:
    j: int
    r2: float
    statistic: float | None  # logit of r2; None when r2 is 0 or 1
    params: GreatestRootParams
    pvalue: float


@dataclass(frozen=True)
class FactorCountReport:
    rows: tuple[FactorTest, ...]
    retained: int
    alpha: float
    deflate: bool
    meta: dict = field(default_factory=dict)

    @property
    def pvalues(self) -> np.ndarray:
        return np.array([r.pvalue for r in self.rows])

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "deflate": self.deflate,
            "retained": self.retained,
            "meta": self.meta,
            "factors": [
                {
                    "j": r.j,
                    "r2": r.r2,
                    "logit": r.statistic,
                    "pvalue": r.pvalue,
                    "params": asdict(r.params),
                }
                for r in self.rows
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def count_factors(
    r2,
    p: int,
    q: int,
    n: int,
    alpha: float = 0.01,
    deflate: bool = True,
    table: TracyWidomTable | None = None,
) -> FactorCountReport:
    """Number of significant canonical pairs.

    ``r2`` holds the squared canonical correlations in descending order (or a
    :class:`CcaSolution`), ``p`` responses, ``q`` predictors, ``n`` samples.
    Factor ``j`` is tested against ``theta(p-j+1, n-q-1, q-j+1)`` when
    ``deflate`` is set, otherwise every factor uses ``theta(p, n-q-1, q)``.
    The count is the length of the leading run of p-values below ``alpha``.
    """
    r2 = np.asarray(getattr(r2, "r2", r2), dtype=float)
    if n <= p + q + 1:
        raise ValueError(f"need n > p + q + 1, got n={n}, p={p}, q={q}")
    if len(r2) > min(p, q):
        raise ValueError("more canonical correlations than min(p, q)")
    if np.any(np.diff(r2) > 1e-12):
        raise ValueError("squared canonical correlations must be in descending order")
    table = _default_table(table)
    rows = []
    for j, theta in enumerate(r2, start=1):
        shrink = j - 1 if deflate else 0
        params = greatest_root_params(p - shrink, n - q - 1, q - shrink)
        if theta >= 1:
            stat, pv = None, 0.0
        elif theta <= 0:
            stat, pv = None, 1.0
        else:
            stat = logit(theta)
            pv = tw_sf(table, (stat - params.mu) / params.sigma)
        rows.append(FactorTest(j, float(theta), stat, params, float(pv)))
    retained = 0
    for row in rows:
        if row.pvalue >= alpha:
            break
        retained += 1
    meta = {
        "null": "theta(p-j+1, n-q-1, q-j+1)" if deflate else "theta(p, n-q-1, q)",
        "p": p,
        "q": q,
        "n": n,
        "tw_beta": table.beta,
    }
    return FactorCountReport(tuple(rows), retained, alpha, deflate, meta)
