"""Canonical correlation analysis as reduced-rank regression with weight ``S_YY^{-1}``.

Notation: ``q`` predictors (the X block), ``p`` responses (the Y block),
``k = min(p, q)`` canonical pairs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class PartitionedCovariance:
    sxx: np.ndarray  # q x q
    syy: np.ndarray  # p x p
    sxy: np.ndarray  # q x p
    n: int
    ridge: float = 0.0
    mean_x: np.ndarray | None = None
    mean_y: np.ndarray | None = None
    singular: bool = False  # too few samples for full-rank blocks without ridge

    @property
    def syx(self) -> np.ndarray:
        return self.sxy.T

    @property
    def q(self) -> int:
        return self.sxx.shape[0]

    @property
    def p(self) -> int:
        return self.syy.shape[0]


def partitioned_covariance(X, Y, ridge: float = 0.0) -> PartitionedCovariance:
    """Centered sample covariance blocks (divisor ``n - 1``) with ``ridge * I``
    added to both diagonal blocks."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[0] != Y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two observations")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    mx, my = X.mean(axis=0), Y.mean(axis=0)
    Xc, Yc = X - mx, Y - my
    sxx = Xc.T @ Xc / (n - 1)
    syy = Yc.T @ Yc / (n - 1)
    sxy = Xc.T @ Yc / (n - 1)
    if ridge:
        sxx = sxx + ridge * np.eye(sxx.shape[0])
        syy = syy + ridge * np.eye(syy.shape[0])
    singular = ridge == 0 and (n <= X.shape[1] or n <= Y.shape[1])
    return PartitionedCovariance(sxx, syy, sxy, n, ridge, mx, my, singular)


def _inv_sqrt(S: np.ndarray, name: str) -> np.ndarray:
    """Symmetric ``S^{-1/2}`` from an eigendecomposition."""
    w, V = np.linalg.eigh((S + S.T) / 2)
    if w[0] <= 1e-12 * max(w[-1], np.finfo(float).tiny):
        raise NotPositiveDefiniteError(
            f"{name} is not positive definite (smallest eigenvalue {w[0]:.3g}); "
            "add a ridge or use fewer variables"
        )
    return (V / np.sqrt(w)) @ V.T


@dataclass(frozen=True)
class CcaSolution:
    r2: np.ndarray  # descending squared canonical correlations, length k
    response_weights: np.ndarray  # p x k, columns b_j
    predictor_weights: np.ndarray  # q x k, columns a_j
    normalization: str = "unit sample variance; largest |b_j| component positive"
    meta: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.r2)


def canonical_correlations(S: PartitionedCovariance) -> CcaSolution:
    """Squared canonical correlations and weights by SVD of the whitened
    cross-covariance ``S_XX^{-1/2} S_XY S_YY^{-1/2}``."""
    wx = _inv_sqrt(S.sxx, "S_XX")
    wy = _inv_sqrt(S.syy, "S_YY")
    K = wx @ S.sxy @ wy
    U, sv, Vt = np.linalg.svd(K, full_matrices=False)
    k = min(S.p, S.q)
    U, sv, V = U[:, :k], sv[:k], Vt[:k].T
    a = wx @ U
    b = wy @ V
    idx = np.argmax(np.abs(b), axis=0)
    signs = np.sign(b[idx, np.arange(k)])
    signs[signs == 0] = 1.0
    a, b = a * signs, b * signs
    r2 = np.clip(sv**2, 0.0, 1.0)
    return CcaSolution(r2, b, a, meta={"n": S.n, "ridge": S.ridge, "p": S.p, "q": S.q})


def explained_variance(sol: CcaSolution) -> np.ndarray:
    """Share of each squared canonical correlation in their sum, in percent."""
    total = float(np.sum(sol.r2))
    if total <= 0:
        raise ValueError("all canonical correlations are zero")
    return 100.0 * np.asarray(sol.r2) / total


@dataclass(frozen=True)
class RrrCoefficients:
    C: np.ndarray  # p x q
    intercept: np.ndarray  # p
    rank: int


def reduced_rank_coefficients(
    S: PartitionedCovariance,
    sol: CcaSolution,
    t: int,
    means: tuple[np.ndarray, np.ndarray] | None = None,
) -> RrrCoefficients:
    """Rank-``t`` coefficient matrix ``sum_{j<=t} S_YY b_j b_j' S_YX S_XX^{-1}``.

    With ``t = k`` this is the least-squares ``S_YX S_XX^{-1}``.
    ``means`` defaults to the sample means stored on ``S``.
    """
    if not 0 <= t <= sol.k:
        raise ValueError(f"rank t={t} outside 0..{sol.k}")
    if means is None:
        if S.mean_x is None or S.mean_y is None:
            raise ValueError("means are required when the covariance carries none")
        means = (S.mean_x, S.mean_y)
    mean_x, mean_y = (np.asarray(m, dtype=float) for m in means)
    B = sol.response_weights[:, :t]
    ols = np.linalg.solve(S.sxx, S.sxy).T  # p x q
    C = S.syy @ B @ B.T @ ols
    return RrrCoefficients(C, mean_y - C @ mean_x, t)


def forecast(coeff: RrrCoefficients, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != coeff.C.shape[1]:
        raise ValueError(f"expected {coeff.C.shape[1]} predictors, got {x.shape[-1]}")
    return coeff.intercept + x @ coeff.C.T


def weighted_residual(S: PartitionedCovariance, C: np.ndarray, gamma: np.ndarray | None = None) -> float:
    """Sample criterion ``tr[G (S_YY - C S_XY - S_YX C' + C S_XX C')]``, ``G = S_YY^{-1}`` by default."""
    G = np.linalg.inv(S.syy) if gamma is None else gamma
    resid = S.syy - C @ S.sxy - S.syx @ C.T + C @ S.sxx @ C.T
    return float(np.trace(G @ resid))


def lagged_blocks(values: np.ndarray, predictors: Sequence[int], responses: Sequence[int], lag: int):
    """Predictors at ``t`` against responses at ``t + lag``."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if not 0 <= lag < n:
        raise ValueError(f"lag {lag} out of range")
    X = values[: n - lag][:, list(predictors)]
    Y = values[lag:][:, list(responses)]
    return X, Y


def save_solution(sol: CcaSolution, path: str | Path) -> None:
    ev = explained_variance(sol) if np.sum(sol.r2) > 0 else np.zeros(sol.k)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["factor", "r2", "explained_variance_pct"])
        for j, (r, e) in enumerate(zip(sol.r2, ev), start=1):
            w.writerow([j, repr(float(r)), repr(float(e))])


def save_weights(weights: np.ndarray, names: Sequence[str], path: str | Path) -> None:
    """Rows are variables, columns factor indices (1-based)."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["asset", *(str(j) for j in range(1, weights.shape[1] + 1))])
        for name, row in zip(names, weights):
            w.writerow([name, *(repr(float(v)) for v in row)])
