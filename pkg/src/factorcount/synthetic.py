"""Synthetic panels with known structure, for tests and demonstrations."""

from __future__ import annotations

import numpy as np

from .ingest import PriceTable


def planted_factor_prices(
    seed: int,
    n: int = 1500,
    n_predictors: int = 10,
    n_responses: int = 10,
    k: int = 2,
    phi: float = 0.8,
    loading: float = 1.0,
    scale: float = 0.01,
) -> PriceTable:
    """Prices whose returns share ``k`` persistent latent factors across a lag.

    The factors follow independent AR(1) processes with coefficient ``phi``
    and unit variance.  Predictor returns load on the factors at time ``t``,
    response returns on the factors at ``t - 1``, so predictors lead the
    responses and a rank-``k`` relation links the two blocks at any lag.
    Predictors are named ``P00, P01, ...`` and responses ``R00, R01, ...``.
    """
    rng = np.random.default_rng(seed)
    g = np.zeros((n + 1, k))
    shocks = rng.standard_normal((n + 1, k))
    for t in range(1, n + 1):
        g[t] = phi * g[t - 1] + np.sqrt(1 - phi**2) * shocks[t]
    A = loading * rng.standard_normal((k, n_predictors))
    B = loading * rng.standard_normal((k, n_responses))
    X = g[1:] @ A + rng.standard_normal((n, n_predictors))
    Y = g[:-1] @ B + rng.standard_normal((n, n_responses))
    returns = scale * np.hstack([X, Y])
    prices = 100.0 * np.cumprod(np.vstack([np.ones(returns.shape[1]), 1 + returns]), axis=0)
    names = [f"P{i:02d}" for i in range(n_predictors)] + [f"R{i:02d}" for i in range(n_responses)]
    return PriceTable(np.arange(n + 1, dtype=np.int64) * 86_400 + 1_600_000_000, tuple(names), prices)


def lag_coupled_panel(seed: int, q: float = 0.15, n: int = 2000, lag: int = 3) -> np.ndarray:
    """Six series in three source/target pairs with a weak ordinal coupling.

    Each column is a random walk, so its one-step ordinal symbols are i.i.d.
    With probability ``q`` the target's up/down move copies the source's move
    ``lag`` steps earlier; there is no other dependence.  With the default
    ``delta = 1`` a scan sees the coupling at ``dt = lag - 1``.
    """
    rng = np.random.default_rng(seed)
    inc = rng.standard_normal((n, 6))
    t = np.arange(lag, n - 1)
    for a, b in ((0, 1), (2, 3), (4, 5)):
        sign = np.sign(inc[:, b])
        copy = rng.random(n) < q
        sign[t + 1] = np.where(copy[t], np.sign(inc[t + 1 - lag, a]), sign[t + 1])
        inc[:, b] = np.abs(inc[:, b]) * sign
    return np.cumsum(inc, axis=0)


def latent_blocks(seed: int, t: int, n: int = 2000, p: int = 20, q: int = 20, strength: float = 1.0):
    """``X`` (n x q) and ``Y`` (n x p) sharing ``t`` latent factors.

    The first ``t`` columns of each block add ``strength`` times a common
    standard normal factor, giving squared canonical correlations of
    ``s^4 / (1 + s^2)^2`` (0.25 at the default strength).
    """
    rng = np.random.default_rng([seed, t])
    z = rng.standard_normal((n, t))
    X, Y = rng.standard_normal((n, q)), rng.standard_normal((n, p))
    X[:, :t] += strength * z
    Y[:, :t] += strength * z
    return X, Y
