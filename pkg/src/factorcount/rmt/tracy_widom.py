"""Hastings-McLeod solution of Painleve II and the Tracy-Widom laws F1, F2.

``q'' = s q + 2 q^3`` with ``q(s) ~ Ai(s)`` as ``s -> +inf``.  Then

    F2(s) = exp(-int_s^inf (x - s) q(x)^2 dx)
    F1(s) = sqrt(F2(s) exp(-int_s^inf q(x) dx))

The solution is a separatrix: integrating from the right, round-off in the
growing mode is amplified by roughly exp((2 sqrt(2)/3) |s|^{3/2}), so plain
backward integration loses all accuracy before s = -10.  We integrate
backward only down to ``s_match`` (default -3) and solve the rest as a
two-point boundary problem pinned by the left asymptotic expansion

    q(s) ~ sqrt(-s/2) (1 + s^-3/8 - 73 s^-6/128 + 10657 s^-9/1024)
"""

from __future__ import annotations

import csv
import functools
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad, solve_bvp, solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .airy import airy_ai

S_MIN = -13.0
S_MAX = 8.0
STEP = 0.005
TOL = 1e-13
S_MATCH = -3.0


class PainleveError(RuntimeError):
    pass


@dataclass(frozen=True)
class PainleveSolution:
    """Hastings-McLeod ``q`` and its tail integrals on an ascending grid."""

    s: np.ndarray
    q: np.ndarray
    dq: np.ndarray
    int_q: np.ndarray  # int_s^inf q
    int_q2: np.ndarray  # int_s^inf q^2
    int_xq2: np.ndarray  # int_s^inf (x - s) q^2
    meta: dict = field(default_factory=dict)


def _grid(s_min: float, s_max: float, step: float) -> np.ndarray:
    n = (s_max - s_min) / step
    if abs(n - round(n)) > 1e-8 or round(n) < 2:
        raise PainleveError(f"step {step} does not divide [{s_min}, {s_max}]")
    return np.round(s_min + step * np.arange(int(round(n)) + 1), 10)


def left_asymptotic(s):
    """Hastings-McLeod ``q`` for large negative ``s``."""
    s = np.asarray(s, dtype=float)
    return np.sqrt(-s / 2) * (1 + 1 / (8 * s**3) - 73 / (128 * s**6) + 10657 / (1024 * s**9))


def _left_asymptotic_slope(s):
    s = np.asarray(s, dtype=float)
    r = np.sqrt(-s / 2)
    series = 1 + 1 / (8 * s**3) - 73 / (128 * s**6) + 10657 / (1024 * s**9)
    dseries = -3 / (8 * s**4) + 6 * 73 / (128 * s**7) - 9 * 10657 / (1024 * s**10)
    return -series / (4 * r) + r * dseries


def _boundary_state(s0: float) -> list[float]:
    ai, aip = airy_ai(s0)
    # closed forms for the Airy tail integrals
    int_q2 = aip**2 - s0 * ai**2
    int_xq2 = (2 * s0**2 * ai**2 - 2 * s0 * aip**2 - ai * aip) / 3
    int_q = quad(lambda x: airy_ai(x)[0], s0, s0 + 40.0, epsabs=1e-300, epsrel=1e-13, limit=200)[0]
    # state: q, q', I, I' = -int q^2, J  with I = int (x-s) q^2, J = int q
    return [ai, aip, int_xq2, -int_q2, int_q]


def _rhs(s, y):
    q, dq, _, di, _ = y
    return [dq, s * q + 2 * q**3, di, q * q, -q]


def solve_painleve_ii(
    s_min: float = S_MIN,
    s_max: float = S_MAX,
    step: float = STEP,
    tol: float = TOL,
    s_match: float = S_MATCH,
) -> PainleveSolution:
    """Tabulate the Hastings-McLeod solution on ``s_min, s_min + step, ..., s_max``.

    ``tol`` is the per-step relative tolerance of the backward integration;
    values below what double precision supports are clipped to ``100 eps``
    and recorded in ``meta``.
    """
    if s_max < 5:
        raise PainleveError("s_max must be at least 5 for the Airy boundary condition")
    if step > 0.01 or step <= 0:
        raise PainleveError("step must lie in (0, 0.01]")
    if tol <= 0:
        raise PainleveError("tolerance must be positive")
    grid = _grid(s_min, s_max, step)
    rtol = max(tol, 100 * np.finfo(float).eps)
    s_match = min(max(s_match, s_min), s_max)

    right = grid[grid >= s_match][::-1]
    ivp = solve_ivp(
        _rhs,
        (s_max, right[-1]),
        _boundary_state(s_max),
        method="DOP853",
        rtol=rtol,
        atol=1e-300,
        t_eval=right,
    )
    if ivp.status != 0:
        raise PainleveError(f"backward integration failed: {ivp.message}")
    cols = ivp.y[:, ::-1]  # ascending
    parts = [cols]

    left = grid[grid < s_match]
    if left.size:
        sm = right[-1]
        q_m, dq_m, i_m, di_m, j_m = ivp.y[:, -1]
        mesh = np.append(left, sm)
        guess = np.vstack([left_asymptotic(mesh), _left_asymptotic_slope(mesh)])
        bvp = solve_bvp(
            lambda s, y: np.vstack([y[1], s * y[0] + 2 * y[0] ** 3]),
            lambda ya, yb: np.array([ya[0] - left_asymptotic(mesh[0]), yb[0] - q_m]),
            mesh,
            guess,
            tol=1e-10,
            max_nodes=50 * mesh.size,
        )
        if bvp.status != 0:
            raise PainleveError(f"boundary-value solve failed: {bvp.message}")
        slope_gap = abs(bvp.sol(sm)[1] - dq_m)
        # tail integrals continue as plain quadrature driven by the BVP solution
        quad_ivp = solve_ivp(
            lambda s, y: [y[1], bvp.sol(s)[0] ** 2, -bvp.sol(s)[0]],
            (sm, left[0]),
            [i_m, di_m, j_m],
            method="DOP853",
            rtol=1e-12,
            atol=1e-300,
            t_eval=left[::-1],
        )
        if quad_ivp.status != 0:
            raise PainleveError(f"tail quadrature failed: {quad_ivp.message}")
        qv, dqv = bvp.sol(left)
        integ = quad_ivp.y[:, ::-1]
        parts.insert(0, np.vstack([qv, dqv, integ[0], integ[1], integ[2]]))
    else:
        slope_gap = 0.0

    q, dq, i_xq2, di, i_q = np.hstack(parts)
    s = grid
    if not np.all(np.isfinite(q)) or np.any(np.abs(q) > 10 * (1 + np.sqrt(np.abs(s) / 2))):
        raise PainleveError("Painleve solution blew up")
    meta = {
        "s_min": float(s_min),
        "s_max": float(s_max),
        "step": float(step),
        "tol": float(tol),
        "rtol_used": float(rtol),
        "s_match": float(s_match),
        "match_slope_gap": float(slope_gap),
        "boundary": "Ai(s_max)",
    }
    return PainleveSolution(s, q, dq, i_q, -di, i_xq2, meta)


# ---------------------------------------------------------------------------
# Tracy-Widom tables


@dataclass(frozen=True)
class TracyWidomTable:
    """Tabulated F_beta.

    ``pdf`` follows the convention of published TW tables computed on a grid:
    the difference quotient ``(F(s) - F(s - h)) / h`` of the tabulated cdf.
    Use :func:`tw_density` for the pointwise density.
    """

    beta: int
    s: np.ndarray
    pdf: np.ndarray
    cdf: np.ndarray
    meta: dict = field(default_factory=dict)

    @functools.cached_property
    def _interp(self) -> PchipInterpolator:
        return PchipInterpolator(self.s, self.cdf, extrapolate=False)

    @property
    def step(self) -> float:
        return float(self.s[1] - self.s[0])


def _table_from_cdf(beta: int, s: np.ndarray, cdf: np.ndarray, meta: dict) -> TracyWidomTable:
    h = np.diff(s)
    pdf = np.empty_like(cdf)
    pdf[1:] = np.diff(cdf) / h
    pdf[0] = pdf[1]
    return TracyWidomTable(beta, s, pdf, cdf, meta)


def _cache_path(cache_dir, beta, s_min, s_max, step, tol) -> Path:
    return Path(cache_dir) / f"tw_beta{beta}_{s_min:g}_{s_max:g}_{step:g}_{tol:g}.csv"


def save_table(table: TracyWidomTable, path: str | Path) -> None:
    """Write ``x,y,cdv`` (abscissa, pdf, cdf)."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "cdv"])
        for x, y, c in zip(table.s, table.pdf, table.cdf):
            w.writerow([f"{x:.10f}", repr(float(y)), repr(float(c))])


def load_table(path: str | Path, beta: int, meta: dict | None = None) -> TracyWidomTable:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["x", "y", "cdv"]:
            raise ValueError(f"{path}: expected header x,y,cdv")
        rows = np.array([[float(v) for v in r] for r in reader if r])
    meta = dict(meta or {})
    meta["loaded_from"] = str(path)
    return TracyWidomTable(beta, rows[:, 0], rows[:, 1], rows[:, 2], meta)


@functools.lru_cache(maxsize=16)
def _computed_table(beta, s_min, s_max, step, tol) -> TracyWidomTable:
    sol = solve_painleve_ii(s_min, s_max, step, tol)
    if beta == 2:
        cdf = np.exp(-sol.int_xq2)
    else:
        cdf = np.exp(-0.5 * (sol.int_xq2 + sol.int_q))
    meta = dict(sol.meta, beta=beta)
    table = _table_from_cdf(beta, sol.s, cdf, meta)
    # pass through the on-disk text format so cached and fresh tables agree bit-for-bit
    s = np.array([float(f"{x:.10f}") for x in table.s])
    return TracyWidomTable(beta, s, table.pdf, table.cdf, meta)


def tw_table(
    beta: int = 1,
    s_min: float = S_MIN,
    s_max: float = S_MAX,
    step: float = STEP,
    tol: float = TOL,
    cache_dir: str | Path | None = None,
) -> TracyWidomTable:
    """Tracy-Widom cdf and grid pdf for ``beta`` in {1, 2}.

    With ``cache_dir`` the table is read from, or written to, a CSV keyed by
    ``(beta, s_min, s_max, step, tol)``.
    """
    if beta not in (1, 2):
        raise ValueError("beta must be 1 or 2")
    key = (int(beta), float(s_min), float(s_max), float(step), float(tol))
    if cache_dir is not None:
        path = _cache_path(cache_dir, *key)
        if path.exists():
            return load_table(path, beta, {"beta": beta, "s_min": s_min, "s_max": s_max, "step": step, "tol": tol})
    table = _computed_table(*key)
    if cache_dir is not None:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        save_table(table, path)
    return table


def tw_cdf(table: TracyWidomTable, s):
    """F_beta(s) by monotone cubic interpolation; arguments off the grid are
    clamped to its ends with a warning."""
    s_arr = np.asarray(s, dtype=float)
    lo, hi = table.s[0], table.s[-1]
    if np.any((s_arr < lo) | (s_arr > hi)):
        warnings.warn(f"Tracy-Widom argument outside table range [{lo}, {hi}]; clamped", stacklevel=2)
    out = np.clip(table._interp(np.clip(s_arr, lo, hi)), 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def tw_density(table: TracyWidomTable, s):
    """Pointwise density, the derivative of the interpolated cdf (0 off the grid)."""
    s_arr = np.asarray(s, dtype=float)
    d = table._interp.derivative()(s_arr)
    out = np.where(np.isnan(d), 0.0, np.maximum(d, 0.0))
    return float(out) if np.ndim(out) == 0 else out


def _right_tail(beta: int, s: float) -> float:
    """Leading upper-tail asymptotic of 1 - F_beta (up to a constant)."""
    x = s**1.5
    if beta == 1:
        return math.exp(-2.0 / 3.0 * x) / (4 * math.sqrt(math.pi) * x)
    return math.exp(-4.0 / 3.0 * x) / (16 * math.pi * x)


def tw_sf(table: TracyWidomTable, s: float) -> float:
    """Upper tail ``1 - F_beta(s)``.

    Past the right end of the grid the tail asymptotic is used, matched to the
    table at its last point; left of the grid the survival is taken as 1.
    """
    s = float(s)
    lo, hi = table.s[0], table.s[-1]
    if s <= lo:
        return 1.0
    if s <= hi:
        return float(1.0 - np.clip(table._interp(s), 0.0, 1.0))
    edge = 1.0 - float(table.cdf[-1])
    return edge * _right_tail(table.beta, s) / _right_tail(table.beta, hi)


def tw_quantile(table: TracyWidomTable, u: float) -> float:
    if not 0.0 < u < 1.0:
        raise ValueError(f"probability must be in (0, 1), got {u}")
    lo, hi = float(table.s[0]), float(table.s[-1])
    if u <= table.cdf[0]:
        warnings.warn("quantile below table range; returning left end", stacklevel=2)
        return lo
    if u >= table.cdf[-1]:
        warnings.warn("quantile above table range; returning right end", stacklevel=2)
        return hi
    return float(brentq(lambda x: float(table._interp(x)) - u, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=500))
