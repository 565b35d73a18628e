"""Price panels: loading, fetching, returns and stationarity checks.

Prices come in as a wide CSV (``timestamp,<asset1>,...,<assetP>``) or from an
HTTP endpoint serving one JSON array of ``{"t": epoch, "p": price}`` per
asset.  Returns follow

    R_k(t) = (Z_k(t+1) - Z_k(t)) / Z_k(t)

where ``Z`` is the raw price (``mode="none"``) or the z-scored price
(``mode="zscore"``).
"""

from __future__ import annotations

import csv
import json
import math
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np


class IngestError(ValueError):
    """Raised for malformed inputs or contract violations in this module."""


@dataclass(frozen=True)
class PriceTable:
    timestamps: np.ndarray  # epoch seconds, strictly increasing
    assets: tuple[str, ...]
    values: np.ndarray  # n x p

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "assets", tuple(self.assets))
        n, p = vals.shape if vals.ndim == 2 else (0, 0)
        if vals.ndim != 2 or len(self.assets) != p or len(ts) != n:
            raise IngestError("timestamps, assets and values have inconsistent shapes")
        if p < 2 or n < 3:
            raise IngestError(f"need at least 3 rows and 2 assets, got n={n}, p={p}")
        if np.any(np.diff(ts) <= 0):
            raise IngestError("timestamps must be strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise IngestError("price table contains non-finite values")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ReturnMatrix:
    assets: tuple[str, ...]
    values: np.ndarray  # (n-1) x p
    meta: dict = field(default_factory=dict)
    timestamps: np.ndarray | None = None  # stamp of the later price in each return

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "assets", tuple(self.assets))
        if vals.ndim != 2 or vals.shape[1] != len(self.assets):
            raise IngestError("return values must be an n x p matrix matching assets")
        if not np.all(np.isfinite(vals)):
            raise IngestError("return matrix contains non-finite values")
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype=np.int64)
            if len(ts) != vals.shape[0]:
                raise IngestError("timestamps do not match return rows")
            object.__setattr__(self, "timestamps", ts)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column(self, asset: str) -> np.ndarray:
        return self.values[:, self.assets.index(asset)]


@dataclass(frozen=True)
class AdfResult:
    """One entry of a stationarity report."""

    statistic: float
    pvalue: float
    lags: int
    nobs: int
    level: float

    @property
    def reject(self) -> bool:
        return self.pvalue < self.level


@dataclass(frozen=True)
class StationarityReport:
    assets: tuple[str, ...]
    results: tuple[AdfResult, ...]
    level: float

    @property
    def all_stationary(self) -> bool:
        return all(r.reject for r in self.results)

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "all_stationary": self.all_stationary,
            "assets": [
                {
                    "asset": a,
                    "statistic": r.statistic,
                    "pvalue": r.pvalue,
                    "lags": r.lags,
                    "reject": r.reject,
                }
                for a, r in zip(self.assets, self.results)
            ],
        }


# ---------------------------------------------------------------------------
# loading


def parse_timestamp(text: str) -> int:
    """Epoch seconds from an integer string or an ISO-8601 timestamp (UTC if naive)."""
    text = text.strip()
    if not text:
        raise IngestError("empty timestamp")
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        pass
    else:
        if value.is_integer():
            return int(value)
        raise IngestError(f"fractional epoch timestamp not supported: {text!r}")
    iso = text[:-1] + "+00:00" if text.endswith("Z") else text
    try:
        dt = datetime.fromisoformat(iso)
    except ValueError as exc:
        raise IngestError(f"unparseable timestamp {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def load_prices(path: str | Path, policy: str = "reject") -> PriceTable:
    """Read a wide price CSV.

    Parameters
    ----------
    path : str or Path
        CSV with header ``timestamp,<asset1>,...``.
    policy : {"reject", "forward-fill"}
        What to do with empty cells.  ``forward-fill`` copies the previous
        row's value; an empty cell in the first row is still an error.
    """
    if policy not in ("reject", "forward-fill"):
        raise IngestError(f"unknown missing-value policy {policy!r}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise IngestError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0].lower() != "timestamp":
        raise IngestError(f"{path}: header must be 'timestamp,<asset1>,...,<assetP>'")
    assets = header[1:]
    if len(set(assets)) != len(assets):
        raise IngestError(f"{path}: duplicate asset names in header")

    timestamps: list[int] = []
    values = np.full((len(rows) - 1, len(assets)), np.nan)
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise IngestError(f"{path}: row {i + 2} has {len(row)} fields, expected {len(header)}")
        timestamps.append(parse_timestamp(row[0]))
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                if policy == "reject":
                    raise IngestError(f"{path}: missing value at row {i + 2}, asset {assets[j]!r}")
                if i == 0:
                    raise IngestError(f"{path}: cannot forward-fill a missing value in the first row")
                values[i, j] = values[i - 1, j]
                continue
            try:
                values[i, j] = float(cell)
            except ValueError as exc:
                raise IngestError(f"{path}: bad number {cell!r} at row {i + 2}") from exc

    ts = np.asarray(timestamps, dtype=np.int64)
    if np.any(np.diff(ts) <= 0):
        raise IngestError(f"{path}: timestamps are not strictly increasing")
    return PriceTable(ts, assets, values)


def fetch_prices(
    endpoint: str,
    assets: Sequence[str],
    start: int | None = None,
    end: int | None = None,
    timeout: float = 30.0,
) -> PriceTable:
    """Download one price series per asset and merge them on common timestamps.

    ``endpoint`` is a URL template; ``{asset}``, ``{start}`` and ``{end}``
    are substituted.  Each response must be a JSON array of objects with keys
    ``t`` (epoch seconds) and ``p`` (price).
    """
    series: list[dict[int, float]] = []
    for asset in assets:
        url = endpoint.format(
            asset=asset,
            start="" if start is None else int(start),
            end="" if end is None else int(end),
        )
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                body = resp.read()
        except urllib.error.HTTPError as exc:
            if exc.code == 404:
                raise IngestError(f"asset {asset!r} not found at {url}") from exc
            raise IngestError(f"HTTP {exc.code} fetching {url}") from exc
        except (urllib.error.URLError, OSError) as exc:
            raise IngestError(f"network failure fetching {url}: {exc}") from exc
        try:
            payload = json.loads(body)
            points = {int(pt["t"]): float(pt["p"]) for pt in payload}
        except (ValueError, TypeError, KeyError) as exc:
            raise IngestError(f"could not parse price payload for {asset!r}") from exc
        if start is not None or end is not None:
            lo = -math.inf if start is None else start
            hi = math.inf if end is None else end
            points = {t: v for t, v in points.items() if lo <= t <= hi}
        series.append(points)

    common = sorted(set.intersection(*(set(s) for s in series))) if series else []
    if not common:
        raise IngestError("fetched series have no timestamps in common")
    values = np.array([[s[t] for s in series] for t in common])
    return PriceTable(np.asarray(common, dtype=np.int64), assets, values)


def save_prices(table: PriceTable, path: str | Path) -> None:
    _write_wide_csv(path, table.timestamps, table.assets, table.values)


def _write_wide_csv(path, timestamps, assets, values) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", *assets])
        for t, row in zip(timestamps, values):
            w.writerow([int(t), *(repr(float(v)) for v in row)])


# ---------------------------------------------------------------------------
# returns


def compute_returns(prices: PriceTable, mode: str = "none", floor: float = 1e-12) -> ReturnMatrix:
    """Simple one-step returns of raw or z-scored prices.

    Raises
    ------
    IngestError
        If a divisor ``|Z_k(t)|`` falls below ``floor``.  Z-scored prices
        cross zero by construction, so ``mode="zscore"`` usually fails on
        real data; it is there to reproduce the literal recipe.
    """
    if mode not in ("none", "zscore"):
        raise IngestError(f"unknown standardization mode {mode!r}")
    z = prices.values
    if mode == "zscore":
        sd = z.std(axis=0, ddof=1)
        if np.any(sd == 0):
            raise IngestError("cannot z-score a constant price series")
        z = (z - z.mean(axis=0)) / sd
    denom = z[:-1]
    bad = np.abs(denom) < floor
    if bad.any():
        t, k = np.argwhere(bad)[0]
        raise IngestError(
            f"division by ~zero in returns: |Z| < {floor:g} for asset "
            f"{prices.assets[k]!r} at row {t}"
        )
    values = (z[1:] - z[:-1]) / denom
    return ReturnMatrix(
        prices.assets,
        values,
        meta={"standardize": mode, "floor": floor},
        timestamps=prices.timestamps[1:],
    )


def save_returns(returns: ReturnMatrix, path: str | Path) -> None:
    ts = returns.timestamps if returns.timestamps is not None else np.arange(1, returns.n + 1)
    _write_wide_csv(path, ts, returns.assets, returns.values)


def load_returns(path: str | Path) -> ReturnMatrix:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2 or rows[0][0].strip().lower() != "timestamp":
        raise IngestError(f"{path}: not a returns CSV")
    assets = [h.strip() for h in rows[0][1:]]
    try:
        ts = [parse_timestamp(r[0]) for r in rows[1:]]
        values = np.array([[float(c) for c in r[1:]] for r in rows[1:]])
    except ValueError as exc:
        raise IngestError(f"{path}: malformed returns CSV") from exc
    return ReturnMatrix(assets, values, meta={"source": str(path)}, timestamps=ts)


# ---------------------------------------------------------------------------
# augmented Dickey-Fuller, constant and no trend

# Quantiles of the Dickey-Fuller t statistic with a constant (Fuller 1976),
# rows by sample size, columns by the probabilities below.
_DF_PROBS = np.array([0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99])
_DF_SIZES = np.array([25, 50, 100, 250, 500, np.inf])
_DF_QUANTILES = np.array(
    [
        [-3.75, -3.33, -3.00, -2.62, -0.37, 0.00, 0.34, 0.72],
        [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66],
        [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63],
        [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62],
        [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61],
        [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60],
    ]
)


def df_critical_values(nobs: int) -> np.ndarray:
    """DF quantiles at ``_DF_PROBS`` for ``nobs``, linear in 1/n between table rows."""
    inv = 1.0 / _DF_SIZES
    x = 1.0 / max(nobs, 1)
    if x >= inv[0]:
        return _DF_QUANTILES[0].copy()
    # inv is decreasing; np.interp needs increasing abscissae
    return np.array(
        [np.interp(x, inv[::-1], _DF_QUANTILES[::-1, j]) for j in range(len(_DF_PROBS))]
    )


def df_pvalue(stat: float, nobs: int) -> float:
    q = df_critical_values(nobs)
    if stat <= q[0]:
        slope = (_DF_PROBS[1] - _DF_PROBS[0]) / (q[1] - q[0])
        p = _DF_PROBS[0] + slope * (stat - q[0])
    elif stat >= q[-1]:
        slope = (_DF_PROBS[-1] - _DF_PROBS[-2]) / (q[-1] - q[-2])
        p = _DF_PROBS[-1] + slope * (stat - q[-1])
    else:
        p = float(np.interp(stat, q, _DF_PROBS))
    return float(np.clip(p, 0.001, 0.999))


def adf_test(series, level: float = 0.01, lags: int | None = None) -> AdfResult:
    """Augmented Dickey-Fuller unit-root test with a constant.

    Regresses ``dy_t`` on ``[1, y_{t-1}, dy_{t-1}, ..., dy_{t-k}]`` with
    ``k = floor((n-1)**(1/3))`` unless ``lags`` is given, and reports the
    t statistic of ``y_{t-1}``.  Small p-values reject the unit root.
    """
    y = np.asarray(series, dtype=float)
    n = len(y)
    if n < 25:
        raise IngestError(f"ADF needs at least 25 observations, got {n}")
    if not np.all(np.isfinite(y)):
        raise IngestError("ADF input contains non-finite values")
    k = int(math.floor((n - 1) ** (1.0 / 3.0))) if lags is None else int(lags)
    dy = np.diff(y)
    target = dy[k:]
    cols = [np.ones_like(target), y[k:-1]]
    for i in range(1, k + 1):
        cols.append(dy[k - i : len(dy) - i])
    design = np.column_stack(cols)
    nobs, ncol = design.shape

    if np.ptp(y) == 0 or np.linalg.matrix_rank(design) < ncol:
        raise IngestError("ADF regression is singular (constant series?)")
    beta, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ beta
    sigma2 = resid @ resid / (nobs - ncol)
    cov = sigma2 * np.linalg.inv(design.T @ design)
    stat = float(beta[1] / math.sqrt(cov[1, 1]))
    return AdfResult(stat, df_pvalue(stat, nobs), k, nobs, level)


def stationarity_report(returns: ReturnMatrix, level: float = 0.01) -> StationarityReport:
    results = tuple(adf_test(returns.values[:, j], level) for j in range(returns.p))
    return StationarityReport(returns.assets, results, level)
