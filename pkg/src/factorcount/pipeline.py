"""End-to-end run: prices -> returns -> STE grid -> flow graph -> partition -> CCA -> factor count."""

from __future__ import annotations

import hashlib
import json
import logging
import platform
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .causal_graph import build_graph, partition_by_degree
from .cca import (
    canonical_correlations,
    explained_variance,
    lagged_blocks,
    partitioned_covariance,
    save_solution,
    save_weights,
)
from .ingest import compute_returns, fetch_prices, load_prices, save_returns, stationarity_report
from .rmt.greatest_root import count_factors
from .rmt.tracy_widom import tw_table
from .symbolic_te import grid_scan

log = logging.getLogger(__name__)

EXIT_CODES = {
    "config": 2,
    "ingest": 10,
    "grid": 20,
    "partition": 30,
    "cca": 40,
    "factors": 50,
    "tw-table": 60,
    "output": 70,
}

EXPLAINED_VARIANCE_DEFINITION = "100 * r2_j / sum(r2)"


def cca_summary(sol, n: int, lag: int, ridge: float) -> dict:
    """Everything the factor-count stage needs from a CCA fit."""
    ev = explained_variance(sol) if np.sum(sol.r2) > 0 else np.zeros(sol.k)
    return {
        "n": int(n),
        "p": int(sol.response_weights.shape[0]),
        "q": int(sol.predictor_weights.shape[0]),
        "lag": int(lag),
        "ridge": float(ridge),
        "r2": [float(v) for v in sol.r2],
        "explained_variance_pct": [float(v) for v in ev],
        "explained_variance_definition": EXPLAINED_VARIANCE_DEFINITION,
        "normalization": sol.normalization,
    }


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.stage, 1)


@dataclass
class PipelineConfig:
    input: str | None = None
    endpoint: str | None = None
    assets: tuple[str, ...] = ()
    start: int | None = None
    end: int | None = None
    missing: str = "reject"
    standardize: str = "none"
    adf_level: float = 0.01
    dt: tuple[int, ...] = (0, 1, 2, 3)
    m: tuple[int, ...] = (2, 3, 4)
    l: int = 1
    delta: int = 1
    ste_level: float = 0.10
    method: str = "surrogate"
    surrogates: int = 100
    seed: int = 0
    tau: float = 0.9
    ridge: float = 0.0
    alpha: float = 0.01
    deflate: bool = True
    tw_cache: str | None = None
    out: str | None = None

    def validate(self) -> None:
        problems = []
        if (self.input is None) == (self.endpoint is None):
            problems.append("give exactly one of input or endpoint")
        if self.endpoint is not None and not self.assets:
            problems.append("fetching needs a list of assets")
        if not self.dt or any(d < 0 for d in self.dt):
            problems.append("dt grid must be non-empty and non-negative")
        if not self.m or any(not 2 <= m <= 7 for m in self.m):
            problems.append("m grid values must lie in 2..7")
        if self.l < 1 or self.delta < 1:
            problems.append("l and delta must be >= 1")
        for name in ("ste_level", "alpha", "adf_level"):
            if not 0 < getattr(self, name) < 1:
                problems.append(f"{name} must lie in (0, 1)")
        if self.method not in ("chi2", "surrogate"):
            problems.append("method must be chi2 or surrogate")
        if self.method == "surrogate" and self.surrogates < 19:
            problems.append("need at least 19 surrogates")
        if self.standardize not in ("none", "zscore"):
            problems.append("standardize must be none or zscore")
        if self.missing not in ("reject", "forward-fill"):
            problems.append("missing must be reject or forward-fill")
        if self.ridge < 0:
            problems.append("ridge must be non-negative")
        if not 0 < self.tau <= 1:
            problems.append("tau must lie in (0, 1]")
        if problems:
            raise PipelineError("config", "; ".join(problems))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["assets"] = list(self.assets)
        d["dt"] = list(self.dt)
        d["m"] = list(self.m)
        return d

    def digest(self) -> str:
        # output location does not change results
        payload = {k: v for k, v in self.to_dict().items() if k not in ("out", "tw_cache")}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


@dataclass
class PipelineReport:
    config: dict
    stationarity: dict
    grid_scan: dict
    ste: dict
    partition: dict
    graph: dict
    cca: dict
    factors: dict
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _versions() -> dict:
    return {
        "factorcount": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def run_pipeline(config: PipelineConfig) -> PipelineReport:
    """Run every stage; with ``config.out`` set, also write the report and the
    per-stage files into that directory."""
    config.validate()
    out = Path(config.out) if config.out else None
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise PipelineError("output", str(exc)) from exc

    try:
        if config.input is not None:
            prices = load_prices(config.input, config.missing)
        else:
            prices = fetch_prices(config.endpoint, config.assets, config.start, config.end)
        returns = compute_returns(prices, config.standardize)
        station = stationarity_report(returns, config.adf_level)
    except (OSError, ValueError) as exc:
        raise PipelineError("ingest", str(exc)) from exc
    if not station.all_stationary:
        bad = [a for a, r in zip(station.assets, station.results) if not r.reject]
        log.warning("unit root not rejected at %g for: %s", config.adf_level, ", ".join(bad))

    try:
        grid = grid_scan(
            returns,
            config.dt,
            config.m,
            config.l,
            config.delta,
            config.ste_level,
            config.method,
            config.surrogates,
            config.seed,
            config.tau,
        )
    except ValueError as exc:
        raise PipelineError("grid", str(exc)) from exc
    dt, m = grid.selected
    ste = grid.matrices[(dt, m)]

    graph = build_graph(ste)
    part = partition_by_degree(graph)
    if not part.predictors or not part.responses:
        raise PipelineError("partition", f"degenerate partition {part.sizes}; nothing to regress")

    try:
        X, Y = lagged_blocks(returns.values, part.predictors, part.responses, dt)
        cov = partitioned_covariance(X, Y, config.ridge)
        sol = canonical_correlations(cov)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise PipelineError("cca", str(exc)) from exc
    n, q, p = X.shape[0], X.shape[1], Y.shape[1]

    try:
        table = tw_table(1, cache_dir=config.tw_cache)
    except (OSError, RuntimeError, ValueError) as exc:
        raise PipelineError("tw-table", str(exc)) from exc
    try:
        factors = count_factors(sol, p, q, n, config.alpha, config.deflate, table)
    except ValueError as exc:
        raise PipelineError("factors", str(exc)) from exc

    report = PipelineReport(
        config=config.to_dict(),
        stationarity=station.to_dict(),
        grid_scan=grid.to_dict(),
        ste={
            "dt": dt,
            "m": m,
            "total_bits": ste.total_bits,
            "n_significant": ste.n_significant,
            "params": ste.params,
        },
        partition={
            "predictors": part.predictor_names,
            "responses": part.response_names,
            "n_predictors": len(part.predictors),
            "n_responses": len(part.responses),
        },
        graph={"n_nodes": len(graph.nodes), "n_edges": len(graph.edges), "meta": graph.meta},
        cca=cca_summary(sol, n, dt, config.ridge),
        factors=factors.to_dict(),
        provenance={
            "config_sha256": config.digest(),
            "versions": _versions(),
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        },
    )

    if out is not None:
        try:
            save_returns(returns, out / "returns.csv")
            grid.to_csv(out / "grid.csv")
            ste.to_csv(out / "ste.csv")
            (out / "graph.dot").write_text(graph.to_dot())
            part.save(out / "partition.json")
            save_solution(sol, out / "cca.csv")
            (out / "cca.json").write_text(json.dumps(report.cca, indent=2, sort_keys=True) + "\n")
            save_weights(sol.response_weights, part.response_names, out / "weights_response.csv")
            save_weights(sol.predictor_weights, part.predictor_names, out / "weights_predictor.csv")
            factors.save(out / "factors.json")
            (out / "report.json").write_text(report.to_json())
        except OSError as exc:
            raise PipelineError("output", str(exc)) from exc
    return report
