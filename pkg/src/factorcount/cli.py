"""Command-line entry point.

Every stage can be run on its own, reading the previous stage's output file,
or all at once with ``pipeline``::

    factorcount ingest --input prices.csv --out returns.csv
    factorcount grid --input returns.csv --dt 0 1 2 3 --m 2 3 4 --out scan/
    factorcount ste --input returns.csv --dt 1 --m 3 --out ste.csv
    factorcount partition --input ste.csv --out partition.json
    factorcount cca --input returns.csv --partition partition.json --dt 1 --out cca/
    factorcount factors --input cca/cca.json --alpha 0.01 --out factors.json
    factorcount pipeline --input prices.csv --out run/
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .causal_graph import VariablePartition, build_graph, partition_by_degree
from .cca import canonical_correlations, lagged_blocks, partitioned_covariance, save_solution, save_weights
from .ingest import (
    compute_returns,
    fetch_prices,
    load_prices,
    load_returns,
    save_prices,
    save_returns,
    stationarity_report,
)
from .pipeline import EXIT_CODES, PipelineConfig, PipelineError, cca_summary, run_pipeline
from .rmt.greatest_root import count_factors
from .rmt.tracy_widom import S_MAX, S_MIN, STEP, TOL, _cache_path, save_table, tw_table
from .symbolic_te import SteMatrix, grid_scan, pairwise_ste_matrix

log = logging.getLogger("factorcount")


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def _probability(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1)")
    return v


def _add_ingest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--standardize", choices=["none", "zscore"], default="none")
    p.add_argument("--missing", choices=["reject", "forward-fill"], default="reject")
    p.add_argument("--adf-level", type=_probability, default=0.01)


def _add_ste_flags(p: argparse.ArgumentParser, grid: bool) -> None:
    if grid:
        p.add_argument("--dt", type=int, nargs="+", default=[0, 1, 2, 3])
        p.add_argument("--m", type=int, nargs="+", default=[2, 3, 4])
        p.add_argument("--tau", type=float, default=0.9)
    else:
        p.add_argument("--dt", type=int, default=1)
        p.add_argument("--m", type=int, default=3)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--ste-level", type=_probability, default=0.10)
    p.add_argument("--method", choices=["surrogate", "chi2"], default="surrogate")
    p.add_argument("--surrogates", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)


def _add_factor_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=_probability, default=0.01)
    p.add_argument("--deflate", type=_on_off, default=True, metavar="{on,off}")
    p.add_argument("--tw-cache", default=None, help="directory holding cached Tracy-Widom tables")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="factorcount", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download prices from an HTTP endpoint into a wide CSV")
    p.add_argument("--endpoint", required=True, help="URL template with {asset}, {start}, {end}")
    p.add_argument("--assets", nargs="+", required=True)
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--end", type=int, required=True)
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("ingest", help="prices CSV -> log returns CSV plus stationarity report")
    p.add_argument("--input", required=True)
    _add_ingest_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("grid", help="scan the (dt, m) grid of STE totals")
    p.add_argument("--input", required=True, help="returns CSV")
    _add_ste_flags(p, grid=True)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("ste", help="pairwise STE matrix at one (dt, m)")
    p.add_argument("--input", required=True, help="returns CSV")
    _add_ste_flags(p, grid=False)
    p.add_argument("--out", required=True)

    p = sub.add_parser("partition", help="STE matrix -> flow graph -> predictor/response split")
    p.add_argument("--input", required=True, help="STE matrix CSV")
    p.add_argument("--ste-level", type=_probability, default=None, help="re-threshold stored p-values")
    p.add_argument("--out", required=True, help="partition JSON; graph.dot is written beside it")

    p = sub.add_parser("cca", help="canonical correlations between the two blocks")
    p.add_argument("--input", required=True, help="returns CSV")
    p.add_argument("--partition", required=True)
    p.add_argument("--dt", type=int, default=1, help="lag between predictors and responses")
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("factors", help="count significant canonical factors")
    p.add_argument("--input", required=True, help="cca.json written by the cca stage")
    _add_factor_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("tw-table", help="build (or refresh) a cached Tracy-Widom table")
    p.add_argument("--beta", type=int, choices=[1, 2], default=1)
    p.add_argument("--s-min", type=float, default=S_MIN)
    p.add_argument("--s-max", type=float, default=S_MAX)
    p.add_argument("--step", type=float, default=STEP)
    p.add_argument("--tol", type=float, default=TOL)
    p.add_argument("--tw-cache", default="tw_cache", help="cache directory (default: %(default)s)")
    p.add_argument("--out", default=None, help="explicit output CSV path instead of the cache")

    p = sub.add_parser("pipeline", help="run every stage end to end")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="prices CSV")
    src.add_argument("--endpoint", help="URL template with {asset}, {start}, {end}")
    p.add_argument("--assets", nargs="+", default=[])
    p.add_argument("--start", type=int, default=None)
    p.add_argument("--end", type=int, default=None)
    _add_ingest_flags(p)
    _add_ste_flags(p, grid=True)
    p.add_argument("--ridge", type=float, default=0.0)
    _add_factor_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _write_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _cmd_fetch(a) -> None:
    table = fetch_prices(a.endpoint, a.assets, a.start, a.end, timeout=a.timeout)
    save_prices(table, a.out)
    log.info("wrote %d x %d prices to %s", table.n, table.p, a.out)


def _cmd_ingest(a) -> None:
    returns = compute_returns(load_prices(a.input, a.missing), a.standardize)
    save_returns(returns, a.out)
    report = stationarity_report(returns, a.adf_level)
    out = Path(a.out)
    _write_json(out.with_name(out.stem + "_stationarity.json"), report.to_dict())
    if not report.all_stationary:
        log.warning("some series fail to reject a unit root at %g", a.adf_level)


def _cmd_grid(a) -> None:
    returns = load_returns(a.input)
    report = grid_scan(
        returns, a.dt, a.m, a.l, a.delta, a.ste_level, a.method, a.surrogates, a.seed, a.tau
    )
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    report.to_csv(out / "grid.csv")
    _write_json(out / "grid.json", report.to_dict())
    dt, m = report.selected
    report.matrices[(dt, m)].to_csv(out / "ste.csv")
    print(f"selected dt={dt} m={m}")


def _cmd_ste(a) -> None:
    ste = pairwise_ste_matrix(
        load_returns(a.input), a.dt, a.m, a.l, a.delta, a.ste_level, a.method, a.surrogates, a.seed
    )
    ste.to_csv(a.out)


def _cmd_partition(a) -> None:
    graph = build_graph(SteMatrix.from_csv(a.input, a.ste_level))
    part = partition_by_degree(graph)
    out = Path(a.out)
    part.save(out)
    out.with_name("graph.dot").write_text(graph.to_dot())
    print(f"predictors={part.sizes[0]} responses={part.sizes[1]}")


def _cmd_cca(a) -> None:
    returns = load_returns(a.input)
    part = VariablePartition.load(a.partition, returns.assets)
    X, Y = lagged_blocks(returns.values, part.predictors, part.responses, a.dt)
    sol = canonical_correlations(partitioned_covariance(X, Y, a.ridge))
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    save_solution(sol, out / "cca.csv")
    save_weights(sol.response_weights, part.response_names, out / "weights_response.csv")
    save_weights(sol.predictor_weights, part.predictor_names, out / "weights_predictor.csv")
    _write_json(out / "cca.json", cca_summary(sol, X.shape[0], a.dt, a.ridge))


def _cmd_factors(a) -> None:
    data = json.loads(Path(a.input).read_text())
    table = tw_table(1, cache_dir=a.tw_cache)
    report = count_factors(data["r2"], data["p"], data["q"], data["n"], a.alpha, a.deflate, table)
    report.save(a.out)
    print(f"retained {report.retained} factor(s) at alpha={a.alpha}")


def _cmd_tw_table(a) -> None:
    if a.out is not None:
        table = tw_table(a.beta, a.s_min, a.s_max, a.step, a.tol)
        save_table(table, a.out)
        path = Path(a.out)
    else:
        table = tw_table(a.beta, a.s_min, a.s_max, a.step, a.tol, cache_dir=a.tw_cache)
        path = _cache_path(a.tw_cache, a.beta, a.s_min, a.s_max, a.step, a.tol)
    print(path)


def _cmd_pipeline(a) -> None:
    config = PipelineConfig(
        input=a.input,
        endpoint=a.endpoint,
        assets=tuple(a.assets),
        start=a.start,
        end=a.end,
        missing=a.missing,
        standardize=a.standardize,
        adf_level=a.adf_level,
        dt=tuple(a.dt),
        m=tuple(a.m),
        l=a.l,
        delta=a.delta,
        ste_level=a.ste_level,
        method=a.method,
        surrogates=a.surrogates,
        seed=a.seed,
        tau=a.tau,
        ridge=a.ridge,
        alpha=a.alpha,
        deflate=a.deflate,
        tw_cache=a.tw_cache,
        out=a.out,
    )
    report = run_pipeline(config)
    sel = report.grid_scan["selected"]
    print(
        f"dt={sel['dt']} m={sel['m']} "
        f"partition=({report.cca['q']}, {report.cca['p']}) factors={report.factors['retained']}"
    )


_COMMANDS = {
    "fetch": (_cmd_fetch, "ingest"),
    "ingest": (_cmd_ingest, "ingest"),
    "grid": (_cmd_grid, "grid"),
    "ste": (_cmd_ste, "grid"),
    "partition": (_cmd_partition, "partition"),
    "cca": (_cmd_cca, "cca"),
    "factors": (_cmd_factors, "factors"),
    "tw-table": (_cmd_tw_table, "tw-table"),
    "pipeline": (_cmd_pipeline, None),
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    func, stage = _COMMANDS[args.command]
    try:
        func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        # KeyError: malformed JSON input for factors; LinAlgError is a ValueError
        print(f"error: [{stage}] {exc}", file=sys.stderr)
        return EXIT_CODES.get(stage, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
