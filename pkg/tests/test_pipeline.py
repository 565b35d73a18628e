from __future__ import annotations

import json

import numpy as np
import pytest

from factorcount.causal_graph import VariablePartition
from factorcount.ingest import load_returns, save_prices
from factorcount.pipeline import PipelineConfig, PipelineError, run_pipeline
from factorcount.symbolic_te import SteMatrix
from factorcount.synthetic import planted_factor_prices


@pytest.fixture(scope="module")
def prices_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "prices.csv"
    save_prices(planted_factor_prices(0), path)
    return path


def strip_time(text):
    data = json.loads(text)
    data["provenance"].pop("generated_at")
    return data


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_planted_two_factor_panel(tmp_path, seed):
    path = tmp_path / "prices.csv"
    save_prices(planted_factor_prices(seed), path)
    rep = run_pipeline(PipelineConfig(input=str(path), method="chi2"))
    assert rep.factors["retained"] == 2
    assert rep.cca["p"] == rep.partition["n_responses"]
    assert rep.cca["q"] == rep.partition["n_predictors"]
    assert rep.cca["p"] + rep.cca["q"] == 20


def test_planted_panel_with_surrogates(tmp_path, prices_csv):
    rep = run_pipeline(PipelineConfig(input=str(prices_csv), out=str(tmp_path)))
    assert rep.factors["retained"] == 2
    # every response should be one of the lagging series
    assert sum(name.startswith("R") for name in rep.partition["responses"]) >= 8


def test_artifacts_round_trip(tmp_path, prices_csv):
    rep = run_pipeline(PipelineConfig(input=str(prices_csv), dt=(0,), m=(2,), method="chi2", out=str(tmp_path)))
    for name in (
        "report.json", "returns.csv", "grid.csv", "ste.csv", "graph.dot", "partition.json",
        "cca.csv", "cca.json", "weights_response.csv", "weights_predictor.csv", "factors.json",
    ):
        assert (tmp_path / name).exists(), name
    assert len((tmp_path / "grid.csv").read_text().splitlines()) == 2  # header + one cell
    returns = load_returns(tmp_path / "returns.csv")
    assert returns.values.shape == (1500, 20)
    ste = SteMatrix.from_csv(tmp_path / "ste.csv")
    assert ste.n_significant == rep.ste["n_significant"]
    part = VariablePartition.load(tmp_path / "partition.json", returns.assets)
    assert part.response_names == rep.partition["responses"]
    cca = json.loads((tmp_path / "cca.json").read_text())
    assert cca == rep.cca
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["factors"]["retained"] == rep.factors["retained"]
    assert len(report["provenance"]["config_sha256"]) == 64


def test_same_config_same_report(tmp_path, prices_csv):
    cfg = PipelineConfig(input=str(prices_csv), dt=(0, 1), m=(2, 3), surrogates=19, seed=5, out=str(tmp_path))
    first = run_pipeline(cfg)
    saved = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    second = run_pipeline(cfg)
    assert strip_time(first.to_json()) == strip_time(second.to_json())
    for name, data in saved.items():
        if name == "report.json":
            assert strip_time(data) == strip_time((tmp_path / name).read_bytes())
        else:
            assert (tmp_path / name).read_bytes() == data, name
    other = run_pipeline(PipelineConfig(input=str(prices_csv), dt=(0, 1), m=(2, 3), surrogates=19, seed=6))
    assert other.provenance["config_sha256"] != first.provenance["config_sha256"]


@pytest.mark.parametrize(
    "change",
    [
        dict(m=(9,)),
        dict(dt=()),
        dict(ste_level=1.5),
        dict(surrogates=5),
        dict(method="kde"),
        dict(standardize="robust"),
        dict(ridge=-1.0),
    ],
)
def test_config_validation(prices_csv, change):
    with pytest.raises(PipelineError) as err:
        run_pipeline(PipelineConfig(input=str(prices_csv), **change))
    assert err.value.stage == "config" and err.value.exit_code == 2


def test_missing_source_and_bad_input(tmp_path):
    with pytest.raises(PipelineError) as err:
        run_pipeline(PipelineConfig())
    assert err.value.stage == "config"
    with pytest.raises(PipelineError) as err:
        run_pipeline(PipelineConfig(input=str(tmp_path / "absent.csv")))
    assert err.value.stage == "ingest" and err.value.exit_code == 10


def test_degenerate_partition_is_a_partition_error(tmp_path):
    # two independent walks: no significant flow, so everything lands on one side
    rng = np.random.default_rng(0)
    prices = 100 * np.exp(np.cumsum(0.01 * rng.standard_normal((400, 2)), axis=0))
    lines = ["timestamp,A,B"] + [f"{i},{float(a)!r},{float(b)!r}" for i, (a, b) in enumerate(prices)]
    (tmp_path / "p.csv").write_text("\n".join(lines) + "\n")
    with pytest.raises(PipelineError) as err:
        run_pipeline(PipelineConfig(input=str(tmp_path / "p.csv"), dt=(1,), m=(3,), method="chi2", ste_level=1e-6))
    assert err.value.stage == "partition" and err.value.exit_code == 30
