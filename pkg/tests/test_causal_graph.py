from __future__ import annotations

import json

import numpy as np
import pytest

from factorcount.causal_graph import (
    DirectedFlowGraph,
    VariablePartition,
    build_graph,
    ndi,
    partition_by_degree,
)
from factorcount.symbolic_te import SteMatrix


def matrix(names, values, mask=None):
    values = np.asarray(values, dtype=float)
    mask = values > 0 if mask is None else np.asarray(mask)
    return SteMatrix(tuple(names), values, np.where(mask, 0.001, 0.5), mask)


def test_ndi_values():
    assert ndi(0.3, 0.1) == pytest.approx(0.5)
    assert ndi(0.1, 0.3) == pytest.approx(-0.5)
    assert ndi(0.2, 0.0) == 1.0
    with pytest.raises(ValueError):
        ndi(0.0, 0.0)
    with pytest.raises(ValueError):
        ndi(-0.1, 0.2)


def test_chain_partition():
    g = build_graph(matrix("ABC", [[0, 0.4, 0], [0, 0, 0.3], [0, 0, 0]]))
    assert set(g.edges) == {(0, 1), (1, 2)}
    part = partition_by_degree(g)
    assert part.predictor_names == ["A"]
    assert part.response_names == ["B", "C"]
    assert part.sizes == (1, 2)


def test_orientation_weight_and_ties():
    vals = [[0, 0.3, 0.2], [0.1, 0, 0], [0.2, 0, 0]]
    g = build_graph(matrix("XYZ", vals))
    assert g.edges == {(0, 1): pytest.approx(0.5)}  # X<->Z balanced: no edge
    # a direction that is present but not significant counts as zero flow
    mask = np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]], dtype=bool)
    g2 = build_graph(matrix("XYZ", vals, mask))
    assert g2.edges == {(0, 1): 1.0}


def test_dot_output():
    g = build_graph(matrix(["a", 'b"q'], [[0, 0.2], [0.1, 0]]))
    dot = g.to_dot()
    assert dot.startswith("digraph {")
    assert '"a" -> "b\\"q" [weight=0.3333];' in dot
    assert g.in_degree(1) == 1 and g.out_degree(0) == 1


def test_subgraph():
    g = DirectedFlowGraph(("a", "b", "c"), {(0, 1): 1.0, (1, 2): 0.5})
    sub = g.subgraph(["b", "c"])
    assert sub.nodes == ("b", "c")
    assert sub.edges == {(0, 1): 0.5}


def test_partition_covers_nodes_disjointly():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = int(rng.integers(2, 9))
        vals = rng.random((p, p)) * (rng.random((p, p)) < 0.4)
        np.fill_diagonal(vals, 0)
        part = partition_by_degree(build_graph(matrix([f"n{i}" for i in range(p)], vals)))
        assert sorted(part.predictors + part.responses) == list(range(p))
        assert not set(part.predictors) & set(part.responses)


def test_partition_round_trip(tmp_path):
    part = VariablePartition(("a", "b", "c", "d"), (0, 2), (1, 3))
    part.save(tmp_path / "part.json")
    assert json.loads((tmp_path / "part.json").read_text()) == {"predictors": ["a", "c"], "responses": ["b", "d"]}
    back = VariablePartition.load(tmp_path / "part.json", part.nodes)
    assert back == part
    with pytest.raises(ValueError):
        VariablePartition.load(tmp_path / "part.json", ("a", "b"))
