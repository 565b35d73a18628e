"""Net information-flow graph and the degree rule that splits predictors from responses."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .symbolic_te import SteMatrix

NDI_FLOOR = 1e-15


def ndi(ste_xy: float, ste_yx: float, floor: float = NDI_FLOOR) -> float:
    """Normalized directionality index ``(xy - yx) / (xy + yx)``.

    Positive values mean net flow from X to Y.  Raises ``ValueError`` when
    both flows are below ``floor`` (direction undefined).
    """
    if ste_xy < 0 or ste_yx < 0:
        raise ValueError("STE values must be non-negative")
    if ste_xy < floor and ste_yx < floor:
        raise ValueError("both flows are below the floor; direction undefined")
    return (ste_xy - ste_yx) / (ste_xy + ste_yx)


@dataclass(frozen=True)
class DirectedFlowGraph:
    nodes: tuple[str, ...]
    edges: dict  # (src, dst) index pair -> weight in (0, 1]
    meta: dict = field(default_factory=dict)

    def in_degree(self, i: int) -> int:
        return sum(1 for (_, d) in self.edges if d == i)

    def out_degree(self, i: int) -> int:
        return sum(1 for (s, _) in self.edges if s == i)

    def to_dot(self) -> str:
        lines = ["digraph {"]
        for name in self.nodes:
            lines.append(f"  {_quote(name)};")
        for (s, d), w in sorted(self.edges.items()):
            lines.append(f"  {_quote(self.nodes[s])} -> {_quote(self.nodes[d])} [weight={w:.4f}];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def subgraph(self, names) -> "DirectedFlowGraph":
        keep = [self.nodes.index(n) for n in names]
        pos = {old: new for new, old in enumerate(keep)}
        edges = {(pos[s], pos[d]): w for (s, d), w in self.edges.items() if s in pos and d in pos}
        return DirectedFlowGraph(tuple(self.nodes[i] for i in keep), edges, dict(self.meta))


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def build_graph(ste: SteMatrix, floor: float = NDI_FLOOR) -> DirectedFlowGraph:
    """One edge per pair of nodes with at least one significant direction.

    A direction that is not significant counts as zero flow.  The edge runs
    from the node with the larger flow and carries ``|ndi|``; balanced pairs
    get no edge.
    """
    flow = np.where(ste.mask, ste.values, 0.0)
    p = len(ste.assets)
    edges = {}
    for a in range(p):
        for b in range(a + 1, p):
            if not (ste.mask[a, b] or ste.mask[b, a]):
                continue
            try:
                d = ndi(flow[a, b], flow[b, a], floor)
            except ValueError:
                continue
            if d > 0:
                edges[(a, b)] = d
            elif d < 0:
                edges[(b, a)] = -d
    meta = {
        "presence": "significant in at least one direction",
        "nonsignificant_flow": 0.0,
        "orientation": "positive ndi points source -> target",
        "weight": "abs(ndi)",
        "ties": "no edge",
    }
    return DirectedFlowGraph(tuple(ste.assets), edges, meta)


@dataclass(frozen=True)
class VariablePartition:
    nodes: tuple[str, ...]
    predictors: tuple[int, ...]
    responses: tuple[int, ...]

    @property
    def predictor_names(self) -> list[str]:
        return [self.nodes[i] for i in self.predictors]

    @property
    def response_names(self) -> list[str]:
        return [self.nodes[i] for i in self.responses]

    @property
    def sizes(self) -> tuple[int, int]:
        return len(self.predictors), len(self.responses)

    def to_json(self) -> str:
        return json.dumps({"predictors": self.predictor_names, "responses": self.response_names}, indent=2)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path, nodes=None) -> "VariablePartition":
        data = json.loads(Path(path).read_text())
        preds, resps = list(data["predictors"]), list(data["responses"])
        if set(preds) & set(resps):
            raise ValueError("predictor and response sets overlap")
        nodes = tuple(nodes) if nodes is not None else tuple(preds + resps)
        missing = set(preds + resps) - set(nodes)
        if missing:
            raise ValueError(f"partition names not present among nodes: {sorted(missing)}")
        return cls(nodes, tuple(nodes.index(n) for n in preds), tuple(nodes.index(n) for n in resps))


def partition_by_degree(g: DirectedFlowGraph) -> VariablePartition:
    """Responses have in-degree >= out-degree; everything else predicts."""
    indeg = np.zeros(len(g.nodes), dtype=int)
    outdeg = np.zeros(len(g.nodes), dtype=int)
    for s, d in g.edges:
        outdeg[s] += 1
        indeg[d] += 1
    responses = tuple(int(i) for i in np.flatnonzero(indeg >= outdeg))
    predictors = tuple(int(i) for i in np.flatnonzero(indeg < outdeg))
    return VariablePartition(g.nodes, predictors, responses)
