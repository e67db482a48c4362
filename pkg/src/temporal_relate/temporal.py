"""Time-varying ego series and their intersection/union aggregates."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from .graph import EgoNetwork


class AggModel(str, enum.Enum):
    INTERSECTION = "intersection"
    UNION_UNIFORM = "union-uniform"
    UNION_LINEAR = "union-linear"
    UNION_EXPONENTIAL = "union-exponential"

    @classmethod
    def parse(cls, value) -> "AggModel":
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("_", "-")
        aliases = {"uniform": "union-uniform", "union": "union-uniform",
                   "linear": "union-linear", "exponential": "union-exponential",
                   "exp": "union-exponential", "union-exp": "union-exponential"}
        return cls(aliases.get(v, v))


class EgoSeries:
    """Ego networks of one seed ordered by snapshot ordinal."""

    def __init__(self, snapshots: Sequence[EgoNetwork]):
        snapshots = list(snapshots)
        if snapshots:
            seed = snapshots[0].seed
            redirected = snapshots[0].redirected
            for ego in snapshots:
                if ego.seed != seed:
                    raise ValueError("all ego networks in a series must share the seed")
                if ego.redirected != redirected:
                    raise ValueError("cannot mix redirected and raw ego networks")
            ordinals = [e.ordinal for e in snapshots]
            if any(b <= a for a, b in zip(ordinals, ordinals[1:])):
                raise ValueError(f"ordinals must be strictly increasing, got {ordinals}")
        self.snapshots = snapshots

    @property
    def seed(self) -> int:
        return self.snapshots[0].seed

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self) -> Iterator[EgoNetwork]:
        return iter(self.snapshots)

    def __getitem__(self, i):
        return self.snapshots[i]


def temporal_factor(model: AggModel | str, dt: int, r: float = 0.1) -> float:
    """Weight of a snapshot ``dt`` ordinal steps older than the newest one."""
    model = AggModel.parse(model)
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    if model is AggModel.UNION_LINEAR:
        if not 0 < r <= 1:
            raise ValueError(f"linear decay rate must be in (0, 1], got {r}")
        # rounding keeps r=0.1 factors on their decimal values (0.4, not 0.3999...)
        return max(0.0, round(1.0 - r * dt, 12))
    if model is AggModel.UNION_EXPONENTIAL:
        return math.exp(-dt)
    return 1.0


@dataclass(eq=False)
class AggregateGraph:
    seed: int
    model: AggModel
    nodes: tuple[int, ...]
    edges: dict[tuple[int, int], float]
    n: int
    decay_r: float = 0.1
    out_adj: dict[int, tuple[int, ...]] = field(default_factory=dict, repr=False)
    in_adj: dict[int, tuple[int, ...]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.out_adj and self.edges:
            out: dict[int, list[int]] = {}
            inn: dict[int, list[int]] = {}
            for i, j in sorted(self.edges):
                out.setdefault(i, []).append(j)
                inn.setdefault(j, []).append(i)
            self.out_adj = {k: tuple(v) for k, v in out.items()}
            self.in_adj = {k: tuple(sorted(v)) for k, v in inn.items()}

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def successors(self, v: int) -> tuple[int, ...]:
        return self.out_adj.get(v, ())

    def predecessors(self, v: int) -> tuple[int, ...]:
        return self.in_adj.get(v, ())

    def edges_iter(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self.edges))

    def weight(self, i: int, j: int) -> float:
        return self.edges.get((i, j), 0.0)


def aggregate(series: EgoSeries | Sequence[EgoNetwork], model: AggModel | str,
              r: float = 0.1) -> AggregateGraph:
    """Fold a seed's ego series into one weighted graph.

    Union models weight an edge by the sum of the temporal factors of the
    snapshots containing it; the intersection keeps edges present in every
    snapshot at weight 1. Zero-weight edges are dropped.
    """
    if not isinstance(series, EgoSeries):
        series = EgoSeries(series)
    if len(series) == 0:
        raise ValueError("cannot aggregate an empty series")
    model = AggModel.parse(model)
    n = len(series)
    edge_sets = [ego.edge_set() for ego in series]

    edges: dict[tuple[int, int], float] = {}
    if model is AggModel.INTERSECTION:
        common = frozenset.intersection(*edge_sets)
        edges = {e: 1.0 for e in common}
    else:
        factors = [temporal_factor(model, n - t, r) for t in range(1, n + 1)]
        for alpha, es in zip(factors, edge_sets):
            if alpha == 0.0:
                continue
            for e in es:
                edges[e] = edges.get(e, 0.0) + alpha
        edges = {e: w for e, w in edges.items() if w > 0.0}

    nodes = {series.seed}
    for i, j in edges:
        nodes.add(i)
        nodes.add(j)
    return AggregateGraph(series.seed, model, tuple(sorted(nodes)), dict(sorted(edges.items())),
                          n, r)


def edge_temporal_weight(agg: AggregateGraph, i: int, j: int) -> float:
    return agg.edges.get((i, j), 0.0)


def export_aggregate(agg: AggregateGraph, path: str | Path, names=None) -> None:
    """TSV ``source<TAB>target<TAB>weight`` plus a JSON sidecar."""
    path = Path(path)
    label = (lambda v: names.name(v)) if names is not None else str
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for (i, j), w in sorted(agg.edges.items()):
            f.write(f"{label(i)}\t{label(j)}\t{w:.6f}\n")
    sidecar = {"seed": label(agg.seed), "model": agg.model.value, "n": agg.n, "r": agg.decay_r}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
