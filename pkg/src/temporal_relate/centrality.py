"""Degree and PageRank centralities over local (ego or aggregate) graphs."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np


class CentralityKind(str, enum.Enum):
    DEGREE = "degree"
    PAGERANK = "pagerank"

    @classmethod
    def parse(cls, value) -> "CentralityKind":
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        return cls({"rd": "degree", "rp": "pagerank", "pr": "pagerank"}.get(v, v))


@dataclass(frozen=True)
class CentralityScores:
    kind: CentralityKind
    scores: dict[int, float]
    reciprocal: bool = False
    converged: bool = True
    iterations: int = 0

    def __getitem__(self, v: int) -> float:
        return self.scores[v]

    def __len__(self) -> int:
        return len(self.scores)


def degree_centrality(g, direction: str = "total") -> CentralityScores:
    """Unweighted degree of every node; zero-degree nodes score 1.

    ``direction`` is ``"total"`` (in + out), ``"in"`` or ``"out"``.
    """
    if direction not in ("total", "in", "out"):
        raise ValueError(f"unknown degree direction {direction!r}")
    scores = {}
    for v in g.nodes:
        d = 0
        if direction != "in":
            d += len(g.successors(v))
        if direction != "out":
            d += len(g.predecessors(v))
        scores[v] = float(d) if d else 1.0
    return CentralityScores(CentralityKind.DEGREE, scores)


def pagerank(g, damping: float = 0.85, tol: float = 1e-9, max_iter: int = 100) -> CentralityScores:
    """Power-iteration PageRank with uniform teleport and dangling redistribution."""
    nodes = list(g.nodes)
    n = len(nodes)
    if n == 0:
        raise ValueError("pagerank needs at least one node")
    pos = {v: k for k, v in enumerate(nodes)}
    src, dst = [], []
    for v in nodes:
        for w in g.successors(v):
            src.append(pos[v])
            dst.append(pos[w])
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    outdeg = np.bincount(src, minlength=n).astype(float)
    dangling = outdeg == 0
    inv = np.divide(1.0, outdeg, out=np.zeros(n), where=~dangling)

    p = np.full(n, 1.0 / n)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        flow = np.bincount(dst, weights=(p * inv)[src], minlength=n)
        nxt = damping * flow + (damping * p[dangling].sum() + (1.0 - damping)) / n
        nxt /= nxt.sum()
        delta = np.abs(nxt - p).sum()
        p = nxt
        if delta < tol:
            converged = True
            break
    return CentralityScores(CentralityKind.PAGERANK, dict(zip(nodes, p.tolist())),
                            converged=converged, iterations=it)


def reciprocal(scores: CentralityScores) -> CentralityScores:
    """1/score for every node; flips the reciprocal flag."""
    out = {}
    for v, s in scores.scores.items():
        if not s > 0:
            raise AssertionError(f"non-positive centrality {s!r} for node {v}")
        out[v] = 1.0 / s
    return replace(scores, scores=out, reciprocal=not scores.reciprocal)


def centrality(g, kind: CentralityKind | str, **params) -> CentralityScores:
    kind = CentralityKind.parse(kind)
    if kind is CentralityKind.DEGREE:
        return degree_centrality(g, params.get("direction", "total"))
    return pagerank(g, **{k: v for k, v in params.items() if k in ("damping", "tol", "max_iter")})


def dump_scores(scores: CentralityScores, path, names=None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for v in sorted(scores.scores):
            key = names.name(v) if names is not None else v
            f.write(f"{key}\t{scores.scores[v]:.6f}\n")
