"""Ranked gold standards, Spearman correlation and evaluation reports."""
from __future__ import annotations

import csv
import enum
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.stats import rankdata

logger = logging.getLogger(__name__)

Pair = tuple[str, str]


class GoldFormatError(ValueError):
    pass


class Pooling(str, enum.Enum):
    POOLED = "pooled"
    PER_SEED_MEAN = "per-seed-mean"


class ScoreRow(NamedTuple):
    seed: str
    candidate: str
    method: str
    mode: str
    label: str
    score: float

    @property
    def group(self) -> tuple[str, str, str]:
        return self.method, self.mode, self.label


@dataclass
class GoldStandard:
    """Seeds with their candidates in rank order (best first)."""

    seeds: list[tuple[str, list[str]]]
    missing: set[str] = field(default_factory=set)

    @staticmethod
    def rank_score(rank: int, length: int) -> int:
        return length - rank + 1

    def pairs(self) -> list[tuple[str, str, float]]:
        out = []
        for seed, ranked in self.seeds:
            L = len(ranked)
            out.extend((seed, c, float(self.rank_score(k, L))) for k, c in enumerate(ranked, 1))
        return out

    def __len__(self) -> int:
        return sum(len(r) for _, r in self.seeds)


def load_gold(path: str | Path, resolve=None) -> GoldStandard:
    """Parse a TAB-indented ranked list file.

    ``resolve`` is an optional callable name -> bool telling whether an
    entity is known to the graph; unknown names are kept and recorded in
    ``GoldStandard.missing``.
    """
    seeds: list[tuple[str, list[str]]] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if line.startswith("\t"):
                if not seeds:
                    raise GoldFormatError(f"{path}:{lineno}: candidate before any seed")
                name = line.strip()
                ranked = seeds[-1][1]
                if name in ranked:
                    raise GoldFormatError(f"{path}:{lineno}: duplicate candidate {name!r} "
                                          f"under seed {seeds[-1][0]!r}")
                ranked.append(name)
            else:
                seeds.append((line.strip(), []))
    if not seeds:
        raise GoldFormatError(f"{path}: empty gold standard")
    gold = GoldStandard(seeds)
    if resolve is not None:
        for seed, ranked in seeds:
            for name in [seed, *ranked]:
                if not resolve(name):
                    gold.missing.add(name)
        if gold.missing:
            logger.warning("%d gold entities not found in the graph", len(gold.missing))
    return gold


def write_gold(gold: GoldStandard, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for seed, ranked in gold.seeds:
            f.write(seed + "\n")
            for c in ranked:
                f.write("\t" + c + "\n")


def is_constant(x) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(x == x[0]))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average ranks; 0.0 if either side is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"spearman needs two equal-length 1-d inputs, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise ValueError("spearman needs at least two observations")
    if is_constant(x) or is_constant(y):
        return 0.0
    rx = rankdata(x) - (len(x) + 1) / 2
    ry = rankdata(y) - (len(y) + 1) / 2
    rho = float(rx @ ry / np.sqrt((rx @ rx) * (ry @ ry)))
    return max(-1.0, min(1.0, rho))


@dataclass
class EvalReport:
    overall: float
    pooled: float
    per_seed_mean: float
    per_seed: dict[str, float]
    n_pairs: int
    n_imputed: int
    degenerate: bool
    pooling: str = Pooling.POOLED.value
    method: str = ""
    mode: str = ""
    label: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _column(scores: Mapping[Pair, float], rows):
    vals, imputed = [], 0
    for seed, cand, _ in rows:
        v = scores.get((seed, cand))
        if v is None:
            imputed += 1
            v = 0.0
        vals.append(v)
    return vals, imputed


def evaluate(scores: Mapping[Pair, float] | Iterable[ScoreRow], gold: GoldStandard,
             pooling: Pooling | str = Pooling.POOLED) -> EvalReport:
    """Spearman agreement between system scores and gold rank scores.

    Gold pairs without a system score are scored 0.0 and counted.
    """
    pooling = Pooling(pooling)
    if not isinstance(scores, Mapping):
        scores = {(r.seed, r.candidate): r.score for r in scores}
    rows = gold.pairs()
    sys_vals, imputed = _column(scores, rows)
    gold_vals = [g for _, _, g in rows]
    if imputed:
        logger.warning("%d gold pairs had no system score, imputed 0.0", imputed)
    pooled = spearman(sys_vals, gold_vals) if len(rows) >= 2 else 0.0
    degenerate = len(rows) < 2 or is_constant(sys_vals) or is_constant(gold_vals)

    per_seed = {}
    start = 0
    for seed, ranked in gold.seeds:
        end = start + len(ranked)
        per_seed[seed] = spearman(sys_vals[start:end], gold_vals[start:end]) if len(ranked) >= 2 else 0.0
        start = end
    mean = float(np.mean(list(per_seed.values()))) if per_seed else 0.0
    overall = pooled if pooling is Pooling.POOLED else mean
    return EvalReport(overall, pooled, mean, per_seed, len(rows), imputed, degenerate,
                      pooling.value)


def paired_bootstrap(scores_a: Mapping[Pair, float], scores_b: Mapping[Pair, float],
                     gold: GoldStandard, n_iter: int = 10_000, seed: int = 0) -> dict:
    """Two-sided paired bootstrap over seeds on the pooled rho difference (a - b)."""
    rng = np.random.default_rng(seed)
    blocks = []
    for s, ranked in gold.seeds:
        sub = GoldStandard([(s, ranked)])
        rows = sub.pairs()
        blocks.append((np.array(_column(scores_a, rows)[0]), np.array(_column(scores_b, rows)[0]),
                       np.array([g for _, _, g in rows])))
    k = len(blocks)

    def pooled(idx):
        a = np.concatenate([blocks[i][0] for i in idx])
        b = np.concatenate([blocks[i][1] for i in idx])
        g = np.concatenate([blocks[i][2] for i in idx])
        return spearman(a, g) - spearman(b, g)

    observed = pooled(range(k))
    diffs = np.array([pooled(rng.integers(0, k, size=k)) for _ in range(n_iter)])
    p = 2.0 * min(np.mean(diffs <= 0.0), np.mean(diffs >= 0.0))
    return {"observed_diff": observed, "p_value": float(min(1.0, p)), "n_iter": n_iter,
            "method": "paired bootstrap over seeds, two-sided"}


def correlation_matrix(score_sets: Mapping[str, Mapping[Pair, float]]):
    """Pairwise Spearman between labelled score sets over a shared pair list.

    Returns ``(labels, matrix)`` with a unit diagonal.
    """
    labels = list(score_sets)
    if not labels:
        raise ValueError("no score sets given")
    keys = sorted(score_sets[labels[0]])
    for lab in labels[1:]:
        if set(score_sets[lab]) != set(keys):
            diff = set(keys) ^ set(score_sets[lab])
            raise ValueError(f"score set {lab!r} covers a different pair list "
                             f"({len(diff)} pairs differ, e.g. {sorted(diff)[:3]})")
    cols = [np.array([score_sets[lab][k] for k in keys]) for lab in labels]
    m = np.eye(len(labels))
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            m[i, j] = m[j, i] = spearman(cols[i], cols[j])
    return labels, m


def upper_triangle(labels: Sequence[str], matrix) -> list[tuple[str, str, float]]:
    return [(labels[i], labels[j], float(matrix[i, j]))
            for i in range(len(labels)) for j in range(i + 1, len(labels))]


def read_score_csv(path: str | Path) -> list[ScoreRow]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["seed", "candidate", "method", "mode", "model_or_snapshot", "score"]:
            raise ValueError(f"{path}: unexpected score CSV header {header}")
        return [ScoreRow(r[0], r[1], r[2], r[3], r[4], float(r[5])) for r in reader if r]


def group_rows(rows: Iterable[ScoreRow]) -> dict[tuple[str, str, str], dict[Pair, float]]:
    groups: dict[tuple[str, str, str], dict[Pair, float]] = {}
    for r in rows:
        groups.setdefault(r.group, {})[(r.seed, r.candidate)] = r.score
    return groups


def write_report_json(reports: Sequence[EvalReport], path: str | Path, extra: dict | None = None) -> None:
    payload = {"reports": [r.to_dict() for r in reports]}
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
