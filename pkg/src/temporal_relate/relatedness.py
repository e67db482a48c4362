"""Binary Jaccard, Tanimoto over reciprocal centralities, and its temporally weighted form."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .centrality import CentralityKind, CentralityScores, centrality, reciprocal
from .graph import LinkMode, direct_neighbors
from .temporal import AggregateGraph, edge_temporal_weight


@dataclass(frozen=True)
class FeatureVector:
    owner: int
    mode: LinkMode
    entries: Mapping[int, float]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class RelatednessScore:
    a: int
    b: int
    method: str
    value: float
    snapshot_or_model: str = ""


def binary_jaccard(na, nb) -> float:
    na, nb = set(na), set(nb)
    union = len(na | nb)
    if union == 0:
        return 0.0
    return len(na & nb) / union


def build_feature_vector(ego, recip: CentralityScores, mode: LinkMode | str) -> FeatureVector:
    """Reciprocal centrality of each direct neighbour of the ego's seed."""
    mode = LinkMode.parse(mode)
    if not recip.reciprocal:
        raise ValueError("feature vectors need reciprocal centrality scores")
    entries = {}
    for v in direct_neighbors(ego, mode):
        try:
            entries[v] = recip.scores[v]
        except KeyError:
            raise AssertionError(f"neighbour {v} has no centrality score") from None
    return FeatureVector(ego.seed, mode, entries)


def tanimoto(va, vb) -> float:
    """a.b / (|a|^2 + |b|^2 - a.b) over sparse maps; 0.0 when both are empty."""
    a = va.entries if isinstance(va, FeatureVector) else va
    b = vb.entries if isinstance(vb, FeatureVector) else vb
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    # sorted shared keys keep the dot product bit-identical under argument swap
    dot = 0.0
    for k in sorted(k for k in small if k in large):
        dot += a[k] * b[k]
    na = sum(x * x for x in a.values())
    nb = sum(y * y for y in b.values())
    denom = na + nb - dot
    if denom <= 0.0:
        return 0.0
    return min(1.0, dot / denom)


def _recip(g, kind, params) -> CentralityScores:
    return reciprocal(centrality(g, kind, **(params or {})))


def extended_jaccard(ego_a, ego_b, kind: CentralityKind | str, mode: LinkMode | str,
                     centrality_params: dict | None = None) -> RelatednessScore:
    """Tanimoto of the reciprocal-centrality neighbour vectors of two seeds.

    Each vector takes its centralities from its own ego network, so a
    shared neighbour may carry a different value on each side.
    """
    kind = CentralityKind.parse(kind)
    mode = LinkMode.parse(mode)
    va = build_feature_vector(ego_a, _recip(ego_a, kind, centrality_params), mode)
    vb = build_feature_vector(ego_b, _recip(ego_b, kind, centrality_params), mode)
    return RelatednessScore(ego_a.seed, ego_b.seed, f"ext-{_tag(kind)}", tanimoto(va, vb),
                            getattr(ego_a, "snapshot_label", ""))


def temporal_weights(agg: AggregateGraph, mode: LinkMode | str) -> dict[int, float]:
    """Temporal weight between the seed and each direct neighbour.

    For in+out, a neighbour linked both ways takes the larger of the two
    directed weights.
    """
    mode = LinkMode.parse(mode)
    s = agg.seed
    out = {}
    for v in direct_neighbors(agg, mode):
        w_in = edge_temporal_weight(agg, v, s) if mode is not LinkMode.OUT else 0.0
        w_out = edge_temporal_weight(agg, s, v) if mode is not LinkMode.IN else 0.0
        out[v] = max(w_in, w_out)
    return out


def temporal_feature_vector(agg: AggregateGraph, recip: CentralityScores,
                            mode: LinkMode | str) -> FeatureVector:
    base = build_feature_vector(agg, recip, mode)
    tw = temporal_weights(agg, mode)
    return FeatureVector(base.owner, base.mode, {v: d * tw[v] for v, d in base.entries.items()})


def extended_jaccard_temporal(agg_a: AggregateGraph, agg_b: AggregateGraph,
                              kind: CentralityKind | str, mode: LinkMode | str,
                              centrality_params: dict | None = None) -> RelatednessScore:
    """Tanimoto of reciprocal centrality times temporal weight, over two aggregates."""
    if agg_a.model is not agg_b.model or agg_a.n != agg_b.n:
        raise ValueError(f"aggregate mismatch: {agg_a.model.value}/n={agg_a.n} vs "
                         f"{agg_b.model.value}/n={agg_b.n}")
    kind = CentralityKind.parse(kind)
    va = temporal_feature_vector(agg_a, _recip(agg_a, kind, centrality_params), mode)
    vb = temporal_feature_vector(agg_b, _recip(agg_b, kind, centrality_params), mode)
    return RelatednessScore(agg_a.seed, agg_b.seed, f"ext-{_tag(kind)}-tw", tanimoto(va, vb),
                            agg_a.model.value)


def _tag(kind: CentralityKind) -> str:
    return "rd" if kind is CentralityKind.DEGREE else "rp"


def format_row(seed: str, candidate: str, method: str, mode: str, label: str, score: float) -> str:
    return f"{seed},{candidate},{method},{mode},{label},{score:.6f}"
