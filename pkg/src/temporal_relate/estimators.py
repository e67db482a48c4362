"""Estimator wrappers: fit on snapshots (or a text corpus), predict pair scores.

The fitted estimator caches one feature vector per seed, so scoring a pair
costs time proportional to the two neighbour counts.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .baseline_text import Corpus, build_corpus, tfidf_cosine
from .centrality import CentralityKind, centrality, reciprocal
from .eval import spearman
from .graph import LinkMode, direct_neighbors, extract_ego
from .ingest import SnapshotGraph
from .relatedness import (FeatureVector, binary_jaccard, build_feature_vector, tanimoto,
                          temporal_feature_vector)
from .temporal import AggModel, EgoSeries, aggregate

GRAPH_METHODS = ("jaccard", "ext-rd", "ext-rp", "ext-rd-tw", "ext-rp-tw")


def check_pairs(X, dtype=np.int64) -> np.ndarray:
    """Coerce ``X`` into an (n, 2) array of entity pairs."""
    arr = np.asarray(X, dtype=dtype if dtype is not None else None)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array of pairs, got shape {arr.shape}")
    if dtype is np.int64 and arr.min() < 0:
        raise ValueError("entity ids must be non-negative")
    return arr


def split_method(method: str) -> tuple[str, CentralityKind | None, bool]:
    """``"ext-rd-tw"`` -> (``"extended"``, DEGREE, True)."""
    if method == "jaccard":
        return "jaccard", None, False
    parts = method.split("-")
    if parts[0] != "ext" or len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] != "tw"):
        raise ValueError(f"unknown relatedness method {method!r}; expected one of {GRAPH_METHODS}")
    return "extended", CentralityKind.parse(parts[1]), len(parts) == 3


class _PairScorer(BaseEstimator):
    def _centrality_params(self) -> dict:
        if CentralityKind.parse(self.centrality) is CentralityKind.DEGREE:
            return {"direction": self.degree_direction}
        return {"damping": self.damping, "tol": self.tol, "max_iter": self.max_iter}

    def precompute(self, seeds: Sequence[int], n_jobs: int | None = None):
        check_is_fitted(self, "features_")
        todo = sorted({int(s) for s in seeds} - set(self.features_))
        jobs = n_jobs or getattr(self, "n_jobs", None) or 1
        if jobs > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for s, fv in zip(todo, pool.map(self._build, todo)):
                    self.features_[s] = fv
        else:
            for s in todo:
                self.features_[s] = self._build(s)
        return self

    def feature_vector(self, seed: int):
        check_is_fitted(self, "features_")
        fv = self.features_.get(seed)
        if fv is None:
            fv = self.features_[seed] = self._build(seed)
        return fv

    def score_pair(self, a: int, b: int) -> float:
        va, vb = self.feature_vector(a), self.feature_vector(b)
        if self.method == "jaccard":
            return binary_jaccard(va, vb)
        return tanimoto(va, vb)

    def predict(self, X) -> np.ndarray:
        pairs = check_pairs(X)
        return np.array([self.score_pair(int(a), int(b)) for a, b in pairs], dtype=float)

    def score(self, X, y) -> float:
        """Spearman correlation between predicted scores and ``y``."""
        return spearman(self.predict(X), np.asarray(y, dtype=float))


class EgoRelatedness(_PairScorer):
    """Relatedness on one snapshot.

    ``method`` is ``"jaccard"`` or ``"extended"`` (Tanimoto over reciprocal
    ``centrality`` scores of the direct neighbours selected by ``mode``).
    """

    def __init__(self, method="extended", centrality="degree", mode="inout", hops=2,
                 degree_direction="total", damping=0.85, tol=1e-9, max_iter=100, n_jobs=None):
        self.method = method
        self.centrality = centrality
        self.mode = mode
        self.hops = hops
        self.degree_direction = degree_direction
        self.damping = damping
        self.tol = tol
        self.max_iter = max_iter
        self.n_jobs = n_jobs

    def fit(self, X: SnapshotGraph, y=None, seeds=None):
        if not isinstance(X, SnapshotGraph):
            raise TypeError(f"EgoRelatedness.fit expects a SnapshotGraph, got {type(X).__name__}")
        if self.method not in ("jaccard", "extended"):
            raise ValueError(f"unknown method {self.method!r}")
        self.mode_ = LinkMode.parse(self.mode)
        self.centrality_ = CentralityKind.parse(self.centrality)
        self.graph_ = X
        self.features_ = {}
        if seeds is not None:
            self.precompute(seeds)
        return self

    def _build(self, seed: int):
        ego = extract_ego(self.graph_, seed, self.hops)
        if self.method == "jaccard":
            return frozenset(direct_neighbors(ego, self.mode_))
        recip = reciprocal(centrality(ego, self.centrality_, **self._centrality_params()))
        return build_feature_vector(ego, recip, self.mode_)


class TemporalRelatedness(_PairScorer):
    """Relatedness on a per-seed aggregate of several snapshots.

    ``method`` is ``"jaccard"``, ``"extended"`` (structure only) or
    ``"extended-tw"`` (reciprocal centrality times temporal edge weight).
    """

    def __init__(self, model="union-uniform", method="extended-tw", centrality="degree",
                 mode="inout", decay_r=0.1, hops=2, degree_direction="total", damping=0.85,
                 tol=1e-9, max_iter=100, n_jobs=None):
        self.model = model
        self.method = method
        self.centrality = centrality
        self.mode = mode
        self.decay_r = decay_r
        self.hops = hops
        self.degree_direction = degree_direction
        self.damping = damping
        self.tol = tol
        self.max_iter = max_iter
        self.n_jobs = n_jobs

    def fit(self, X: Sequence[SnapshotGraph], y=None, seeds=None):
        snaps = sorted(X, key=lambda g: g.ordinal)
        if not snaps:
            raise ValueError("TemporalRelatedness.fit needs at least one snapshot")
        if self.method not in ("jaccard", "extended", "extended-tw"):
            raise ValueError(f"unknown method {self.method!r}")
        if not 0 < self.decay_r <= 1:
            raise ValueError(f"decay_r must be in (0, 1], got {self.decay_r}")
        self.model_ = AggModel.parse(self.model)
        self.mode_ = LinkMode.parse(self.mode)
        self.centrality_ = CentralityKind.parse(self.centrality)
        self.snapshots_ = snaps
        self.features_ = {}
        self.aggregates_ = {}
        if seeds is not None:
            self.precompute(seeds)
        return self

    def aggregate_for(self, seed: int):
        agg = self.aggregates_.get(seed)
        if agg is None:
            series = EgoSeries([extract_ego(g, seed, self.hops) for g in self.snapshots_])
            agg = self.aggregates_[seed] = aggregate(series, self.model_, self.decay_r)
        return agg

    def _build(self, seed: int):
        agg = self.aggregate_for(seed)
        if self.method == "jaccard":
            return frozenset(direct_neighbors(agg, self.mode_))
        recip = reciprocal(centrality(agg, self.centrality_, **self._centrality_params()))
        if self.method == "extended":
            return build_feature_vector(agg, recip, self.mode_)
        return temporal_feature_vector(agg, recip, self.mode_)


class TfidfRelatedness(BaseEstimator):
    """TF-IDF cosine between the article texts of two entities."""

    def __init__(self, stopwords=None, min_len=2):
        self.stopwords = stopwords
        self.min_len = min_len

    def fit(self, X, y=None):
        if isinstance(X, Corpus):
            self.corpus_ = X
        else:
            self.corpus_ = build_corpus(X, self.stopwords, self.min_len)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "corpus_")
        pairs = check_pairs(X, dtype=object)
        return np.array([tfidf_cosine(self.corpus_, str(a), str(b)) for a, b in pairs], dtype=float)

    def score(self, X, y) -> float:
        return spearman(self.predict(X), np.asarray(y, dtype=float))


def make_estimator(method: str, mode, model: AggModel | None = None, decay_r: float = 0.1,
                   hops: int = 2, centrality_params: dict | None = None, n_jobs=None):
    """Estimator for one cell of the relate grid (``model=None`` means a single snapshot)."""
    base, kind, weighted = split_method(method)
    params = dict(centrality_params or {})
    kind = kind or CentralityKind.DEGREE
    kw = {k: params[k] for k in ("degree_direction", "damping", "tol", "max_iter") if k in params}
    if model is None:
        if weighted:
            # a lone snapshot is an n=1 aggregate, where every temporal weight is 1
            return TemporalRelatedness(AggModel.UNION_UNIFORM, "extended-tw", kind.value, mode,
                                       decay_r, hops, n_jobs=n_jobs, **kw)
        return EgoRelatedness(base, kind.value, mode, hops, n_jobs=n_jobs, **kw)
    tmethod = "jaccard" if base == "jaccard" else ("extended-tw" if weighted else "extended")
    return TemporalRelatedness(model, tmethod, kind.value, mode, decay_r, hops,
                               n_jobs=n_jobs, **kw)
