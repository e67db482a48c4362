"""Entity relatedness over time from snapshot link graphs."""
from .baseline_text import Corpus, build_corpus, tfidf_cosine
from .centrality import CentralityKind, CentralityScores, degree_centrality, pagerank, reciprocal
from .estimators import EgoRelatedness, TemporalRelatedness, TfidfRelatedness
from .eval import GoldStandard, Pooling, correlation_matrix, evaluate, load_gold, spearman
from .graph import EgoNetwork, LinkMode, apply_redirects, direct_neighbors, extract_ego
from .ingest import (EntityTable, RedirectTable, SnapshotGraph, build_snapshot, load_snapshot,
                     parse_edge_tsv, parse_ntriples_links, resolve_redirects, save_snapshot)
from .relatedness import (FeatureVector, binary_jaccard, build_feature_vector, extended_jaccard,
                          extended_jaccard_temporal, tanimoto)
from .temporal import (AggModel, AggregateGraph, EgoSeries, aggregate, edge_temporal_weight,
                       temporal_factor)

__version__ = "0.1.0"
