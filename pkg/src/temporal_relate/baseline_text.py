"""TF-IDF cosine text baseline over a directory of ``<entity>.txt`` files."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

_SPLIT = re.compile(r"[^a-z]+")


def default_stopwords() -> frozenset[str]:
    text = resources.files("temporal_relate").joinpath("data/stopwords_en.txt").read_text("utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def load_stopwords(path: str | Path | None) -> frozenset[str]:
    if path is None:
        return default_stopwords()
    text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def tokenize(text: str, stopwords=frozenset(), min_len: int = 2) -> list[str]:
    return [t for t in _SPLIT.split(text.lower())
            if len(t) >= min_len and t not in stopwords]


@dataclass
class Corpus:
    docs: dict[str, Counter]
    df: Counter
    doc_count: int
    _vectors: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_texts(cls, texts: dict[str, str], stopwords=frozenset(), min_len: int = 2) -> "Corpus":
        docs = {name: Counter(tokenize(t, stopwords, min_len)) for name, t in sorted(texts.items())}
        df = Counter()
        for c in docs.values():
            df.update(c.keys())
        return cls(docs, df, len(docs))

    def idf(self, token: str) -> float:
        return 1.0 + math.log((1 + self.doc_count) / (1 + self.df[token]))

    def vector(self, name: str) -> dict[str, float]:
        """L2-normalised tf-idf weights of one document."""
        vec = self._vectors.get(name)
        if vec is None:
            try:
                counts = self.docs[name]
            except KeyError:
                raise KeyError(f"entity {name!r} not in corpus") from None
            raw = {t: tf * self.idf(t) for t, tf in sorted(counts.items())}
            norm = math.sqrt(sum(w * w for w in raw.values()))
            vec = {t: w / norm for t, w in raw.items()} if norm > 0 else {}
            self._vectors[name] = vec
        return vec


def build_corpus(directory: str | Path, stopwords: str | Path | frozenset | None = None,
                 min_len: int = 2) -> Corpus:
    directory = Path(directory)
    files = sorted(directory.glob("*.txt"))
    if not files:
        raise ValueError(f"{directory}: no .txt documents found")
    if not isinstance(stopwords, (set, frozenset)):
        stopwords = load_stopwords(stopwords)
    texts = {f.stem: f.read_text(encoding="utf-8") for f in files}
    return Corpus.from_texts(texts, stopwords, min_len)


def tfidf_cosine(corpus: Corpus, a: str, b: str) -> float:
    for name in (a, b):
        if name not in corpus.docs:
            raise ValueError(f"entity {name!r} not in corpus")
    va, vb = corpus.vector(a), corpus.vector(b)
    if not va or not vb:
        return 0.0
    shared = sorted(t for t in va if t in vb)
    return min(1.0, sum(va[t] * vb[t] for t in shared))
