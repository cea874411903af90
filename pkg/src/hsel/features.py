"""Feature extraction over token lists.

Three vectorizations share one vocabulary contract (built from training
documents only): raw counts, tf-idf weighting, and a seeded signed random
projection of counts that stands in for dense embedding extractors.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log
from typing import Sequence

import numpy as np

from .core import derive_seed

COUNT = "COUNT"
TFIDF = "TFIDF"
HASHED = "HASHED"
EXTRACTOR_KINDS = (COUNT, TFIDF, HASHED)

_KIND_ALIASES = {"HASHED-DENSE": HASHED, "CV": COUNT, "TF-IDF": TFIDF}

DEFAULT_HASHED_DIM = 64


def normalize_extractor_token(token: str) -> str:
    tok = token.strip().upper()
    tok = _KIND_ALIASES.get(tok, tok)
    if tok not in EXTRACTOR_KINDS:
        raise ValueError(f"unknown extractor token {token!r}; expected one of {EXTRACTOR_KINDS}")
    return tok


def _sign_row(token: str, seed: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng(derive_seed("hashed-projection", seed, token))
    return rng.integers(0, 2, size=dim).astype(np.float64) * 2.0 - 1.0


@dataclass(frozen=True)
class FeatureSpace:
    """A fitted vectorizer: vocabulary, weighting kind, and output dimension.

    For TFIDF, ``idf[j] = ln((1 + D) / (1 + df_j)) + 1`` over the D training
    documents, which keeps every idf finite and >= 1. For HASHED, counts are
    projected through a per-token seeded sign matrix of shape (V, dim).
    """

    kind: str
    vocabulary: dict[str, int]
    dimension: int
    idf: np.ndarray | None = None
    projection: np.ndarray | None = None

    def _count_rows(self, docs: Sequence[Sequence[str]]) -> np.ndarray:
        out = np.zeros((len(docs), len(self.vocabulary)), dtype=np.float64)
        vocab = self.vocabulary
        for i, doc in enumerate(docs):
            row = out[i]
            for token in doc:
                j = vocab.get(token)
                if j is not None:
                    row[j] += 1.0
        return out

    def transform(self, docs: Sequence[Sequence[str]]) -> np.ndarray:
        counts = self._count_rows(docs)
        if self.kind == COUNT:
            return counts
        if self.kind == TFIDF:
            return counts * self.idf
        return counts @ self.projection


def fit_feature_space(
    train_docs: Sequence[Sequence[str]],
    kind: str,
    hashed_dim: int = DEFAULT_HASHED_DIM,
    seed: int = 0,
) -> FeatureSpace:
    """Fit a feature space on tokenized training documents.

    Raises if the vocabulary is empty after filtering; callers see that as a
    configuration problem (over-aggressive preprocessing), not a crash later.
    """
    kind = normalize_extractor_token(kind)
    if not train_docs:
        raise ValueError("need at least one tokenized training document")
    tokens = sorted({token for doc in train_docs for token in doc})
    if not tokens:
        raise ValueError("empty vocabulary after filtering; relax preprocessing settings")
    vocabulary = {token: j for j, token in enumerate(tokens)}

    if kind == COUNT:
        return FeatureSpace(kind=kind, vocabulary=vocabulary, dimension=len(tokens))

    if kind == TFIDF:
        n_docs = len(train_docs)
        df = np.zeros(len(tokens), dtype=np.int64)
        for doc in train_docs:
            for token in set(doc):
                df[vocabulary[token]] += 1
        idf = np.array([log((1 + n_docs) / (1 + int(d))) + 1.0 for d in df], dtype=np.float64)
        idf.setflags(write=False)
        return FeatureSpace(kind=kind, vocabulary=vocabulary, dimension=len(tokens), idf=idf)

    if hashed_dim <= 0:
        raise ValueError("hashed projection dimension must be positive")
    projection = np.vstack([_sign_row(token, seed, hashed_dim) for token in tokens])
    projection.setflags(write=False)
    return FeatureSpace(
        kind=kind, vocabulary=vocabulary, dimension=hashed_dim, projection=projection
    )
