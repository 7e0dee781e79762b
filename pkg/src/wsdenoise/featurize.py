"""Deterministic TF-IDF featurization.

Tokens are maximal runs of Unicode alphanumerics, lowercased.  Weights use
smoothed idf with a +1 floor, ``idf = ln((1 + n_docs) / (1 + df)) + 1``, raw
term frequency, and L2 row normalization, so rows have norm 1 (or 0 for
documents with no in-vocabulary tokens).
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass
class FeaturizeConfig:
    min_df: int = 1
    max_features: int | None = None


@dataclass(frozen=True)
class Vocabulary:
    index: dict               # term -> dense column index
    df: np.ndarray            # document frequency per retained term
    num_docs_fitted: int

    @property
    def size(self) -> int:
        return len(self.index)


def fit_vocabulary(texts: list[str], cfg: FeaturizeConfig | None = None) -> Vocabulary:
    """Build a vocabulary from a corpus; deterministic for identical input.

    Terms with document frequency below ``min_df`` are dropped; if
    ``max_features`` is set, the top terms by (df, then lexicographic
    ascending) are kept.
    """
    cfg = cfg or FeaturizeConfig()
    if not texts:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    df = Counter()
    for text in texts:
        df.update(set(tokenize(text)))
    terms = [t for t, c in df.items() if c >= cfg.min_df]
    if cfg.max_features is not None and len(terms) > cfg.max_features:
        terms.sort(key=lambda w: (-df[w], w))
        terms = terms[: cfg.max_features]
    terms.sort()
    if not terms:
        raise ValueError("vocabulary is empty after min_df filtering")
    index = {t: i for i, t in enumerate(terms)}
    return Vocabulary(
        index=index,
        df=np.array([df[t] for t in terms], dtype=np.int64),
        num_docs_fitted=len(texts),
    )


def transform(texts: list[str], vocab: Vocabulary) -> sp.csr_array:
    """TF-IDF encode documents as a sparse N x V matrix with L2-normalized rows."""
    idf = np.log((1.0 + vocab.num_docs_fitted) / (1.0 + vocab.df)) + 1.0
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for text in texts:
        counts = Counter(tokenize(text))
        cols = sorted(vocab.index[t] for t in counts if t in vocab.index)
        row = np.array([0.0] * len(cols))
        lut = {vocab.index[t]: c for t, c in counts.items() if t in vocab.index}
        for pos, j in enumerate(cols):
            row[pos] = lut[j] * idf[j]
        norm = np.linalg.norm(row)
        if norm > 0:
            row /= norm
        indices.extend(cols)
        data.extend(row.tolist())
        indptr.append(len(indices))
    return sp.csr_array(
        (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int32), np.asarray(indptr, dtype=np.int32)),
        shape=(len(texts), vocab.size),
    )
