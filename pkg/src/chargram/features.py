"""Character n-gram extraction, vocabulary construction, and vectorization.

Texts are Unicode-lowercased and padded with one start and one end sentinel
codepoint, so n-grams can anchor on document boundaries. A vocabulary built
on a training corpus freezes the statistics (document frequencies, corpus
size, average length) that weighting needs at prediction time.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .weighting import WeightingConfig, apply_weighting

__all__ = [
    "START_SENTINEL",
    "END_SENTINEL",
    "Vocabulary",
    "SparseCounts",
    "preprocess",
    "extract_ngrams",
    "build_vocabulary",
    "vectorize",
    "CharNgramVectorizer",
]

START_SENTINEL = ""
END_SENTINEL = ""


def preprocess(text: str) -> str:
    """Lowercase ``text`` and pad it with the start and end sentinels.

    Sentinel codepoints occurring in the input are stripped first, so
    sentinel-anchored n-grams can only come from true document boundaries.
    The empty text becomes the bare two-sentinel string.
    """
    if not isinstance(text, str):
        raise TypeError(f"expected str, got {type(text).__name__}")
    cleaned = text.replace(START_SENTINEL, "").replace(END_SENTINEL, "")
    return START_SENTINEL + cleaned.lower() + END_SENTINEL


def extract_ngrams(padded: str, min_len: int, max_len: int) -> Counter:
    """Count all contiguous n-grams of ``padded`` with lengths in ``[min_len, max_len]``.

    Bare sentinel unigrams are excluded; longer sentinel-anchored n-grams are
    kept. Lengths exceeding the string yield nothing.
    """
    if min_len < 1 or max_len < min_len:
        raise ValueError(f"invalid n-gram length range [{min_len}, {max_len}]")
    counts: Counter = Counter()
    for n in range(min_len, max_len + 1):
        counts.update(padded[i : i + n] for i in range(len(padded) - n + 1))
    if min_len == 1:
        counts.pop(START_SENTINEL, None)
        counts.pop(END_SENTINEL, None)
    return counts


@dataclass(eq=False)
class Vocabulary:
    """An n-gram index plus the frozen corpus statistics weighting needs.

    Indices are contiguous and assigned in lexicographic n-gram order, so
    identical corpora always produce identical vocabularies.
    """

    ngrams: list[str]
    df: np.ndarray
    n_docs: int
    avg_dl: float
    min_len: int
    max_len: int
    min_count: int
    prune_by: str = "total"
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.df = np.asarray(self.df, dtype=np.int64)
        self.index = {g: i for i, g in enumerate(self.ngrams)}

    def __len__(self) -> int:
        return len(self.ngrams)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return (
            self.ngrams == other.ngrams
            and np.array_equal(self.df, other.df)
            and self.n_docs == other.n_docs
            and self.avg_dl == other.avg_dl
            and self.min_len == other.min_len
            and self.max_len == other.max_len
            and self.min_count == other.min_count
            and self.prune_by == other.prune_by
        )

    def to_json(self) -> dict:
        return {
            "meta": {
                "n_docs": self.n_docs,
                "avg_dl": self.avg_dl,
                "min_len": self.min_len,
                "max_len": self.max_len,
                "min_count": self.min_count,
                "prune_by": self.prune_by,
            },
            "entries": [[g, int(d)] for g, d in zip(self.ngrams, self.df)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Vocabulary":
        meta = obj["meta"]
        entries = obj["entries"]
        return cls(
            ngrams=[g for g, _ in entries],
            df=np.array([d for _, d in entries], dtype=np.int64),
            n_docs=meta["n_docs"],
            avg_dl=meta["avg_dl"],
            min_len=meta["min_len"],
            max_len=meta["max_len"],
            min_count=meta["min_count"],
            prune_by=meta.get("prune_by", "total"),
        )


def build_vocabulary(
    padded_docs: Iterable[str],
    min_len: int = 1,
    max_len: int = 5,
    min_count: int = 2,
    prune_by: str = "total",
) -> Vocabulary:
    """Index the n-grams of a padded corpus, pruning rare ones.

    ``prune_by`` selects the rarity measure compared against ``min_count``:
    ``"total"`` keeps n-grams by total occurrence count, ``"df"`` by the
    number of documents containing them.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be at least 1, got {min_count}")
    if prune_by not in ("total", "df"):
        raise ValueError(f"unknown prune_by {prune_by!r}; expected 'total' or 'df'")
    docs = list(padded_docs)
    if not docs:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    totals: Counter = Counter()
    dfs: Counter = Counter()
    dl_sum = 0
    for doc in docs:
        grams = extract_ngrams(doc, min_len, max_len)
        totals.update(grams)
        dfs.update(grams.keys())
        dl_sum += len(doc)
    measure = totals if prune_by == "total" else dfs
    kept = sorted(g for g, cnt in measure.items() if cnt >= min_count)
    return Vocabulary(
        ngrams=kept,
        df=np.array([dfs[g] for g in kept], dtype=np.int64),
        n_docs=len(docs),
        avg_dl=dl_sum / len(docs),
        min_len=min_len,
        max_len=max_len,
        min_count=min_count,
        prune_by=prune_by,
    )


@dataclass
class SparseCounts:
    """One document's term frequencies over vocabulary indices, plus its padded length."""

    counts: dict[int, int]
    dl: int


def vectorize(padded: str, vocabulary: Vocabulary) -> SparseCounts:
    """Count vocabulary n-grams in one padded document.

    Out-of-vocabulary n-grams are dropped; the padded length is kept for
    length-normalized weighting.
    """
    grams = extract_ngrams(padded, vocabulary.min_len, vocabulary.max_len)
    index = vocabulary.index
    counts = {index[g]: c for g, c in grams.items() if g in index}
    return SparseCounts(counts=counts, dl=len(padded))


class CharNgramVectorizer(TransformerMixin, BaseEstimator):
    """Turn raw texts into weighted, normalized character n-gram vectors.

    Parameters
    ----------
    min_len, max_len : int
        Inclusive n-gram length range over the sentinel-padded text.
    min_count : int
        Prune n-grams rarer than this in the fitted corpus.
    prune_by : {"total", "df"}
        Rarity measure compared against ``min_count``.
    scheme : {"sublinear_tfidf", "bm25"}
        Term weighting scheme.
    k1, b : float
        BM25 saturation and length-normalization parameters.
    normalization : {"l2", "minmax"}
        Per-document normalization of the weighted scores.

    Attributes
    ----------
    vocabulary_ : Vocabulary
        The n-gram index built during :meth:`fit`. Prediction-time weighting
        uses its frozen corpus statistics, never the transformed batch's.
    """

    def __init__(
        self,
        min_len: int = 1,
        max_len: int = 5,
        min_count: int = 2,
        prune_by: str = "total",
        scheme: str = "sublinear_tfidf",
        k1: float = 2.0,
        b: float = 0.75,
        normalization: str = "l2",
    ):
        self.min_len = min_len
        self.max_len = max_len
        self.min_count = min_count
        self.prune_by = prune_by
        self.scheme = scheme
        self.k1 = k1
        self.b = b
        self.normalization = normalization

    def _weighting_config(self) -> WeightingConfig:
        cfg = WeightingConfig(
            scheme=self.scheme, k1=self.k1, b=self.b, normalization=self.normalization
        )
        cfg.validate()
        return cfg

    def fit(self, X: Iterable[str], y=None) -> "CharNgramVectorizer":
        """Build the vocabulary from the training texts."""
        self._weighting_config()
        self.vocabulary_ = build_vocabulary(
            (preprocess(t) for t in X),
            min_len=self.min_len,
            max_len=self.max_len,
            min_count=self.min_count,
            prune_by=self.prune_by,
        )
        return self

    def transform(self, X: Iterable[str]) -> sp.csr_matrix:
        """Vectorize, weight, and normalize texts against the fitted vocabulary."""
        check_is_fitted(self, "vocabulary_")
        cfg = self._weighting_config()
        vocab = self.vocabulary_
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for text in X:
            scores = apply_weighting(vectorize(preprocess(text), vocab), vocab, cfg)
            for idx in sorted(scores):
                indices.append(idx)
                data.append(scores[idx])
            indptr.append(len(indices))
        return sp.csr_matrix(
            (
                np.asarray(data, dtype=np.float64),
                np.asarray(indices, dtype=np.intp),
                np.asarray(indptr, dtype=np.intp),
            ),
            shape=(len(indptr) - 1, len(vocab)),
        )
