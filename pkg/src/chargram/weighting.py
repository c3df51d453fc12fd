"""Sublinear TF-IDF and BM25 term weighting with per-document normalization.

Weights are computed per present feature from corpus statistics frozen in a
:class:`~chargram.features.Vocabulary`, then rescaled per document by either
L2 or min-max normalization. All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .features import SparseCounts, Vocabulary

__all__ = [
    "WeightingConfig",
    "tfidf_weight",
    "bm25_weight",
    "apply_weighting",
    "normalize_l2",
    "normalize_minmax",
    "SCHEMES",
    "NORMALIZATIONS",
]

SCHEMES = ("sublinear_tfidf", "bm25")
NORMALIZATIONS = ("l2", "minmax")

# Additive offset of the min-max rescaling, keeping the weakest present
# feature distinguishable from an absent one.
MINMAX_OFFSET = 0.01


@dataclass(frozen=True)
class WeightingConfig:
    """Term weighting scheme and per-document normalization choice."""

    scheme: str = "sublinear_tfidf"
    k1: float = 2.0
    b: float = 0.75
    normalization: str = "l2"

    def validate(self) -> None:
        """Raise ``ValueError`` on out-of-range or unknown settings."""
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(
                f"unknown normalization {self.normalization!r}; expected one of {NORMALIZATIONS}"
            )
        if not self.k1 > 0:
            raise ValueError(f"k1 must be positive, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


def _check_counts(tf: int, df: int, n_docs: int) -> None:
    if tf < 0:
        raise ValueError(f"tf must be non-negative, got {tf}")
    if not 1 <= df <= n_docs:
        raise ValueError(f"df must satisfy 1 <= df <= n_docs, got df={df}, n_docs={n_docs}")


def tfidf_weight(tf: int, df: int, n_docs: int) -> float:
    """Sublinear TF-IDF weight ``(1 + ln tf) * ln(n_docs / df)``.

    Returns 0.0 for an absent feature (``tf == 0``). A feature present in
    every document gets weight 0.0 as well, since its IDF vanishes.
    """
    _check_counts(tf, df, n_docs)
    if tf == 0:
        return 0.0
    return (1.0 + math.log(tf)) * math.log(n_docs / df)


def bm25_weight(
    tf: int,
    df: int,
    n_docs: int,
    dl: int,
    avg_dl: float,
    k1: float = 2.0,
    b: float = 0.75,
) -> float:
    """BM25 weight with saturation ``k1``, length normalization ``b``.

    The IDF factor ``ln((n_docs - df + 0.5) / (df + 0.5))`` is passed through
    unclamped, so features present in more than half the corpus weigh
    negative. Returns 0.0 for ``tf == 0``.
    """
    _check_counts(tf, df, n_docs)
    if dl <= 0 or avg_dl <= 0:
        raise ValueError(f"document lengths must be positive, got dl={dl}, avg_dl={avg_dl}")
    if tf == 0:
        return 0.0
    saturation = tf / (tf + k1 * (1.0 - b + b * dl / avg_dl))
    idf = math.log((n_docs - df + 0.5) / (df + 0.5))
    return saturation * idf


def normalize_l2(scores: dict[int, float]) -> dict[int, float]:
    """Scale scores to unit Euclidean norm; an all-zero vector is returned unchanged."""
    norm = math.sqrt(sum(v * v for v in scores.values()))
    if norm == 0.0:
        return dict(scores)
    return {i: v / norm for i, v in scores.items()}


def normalize_minmax(scores: dict[int, float]) -> dict[int, float]:
    """Rescale the present scores onto ``[0.01, 1.01]``.

    The minimum maps to 0.01 and the maximum to 1.01. When every present
    feature has the same score the spread is undefined and all of them map to
    the top of the range, 1.01. Absent features stay absent (implicitly 0).
    """
    if not scores:
        return {}
    lo = min(scores.values())
    hi = max(scores.values())
    if hi == lo:
        return {i: 1.0 + MINMAX_OFFSET for i in scores}
    span = hi - lo
    return {i: (v - lo) / span + MINMAX_OFFSET for i, v in scores.items()}


def apply_weighting(
    counts: "SparseCounts", vocabulary: "Vocabulary", config: WeightingConfig
) -> dict[int, float]:
    """Weight one document's term frequencies and normalize the result.

    Every index present in ``counts`` keeps an entry in the output, even when
    its weight comes out 0.0; only absent features are implicit zeros.
    """
    config.validate()
    n_docs = vocabulary.n_docs
    scores: dict[int, float] = {}
    if config.scheme == "sublinear_tfidf":
        for idx, tf in counts.counts.items():
            scores[idx] = tfidf_weight(tf, int(vocabulary.df[idx]), n_docs)
    else:
        for idx, tf in counts.counts.items():
            scores[idx] = bm25_weight(
                tf, int(vocabulary.df[idx]), n_docs, counts.dl, vocabulary.avg_dl,
                config.k1, config.b,
            )
    if config.normalization == "l2":
        return normalize_l2(scores)
    return normalize_minmax(scores)
