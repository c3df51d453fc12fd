"""End-to-end text classifier with JSON model persistence.

Composes :class:`~chargram.features.CharNgramVectorizer` and
:class:`~chargram.linear_model.CostWeightedLogisticRegression`. A saved
model file carries the format version, class order, weighting settings, the
full vocabulary, and per-class sparse weights, and reloads to bit-identical
predictions.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .config import PipelineConfig
from .features import CharNgramVectorizer, Vocabulary
from .linear_model import CostWeightedLogisticRegression

__all__ = ["NgramTextClassifier", "MODEL_FORMAT_VERSION"]

MODEL_FORMAT_VERSION = 1


class NgramTextClassifier(ClassifierMixin, BaseEstimator):
    """Character n-gram text classifier.

    Parameters mirror :class:`CharNgramVectorizer` (``min_len`` through
    ``normalization``) and :class:`CostWeightedLogisticRegression` (``C``
    through ``n_jobs``); see those classes for details.

    Attributes
    ----------
    vectorizer_ : CharNgramVectorizer
    classifier_ : CostWeightedLogisticRegression
    classes_ : ndarray
    problem_ : str or None
        The labeling problem recorded in a loaded model file.
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
        C: float = 1.0,
        class_weight: Mapping[str, float] | None = None,
        classes: Sequence[str] | None = None,
        positive_class: str | None = None,
        fit_intercept: bool = True,
        tol: float = 1e-6,
        max_iter: int = 10000,
        n_jobs: int | None = None,
    ):
        self.min_len = min_len
        self.max_len = max_len
        self.min_count = min_count
        self.prune_by = prune_by
        self.scheme = scheme
        self.k1 = k1
        self.b = b
        self.normalization = normalization
        self.C = C
        self.class_weight = class_weight
        self.classes = classes
        self.positive_class = positive_class
        self.fit_intercept = fit_intercept
        self.tol = tol
        self.max_iter = max_iter
        self.n_jobs = n_jobs

    @classmethod
    def from_config(cls, config: PipelineConfig, *, n_jobs: int | None = None):
        """Build an unfitted classifier from a pipeline config."""
        config.validate()
        return cls(
            min_len=config.min_len,
            max_len=config.max_len,
            min_count=config.min_count,
            prune_by=config.prune_by,
            scheme=config.scheme,
            k1=config.k1,
            b=config.b,
            normalization=config.normalization,
            C=config.C,
            class_weight=dict(config.class_weight),
            classes=list(config.classes) if config.classes is not None else None,
            positive_class=config.positive_class,
            fit_intercept=config.fit_intercept,
            tol=config.tol,
            max_iter=config.max_iter,
            n_jobs=n_jobs,
        )

    def _make_vectorizer(self) -> CharNgramVectorizer:
        return CharNgramVectorizer(
            min_len=self.min_len,
            max_len=self.max_len,
            min_count=self.min_count,
            prune_by=self.prune_by,
            scheme=self.scheme,
            k1=self.k1,
            b=self.b,
            normalization=self.normalization,
        )

    def _make_classifier(self) -> CostWeightedLogisticRegression:
        return CostWeightedLogisticRegression(
            C=self.C,
            class_weight=self.class_weight,
            classes=self.classes,
            positive_class=self.positive_class,
            fit_intercept=self.fit_intercept,
            tol=self.tol,
            max_iter=self.max_iter,
            n_jobs=self.n_jobs,
        )

    def fit(self, X: Iterable[str], y: Iterable[str]) -> "NgramTextClassifier":
        """Fit the vocabulary and the classifier on raw texts and labels."""
        texts = list(X)
        labels = list(y)
        if len(texts) != len(labels):
            raise ValueError(f"got {len(texts)} texts but {len(labels)} labels")
        self.vectorizer_ = self._make_vectorizer().fit(texts)
        matrix = self.vectorizer_.transform(texts)
        self.classifier_ = self._make_classifier().fit(matrix, labels)
        self.classes_ = self.classifier_.classes_
        self.problem_ = None
        return self

    def decision_function(self, X: Iterable[str]) -> np.ndarray:
        """Raw decision values, one column per class in ``classes_`` order."""
        check_is_fitted(self, "classifier_")
        return self.classifier_.decision_function(self.vectorizer_.transform(X))

    def predict(self, X: Iterable[str]) -> np.ndarray:
        """Predict the argmax class per text; ties go to the earliest class."""
        check_is_fitted(self, "classifier_")
        return self.classifier_.predict(self.vectorizer_.transform(X))

    def save(self, path: str | Path, *, problem: str | None = None) -> None:
        """Write the fitted model as a single JSON file.

        The file is deterministic for a given fitted model: retraining on
        identical inputs and saving again produces identical bytes.
        """
        check_is_fitted(self, "classifier_")
        clf = self.classifier_
        binary = len(clf.classes_) == 2
        if binary:
            heads = [(clf.positive_class_, clf.coef_[0], float(clf.intercept_[0]))]
        else:
            heads = [
                (c, clf.coef_[j], float(clf.intercept_[j]))
                for j, c in enumerate(clf.classes_)
            ]
        models = [
            {
                "class_label": str(label),
                "weights": [[int(i), float(w[i])] for i in np.flatnonzero(w)],
                "bias": bias,
            }
            for label, w, bias in heads
        ]
        obj = {
            "format_version": MODEL_FORMAT_VERSION,
            "problem": problem,
            "classes": [str(c) for c in clf.classes_],
            "positive_class": str(clf.positive_class_) if binary else None,
            "params": {
                "min_len": self.min_len,
                "max_len": self.max_len,
                "min_count": self.min_count,
                "prune_by": self.prune_by,
                "scheme": self.scheme,
                "k1": self.k1,
                "b": self.b,
                "normalization": self.normalization,
                "C": self.C,
                "class_weight": dict(self.class_weight) if self.class_weight else {},
                "positive_class": self.positive_class,
                "fit_intercept": self.fit_intercept,
                "tol": self.tol,
                "max_iter": self.max_iter,
            },
            "vocabulary": self.vectorizer_.vocabulary_.to_json(),
            "models": models,
        }
        payload = json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n"
        Path(path).write_text(payload, encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NgramTextClassifier":
        """Reload a model file; predictions match the saved model bit for bit."""
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        version = obj.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(
                f"unsupported model format version {version!r}; "
                f"expected {MODEL_FORMAT_VERSION}"
            )
        params = dict(obj["params"])
        classes = list(obj["classes"])
        est = cls(classes=classes, **params)

        vocab = Vocabulary.from_json(obj["vocabulary"])
        vectorizer = est._make_vectorizer()
        vectorizer.vocabulary_ = vocab

        classifier = est._make_classifier()
        classifier.classes_ = np.asarray(classes)
        rows = []
        biases = []
        for m in obj["models"]:
            w = np.zeros(len(vocab))
            for i, v in m["weights"]:
                w[i] = v
            rows.append(w)
            biases.append(m["bias"])
        classifier.coef_ = np.vstack(rows)
        classifier.intercept_ = np.asarray(biases, dtype=np.float64)
        if len(classes) == 2:
            classifier.positive_class_ = obj["positive_class"]

        est.vectorizer_ = vectorizer
        est.classifier_ = classifier
        est.classes_ = classifier.classes_
        est.problem_ = obj.get("problem")
        return est
