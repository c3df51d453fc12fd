"""Evaluation metrics, stratified cross-validation, and hyperparameter search.

Model ranking uses Macro-F1: the unweighted mean of per-class F1 scores, so
minority classes count as much as majority ones. Cross-validation rebuilds
the vocabulary inside every training fold, so no statistic of a held-out
document ever reaches the model that scores it.
"""

from __future__ import annotations

import csv
import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from ._parallel import thread_map
from .config import PipelineConfig
from .corpus import Dataset, split_stratified
from .pipeline import NgramTextClassifier

__all__ = [
    "ConfusionMatrix",
    "confusion",
    "macro_f1",
    "evaluation_text",
    "CVReport",
    "cross_validate",
    "SearchSpace",
    "SearchResult",
    "log_grid",
    "search",
    "results_to_json",
    "write_results_csv",
]


@dataclass(eq=False)
class ConfusionMatrix:
    """Gold-by-predicted counts over a fixed class order (rows are gold)."""

    classes: list[str]
    counts: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.classes == other.classes and np.array_equal(self.counts, other.counts)

    def per_class(self) -> dict[str, dict[str, float]]:
        """Precision, recall, and F1 per class, with 0-denominator conventions."""
        out: dict[str, dict[str, float]] = {}
        for i, c in enumerate(self.classes):
            tp = int(self.counts[i, i])
            gold = int(self.counts[i, :].sum())
            pred = int(self.counts[:, i].sum())
            p = tp / pred if pred else 0.0
            r = tp / gold if gold else 0.0
            f1 = 2.0 * p * r / (p + r) if p + r else 0.0
            out[c] = {"precision": p, "recall": r, "f1": f1, "support": gold}
        return out

    def to_json(self) -> dict:
        return {
            "classes": list(self.classes),
            "counts": [[int(v) for v in row] for row in self.counts],
        }

    def to_text(self) -> str:
        width = max(
            max(len(c) for c in self.classes),
            max(len(str(int(v))) for v in self.counts.ravel()),
            4,
        )
        head = " ".join(["gold\\pred".ljust(width + 5)] + [c.rjust(width) for c in self.classes])
        lines = [head]
        for i, c in enumerate(self.classes):
            row = [str(int(v)).rjust(width) for v in self.counts[i]]
            lines.append(" ".join([c.ljust(width + 5)] + row))
        return "\n".join(lines)


def confusion(gold: Iterable[str], predicted: Iterable[str], classes: Sequence[str]) -> ConfusionMatrix:
    """Count gold/predicted label pairs; labels outside ``classes`` raise ``ValueError``."""
    classes = list(classes)
    if not classes or len(set(classes)) != len(classes):
        raise ValueError(f"classes must be non-empty and unique, got {classes!r}")
    index = {c: i for i, c in enumerate(classes)}
    gold = list(gold)
    predicted = list(predicted)
    if len(gold) != len(predicted):
        raise ValueError(f"got {len(gold)} gold labels but {len(predicted)} predictions")
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for g, p in zip(gold, predicted):
        if g not in index:
            raise ValueError(f"gold label {g!r} not in class list {classes}")
        if p not in index:
            raise ValueError(f"predicted label {p!r} not in class list {classes}")
        counts[index[g], index[p]] += 1
    return ConfusionMatrix(classes=classes, counts=counts)


def macro_f1(matrix: ConfusionMatrix) -> float:
    """Unweighted mean of per-class F1.

    A class with zero precision+recall contributes F1 = 0; in particular a
    class absent from both gold and predictions drags the mean down rather
    than being skipped.
    """
    scores = matrix.per_class()
    return float(np.mean([scores[c]["f1"] for c in matrix.classes]))


def evaluation_text(matrix: ConfusionMatrix) -> str:
    """Aligned per-class precision/recall/F1 table, macro-F1, and the matrix."""
    scores = matrix.per_class()
    name_w = max(len("class"), *(len(c) for c in matrix.classes))
    lines = [f"{'class'.ljust(name_w)}  precision  recall      f1  support"]
    for c in matrix.classes:
        s = scores[c]
        lines.append(
            f"{c.ljust(name_w)}  {s['precision']:9.4f}  {s['recall']:6.4f}  {s['f1']:6.4f}  {s['support']:7d}"
        )
    lines.append(f"macro-F1 {macro_f1(matrix):.4f}")
    lines.append("")
    lines.append(matrix.to_text())
    return "\n".join(lines)


@dataclass
class CVReport:
    """Result of one stratified cross-validation run."""

    problem: str
    stratify_by: str
    k: int
    seed: int
    fold_scores: list[float]
    mean_macro_f1: float
    pooled: ConfusionMatrix
    pooled_macro_f1: float
    config: PipelineConfig

    def to_json(self) -> dict:
        return {
            "problem": self.problem,
            "stratify_by": self.stratify_by,
            "k": self.k,
            "seed": self.seed,
            "fold_scores": list(self.fold_scores),
            "mean_macro_f1": self.mean_macro_f1,
            "pooled_macro_f1": self.pooled_macro_f1,
            "pooled_confusion": self.pooled.to_json(),
            "config": self.config.to_json(),
        }

    def to_text(self) -> str:
        lines = [
            f"cross-validation: problem {self.problem}, k={self.k}, "
            f"stratified by {self.stratify_by}, seed {self.seed}"
        ]
        for i, s in enumerate(self.fold_scores):
            lines.append(f"fold {i} macro-F1  {s:.4f}")
        lines.append(f"mean macro-F1    {self.mean_macro_f1:.4f}")
        lines.append(f"pooled macro-F1  {self.pooled_macro_f1:.4f}")
        lines.append("")
        lines.append("pooled confusion:")
        lines.append(self.pooled.to_text())
        return "\n".join(lines)


def cross_validate(
    dataset: Dataset,
    config: PipelineConfig,
    *,
    k: int,
    stratify_by: str | None = None,
    seed: int | None = None,
    n_jobs: int | None = None,
    keep_models: bool = False,
) -> CVReport:
    """Stratified k-fold cross-validation of one pipeline config.

    Folds may be stratified by a different problem's labels than the scored
    one (``stratify_by``). Each fold's model is fit on the training folds
    alone, vocabulary included. With ``keep_models`` the fitted per-fold
    pipelines stay on the report as ``models_``.
    """
    config.validate()
    problem = config.problem
    stratify = stratify_by if stratify_by is not None else problem
    seed_eff = config.seed if seed is None else seed
    labels = dataset.labels(problem)
    classes = config.classes if config.classes is not None else dataset.classes[problem]
    folds = split_stratified(dataset, k, stratify, seed_eff)

    def run_fold(fold: int):
        train_idx = folds.train_indices(fold)
        test_idx = folds.test_indices(fold)
        est = NgramTextClassifier.from_config(config, n_jobs=1)
        est.fit(
            [dataset.documents[i].text for i in train_idx],
            [labels[i] for i in train_idx],
        )
        predicted = est.predict([dataset.documents[i].text for i in test_idx])
        matrix = confusion([labels[i] for i in test_idx], predicted, classes)
        return est, matrix

    results = thread_map(run_fold, list(range(k)), n_jobs)
    matrices = [m for _, m in results]
    fold_scores = [macro_f1(m) for m in matrices]
    pooled = ConfusionMatrix(
        classes=list(classes),
        counts=np.sum([m.counts for m in matrices], axis=0),
    )
    report = CVReport(
        problem=problem,
        stratify_by=stratify,
        k=k,
        seed=seed_eff,
        fold_scores=fold_scores,
        mean_macro_f1=float(np.mean(fold_scores)),
        pooled=pooled,
        pooled_macro_f1=macro_f1(pooled),
        config=config,
    )
    if keep_models:
        report.models_ = [est for est, _ in results]
        report.folds_ = folds
    return report


def log_grid(low: float, high: float, num: int) -> list[float]:
    """``num`` log-spaced values from ``low`` to ``high`` inclusive."""
    if low <= 0 or high <= low or num < 2:
        raise ValueError("need 0 < low < high and num >= 2")
    return [float(v) for v in np.geomspace(low, high, num)]


@dataclass
class SearchSpace:
    """Axes of a hyperparameter search; ``None`` keeps the base config's value.

    ``class_weight`` maps class names to candidate weight lists; candidates
    merge onto the base config's class_weight dict.
    """

    max_len: list[int] | None = None
    scheme: list[str] | None = None
    normalization: list[str] | None = None
    C: list[float] | None = None
    class_weight: dict[str, list[float]] | None = None

    @classmethod
    def from_json(cls, obj: dict) -> "SearchSpace":
        known = {"max_len", "scheme", "normalization", "C", "class_weight"}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown search space keys: {sorted(unknown)}")
        return cls(**obj)

    def axes(self) -> list[tuple[str, str | None, list]]:
        """Ordered (field, class-or-None, values) axes; empty lists are invalid."""
        out: list[tuple[str, str | None, list]] = []
        for name in ("max_len", "scheme", "normalization", "C"):
            values = getattr(self, name)
            if values is not None:
                if not values:
                    raise ValueError(f"search axis {name!r} must list at least one value")
                out.append((name, None, list(values)))
        if self.class_weight is not None:
            for c in sorted(self.class_weight):
                values = self.class_weight[c]
                if not values:
                    raise ValueError(f"class_weight axis {c!r} must list at least one value")
                out.append(("class_weight", c, list(values)))
        return out


@dataclass
class SearchResult:
    """One evaluated candidate, ranked by mean macro-F1."""

    rank: int
    config: PipelineConfig
    report: CVReport


def _candidates(
    base: PipelineConfig, space: SearchSpace, mode: str, budget: int, seed: int
) -> list[PipelineConfig]:
    axes = space.axes()
    pools = [values for _, _, values in axes]
    if mode == "grid":
        combos = list(itertools.islice(itertools.product(*pools), budget))
    else:
        rng = random.Random(seed)
        combos = [tuple(rng.choice(pool) for pool in pools) for _ in range(budget)]
    configs = []
    for combo in combos:
        updates: dict = {}
        weights = dict(base.class_weight)
        for (name, cls_name, _), value in zip(axes, combo):
            if name == "class_weight":
                weights[cls_name] = value
            else:
                updates[name] = value
        updates["class_weight"] = weights
        cfg = base.replace(**updates)
        cfg.validate()
        configs.append(cfg)
    return configs


def search(
    dataset: Dataset,
    base_config: PipelineConfig,
    space: SearchSpace,
    *,
    budget: int,
    mode: str = "grid",
    k: int = 3,
    stratify_by: str | None = None,
    seed: int | None = None,
    n_jobs: int | None = None,
) -> list[SearchResult]:
    """Evaluate up to ``budget`` candidate configs by cross-validation.

    Grid mode walks the axis product in deterministic order (fields in
    declaration order, class weights by class name) and stops at the budget;
    random mode draws each axis uniformly with a seeded PRNG. Results come
    back ranked by mean macro-F1, ties broken by enumeration order.
    """
    if budget < 1:
        raise ValueError(f"budget must be at least 1, got {budget}")
    if mode not in ("grid", "random"):
        raise ValueError(f"unknown search mode {mode!r}; expected 'grid' or 'random'")
    seed_eff = base_config.seed if seed is None else seed
    configs = _candidates(base_config, space, mode, budget, seed_eff)

    def evaluate(cfg: PipelineConfig) -> CVReport:
        return cross_validate(
            dataset, cfg, k=k, stratify_by=stratify_by, seed=seed_eff, n_jobs=1
        )

    reports = thread_map(evaluate, configs, n_jobs)
    order = sorted(range(len(configs)), key=lambda i: (-reports[i].mean_macro_f1, i))
    return [
        SearchResult(rank=pos + 1, config=configs[i], report=reports[i])
        for pos, i in enumerate(order)
    ]


def results_to_json(results: list[SearchResult]) -> list[dict]:
    return [
        {
            "rank": r.rank,
            "mean_macro_f1": r.report.mean_macro_f1,
            "fold_scores": list(r.report.fold_scores),
            "config": r.config.to_json(),
        }
        for r in results
    ]


def write_results_csv(results: list[SearchResult], out: TextIO) -> None:
    """Ranked CSV: one row per candidate, config columns plus mean macro-F1."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        [
            "rank", "mean_macro_f1", "problem", "min_len", "max_len", "min_count",
            "prune_by", "scheme", "k1", "b", "normalization", "C", "class_weight",
        ]
    )
    for r in results:
        cfg = r.config
        weights = ";".join(f"{c}={cfg.class_weight[c]}" for c in sorted(cfg.class_weight))
        writer.writerow(
            [
                r.rank, r.report.mean_macro_f1, cfg.problem, cfg.min_len,
                cfg.max_len, cfg.min_count, cfg.prune_by, cfg.scheme, cfg.k1,
                cfg.b, cfg.normalization, cfg.C, weights,
            ]
        )
