"""Corpus loading, statistics, and stratified fold assignment.

Datasets are UTF-8 tab-separated files with a header row: an ``id`` column,
a ``text`` column, and one further column per labeling problem. Tabs,
newlines, carriage returns, and backslashes inside fields are escaped so
that every document occupies exactly one line and loading then re-saving a
normalized file is byte-stable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "Document",
    "Dataset",
    "StatsReport",
    "FoldAssignment",
    "escape_field",
    "unescape_field",
    "load_dataset",
    "save_dataset",
    "dataset_stats",
    "split_stratified",
]


def escape_field(value: str) -> str:
    """Escape backslashes, tabs, newlines, and carriage returns."""
    return (
        value.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


_UNESCAPE = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def unescape_field(value: str) -> str:
    """Invert :func:`escape_field`; unknown escape sequences raise ``ValueError``."""
    if "\\" not in value:
        return value
    out: list[str] = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(value):
            raise ValueError("dangling backslash")
        code = value[i + 1]
        if code not in _UNESCAPE:
            raise ValueError(f"unknown escape sequence \\{code}")
        out.append(_UNESCAPE[code])
        i += 2
    return "".join(out)


@dataclass
class Document:
    """One corpus item: an identifier, raw text, and one label per problem."""

    id: str
    text: str
    labels: dict[str, str] = field(default_factory=dict)


@dataclass
class Dataset:
    """An ordered document collection with declared class lists per problem."""

    documents: list[Document]
    classes: dict[str, list[str]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def problems(self) -> list[str]:
        return list(self.classes)

    def texts(self) -> list[str]:
        return [d.text for d in self.documents]

    def labels(self, problem: str) -> list[str]:
        if problem not in self.classes:
            raise ValueError(
                f"unknown problem {problem!r}; available: {sorted(self.classes)}"
            )
        return [d.labels[problem] for d in self.documents]

    def subset(self, indices: list[int]) -> "Dataset":
        """New dataset holding the given documents, keeping class declarations."""
        docs = [self.documents[i] for i in indices]
        return Dataset(docs, {p: list(cs) for p, cs in self.classes.items()})


def load_dataset(
    path: str | Path, *, class_order: dict[str, list[str]] | None = None
) -> Dataset:
    """Load a TSV dataset.

    Class lists default to the sorted distinct label values per problem;
    ``class_order`` overrides them (every observed label must appear in the
    override). Malformed rows raise ``ValueError`` naming the line.
    """
    path = Path(path)
    raw = path.read_text(encoding="utf-8")
    if raw == "":
        raise ValueError(f"{path}: empty file")
    if raw.endswith("\n"):
        raw = raw[:-1]
    lines = raw.split("\n")
    header = lines[0].split("\t")
    if len(header) < 2 or header[0] != "id" or header[1] != "text":
        raise ValueError(f"{path}: header must start with 'id'\\t'text', got {header!r}")
    problems = header[2:]
    if len(set(problems)) != len(problems) or "id" in problems or "text" in problems:
        raise ValueError(f"{path}: duplicate column names in header {header!r}")

    documents: list[Document] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise ValueError(
                f"{path}:{line_no}: expected {len(header)} fields, got {len(fields)}"
            )
        try:
            fields = [unescape_field(f) for f in fields]
        except ValueError as exc:
            raise ValueError(f"{path}:{line_no}: {exc}") from None
        doc_id = fields[0]
        if doc_id == "":
            raise ValueError(f"{path}:{line_no}: empty id")
        if doc_id in seen_ids:
            raise ValueError(f"{path}:{line_no}: duplicate id {doc_id!r}")
        seen_ids.add(doc_id)
        labels = dict(zip(problems, fields[2:]))
        for p, v in labels.items():
            if v == "":
                raise ValueError(f"{path}:{line_no}: empty label for problem {p!r}")
        documents.append(Document(doc_id, fields[1], labels))

    classes: dict[str, list[str]] = {}
    if class_order:
        unknown = set(class_order) - set(problems)
        if unknown:
            raise ValueError(f"{path}: class_order names unknown problems {sorted(unknown)}")
    for p in problems:
        observed = sorted({d.labels[p] for d in documents})
        if class_order and p in class_order:
            declared = list(class_order[p])
            if len(set(declared)) != len(declared):
                raise ValueError(f"duplicate classes declared for problem {p!r}")
            stray = set(observed) - set(declared)
            if stray:
                raise ValueError(
                    f"{path}: labels {sorted(stray)} for problem {p!r} missing from "
                    f"declared classes {declared}"
                )
            classes[p] = declared
        else:
            classes[p] = observed
    return Dataset(documents, classes)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset as normalized TSV (columns: id, text, then problems)."""
    problems = dataset.problems
    rows = ["\t".join(["id", "text", *problems])]
    for doc in dataset.documents:
        missing = [p for p in problems if p not in doc.labels]
        if missing:
            raise ValueError(f"document {doc.id!r} lacks labels for {missing}")
        cells = [doc.id, doc.text, *(doc.labels[p] for p in problems)]
        rows.append("\t".join(escape_field(c) for c in cells))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


@dataclass
class StatsReport:
    """Descriptive statistics of a dataset."""

    n_documents: int
    mean_text_length: float
    n_empty_texts: int
    counts: dict[str, dict[str, int]]
    percentages: dict[str, dict[str, float]]

    def to_json(self) -> dict:
        return {
            "n_documents": self.n_documents,
            "mean_text_length": self.mean_text_length,
            "n_empty_texts": self.n_empty_texts,
            "problems": {
                p: {
                    "classes": list(cc),
                    "counts": dict(cc),
                    "percentages": dict(self.percentages[p]),
                }
                for p, cc in self.counts.items()
            },
        }

    def to_text(self) -> str:
        lines = [
            f"documents         {self.n_documents}",
            f"mean text length  {self.mean_text_length:.2f}",
            f"empty texts       {self.n_empty_texts}",
        ]
        for p, cc in self.counts.items():
            lines.append("")
            lines.append(f"problem {p}")
            name_w = max(len("class"), *(len(c) for c in cc))
            count_w = max(len("count"), *(len(str(n)) for n in cc.values()))
            lines.append(f"  {'class'.ljust(name_w)}  {'count'.rjust(count_w)}  share")
            for c, n in cc.items():
                pct = self.percentages[p][c]
                lines.append(f"  {c.ljust(name_w)}  {str(n).rjust(count_w)}  {pct:5.1f}%")
        return "\n".join(lines)


def dataset_stats(dataset: Dataset) -> StatsReport:
    """Per-problem class counts and shares, document count, mean text length."""
    if not dataset.documents:
        raise ValueError("dataset is empty")
    n = len(dataset.documents)
    counts = {p: {c: 0 for c in cs} for p, cs in dataset.classes.items()}
    for doc in dataset.documents:
        for p in dataset.classes:
            counts[p][doc.labels[p]] += 1
    percentages = {
        p: {c: 100.0 * cnt / n for c, cnt in cc.items()} for p, cc in counts.items()
    }
    return StatsReport(
        n_documents=n,
        mean_text_length=sum(len(d.text) for d in dataset.documents) / n,
        n_empty_texts=sum(1 for d in dataset.documents if d.text == ""),
        counts=counts,
        percentages=percentages,
    )


@dataclass
class FoldAssignment:
    """A k-fold partition as one fold index per document."""

    k: int
    seed: int
    problem: str
    assignment: list[int]

    def test_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignment) if f == fold]

    def train_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignment) if f != fold]


def split_stratified(
    dataset: Dataset, k: int, problem: str, seed: int = 42
) -> FoldAssignment:
    """Assign documents to ``k`` folds, stratified by ``problem``'s labels.

    Within each class (taken in declared order) the documents are shuffled
    with a PRNG seeded by ``seed`` and dealt round-robin, so per-fold class
    counts differ by at most one. Every class must have at least ``k``
    documents.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    labels = dataset.labels(problem)
    groups: dict[str, list[int]] = {c: [] for c in dataset.classes[problem]}
    for i, lab in enumerate(labels):
        groups[lab].append(i)
    for c, idxs in groups.items():
        if len(idxs) < k:
            raise ValueError(
                f"class {c!r} has {len(idxs)} documents, fewer than k={k}"
            )
    rng = random.Random(seed)
    assignment = [0] * len(labels)
    for c in dataset.classes[problem]:
        idxs = list(groups[c])
        rng.shuffle(idxs)
        for pos, i in enumerate(idxs):
            assignment[i] = pos % k
    return FoldAssignment(k=k, seed=seed, problem=problem, assignment=assignment)
