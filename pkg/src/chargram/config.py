"""Pipeline configuration: one flat record covering features, weighting, and training.

Configs load from JSON files (the committed presets use this format) and can
be overridden field by field, e.g. from command-line flags.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .weighting import WeightingConfig

__all__ = ["PipelineConfig"]


@dataclass
class PipelineConfig:
    """Every knob of the end-to-end pipeline, with working defaults."""

    problem: str = "task1"
    min_len: int = 1
    max_len: int = 5
    min_count: int = 2
    prune_by: str = "total"
    scheme: str = "sublinear_tfidf"
    k1: float = 2.0
    b: float = 0.75
    normalization: str = "l2"
    C: float = 1.0
    class_weight: dict[str, float] = field(default_factory=dict)
    classes: list[str] | None = None
    positive_class: str | None = None
    fit_intercept: bool = True
    tol: float = 1e-6
    max_iter: int = 10000
    seed: int = 42

    def validate(self) -> None:
        """Raise ``ValueError`` on any out-of-range or inconsistent field."""
        if not self.problem:
            raise ValueError("problem must be a non-empty name")
        if self.min_len < 1:
            raise ValueError(f"min_len must be at least 1, got {self.min_len}")
        if self.max_len < self.min_len:
            raise ValueError(
                f"max_len must be at least min_len, got [{self.min_len}, {self.max_len}]"
            )
        if self.min_count < 1:
            raise ValueError(f"min_count must be at least 1, got {self.min_count}")
        if self.prune_by not in ("total", "df"):
            raise ValueError(f"unknown prune_by {self.prune_by!r}")
        WeightingConfig(
            scheme=self.scheme, k1=self.k1, b=self.b, normalization=self.normalization
        ).validate()
        if self.C <= 0:
            raise ValueError(f"C must be positive, got {self.C}")
        for c, v in self.class_weight.items():
            if not v > 0:
                raise ValueError(f"class weight for {c!r} must be positive, got {v}")
        if self.classes is not None:
            if len(self.classes) < 2:
                raise ValueError("classes must list at least 2 entries")
            if len(set(self.classes)) != len(self.classes):
                raise ValueError(f"duplicate entries in classes {self.classes!r}")
        if self.positive_class is not None and self.classes is not None:
            if self.positive_class not in self.classes:
                raise ValueError(
                    f"positive_class {self.positive_class!r} not in classes {self.classes!r}"
                )
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")

    def replace(self, **updates) -> "PipelineConfig":
        """Copy with the given fields replaced."""
        return dataclasses.replace(self, **updates)

    def to_json(self) -> dict:
        obj = dataclasses.asdict(self)
        obj["class_weight"] = dict(self.class_weight)
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**obj)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(obj, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        return cls.from_json(obj)
