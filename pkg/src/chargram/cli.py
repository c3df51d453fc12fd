"""Command-line interface.

Subcommands: stats, train, predict, eval, cv, tune, leaderboard. Exit codes:
0 on success, 2 on usage or data errors, 3 on internal errors. Commands that
resolve a pipeline config echo the effective config to stderr; flags override
config-file values.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import leaderboard as lb
from .config import PipelineConfig
from .corpus import dataset_stats, load_dataset, unescape_field, escape_field
from .model_selection import (
    SearchSpace,
    confusion,
    cross_validate,
    evaluation_text,
    results_to_json,
    search,
    write_results_csv,
)
from .pipeline import NgramTextClassifier
from .weighting import NORMALIZATIONS, SCHEMES

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTERNAL = 3

_CONFIG_FIELDS = (
    "problem", "min_len", "max_len", "min_count", "prune_by", "scheme", "k1", "b",
    "normalization", "C", "positive_class", "tol", "max_iter", "seed",
)


def _add_config_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON pipeline config file (e.g. a preset)")
    sp.add_argument("--problem", help="label column to train or score on")
    sp.add_argument("--min-len", type=int, dest="min_len")
    sp.add_argument("--max-len", type=int, dest="max_len")
    sp.add_argument("--min-count", type=int, dest="min_count")
    sp.add_argument("--prune-by", choices=("total", "df"), dest="prune_by")
    sp.add_argument("--scheme", choices=SCHEMES)
    sp.add_argument("--k1", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--normalization", choices=NORMALIZATIONS)
    sp.add_argument("--C", type=float, dest="C")
    sp.add_argument(
        "--class-weight", action="append", dest="class_weight", metavar="CLASS=WEIGHT",
        help="per-class cost multiplier; repeatable, replaces the config's weights",
    )
    sp.add_argument("--classes", help="comma-separated class order override")
    sp.add_argument("--positive-class", dest="positive_class")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--max-iter", type=int, dest="max_iter")
    sp.add_argument("--seed", type=int)


def _parse_class_weights(items: list[str]) -> dict[str, float]:
    weights: dict[str, float] = {}
    for item in items:
        name, sep, raw = item.partition("=")
        if not sep or not name:
            raise ValueError(f"invalid class weight {item!r}; expected CLASS=WEIGHT")
        try:
            weights[name] = float(raw)
        except ValueError:
            raise ValueError(f"invalid class weight value in {item!r}") from None
    return weights


def _effective_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    updates: dict = {}
    for name in _CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            updates[name] = value
    if getattr(args, "class_weight", None):
        updates["class_weight"] = _parse_class_weights(args.class_weight)
    if getattr(args, "classes", None):
        updates["classes"] = args.classes.split(",")
    cfg = cfg.replace(**updates)
    cfg.validate()
    return cfg


def _echo_config(cfg: PipelineConfig, **extra) -> None:
    payload = cfg.to_json()
    payload.update(extra)
    print("config: " + json.dumps(payload, ensure_ascii=False, sort_keys=True), file=sys.stderr)


def _load_for_config(path: str, cfg: PipelineConfig):
    class_order = {cfg.problem: cfg.classes} if cfg.classes is not None else None
    return load_dataset(path, class_order=class_order)


def _write_text(path: str | None, content: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(content)
    else:
        Path(path).write_text(content, encoding="utf-8")


def cmd_stats(args: argparse.Namespace) -> int:
    report = dataset_stats(load_dataset(args.data))
    if args.json:
        print(json.dumps(report.to_json(), ensure_ascii=False, indent=2))
    else:
        print(report.to_text())
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    _echo_config(cfg, threads=args.threads)
    dataset = _load_for_config(args.data, cfg)
    labels = dataset.labels(cfg.problem)
    est = NgramTextClassifier.from_config(cfg, n_jobs=args.threads)
    est.fit(dataset.texts(), labels)
    est.save(args.model_out, problem=cfg.problem)
    n_grams = len(est.vectorizer_.vocabulary_)
    converged = "yes" if bool(est.classifier_.converged_.all()) else "NO"
    print(
        f"trained {cfg.problem} on {len(dataset)} documents: "
        f"{n_grams} n-grams, {len(est.classes_)} classes, converged: {converged}"
    )
    print(f"model written to {args.model_out}")
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    est = NgramTextClassifier.load(args.model)
    dataset = load_dataset(args.data)
    predictions = est.predict(dataset.texts())
    lines = ["id\tprediction"]
    for doc, label in zip(dataset.documents, predictions):
        lines.append(f"{escape_field(doc.id)}\t{escape_field(str(label))}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _read_predictions(path: str) -> dict[str, str]:
    raw = Path(path).read_text(encoding="utf-8")
    if raw == "":
        raise ValueError(f"{path}: empty file")
    if raw.endswith("\n"):
        raw = raw[:-1]
    lines = raw.split("\n")
    if lines[0].split("\t") != ["id", "prediction"]:
        raise ValueError(f"{path}: expected header id\\tprediction, got {lines[0]!r}")
    out: dict[str, str] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != 2:
            raise ValueError(f"{path}:{line_no}: expected 2 fields, got {len(fields)}")
        doc_id, label = (unescape_field(f) for f in fields)
        if doc_id in out:
            raise ValueError(f"{path}:{line_no}: duplicate id {doc_id!r}")
        out[doc_id] = label
    return out


def cmd_eval(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.gold)
    problem = args.problem
    if problem is None:
        if len(dataset.problems) != 1:
            raise ValueError(
                f"--problem required; gold file has problems {dataset.problems}"
            )
        problem = dataset.problems[0]
    gold = dataset.labels(problem)
    predictions = _read_predictions(args.pred)
    gold_ids = [d.id for d in dataset.documents]
    missing = [i for i in gold_ids if i not in predictions]
    extra = [i for i in predictions if i not in set(gold_ids)]
    if missing or extra:
        raise ValueError(
            f"prediction ids do not match gold ids "
            f"(missing {missing[:5]}, unexpected {extra[:5]})"
        )
    predicted = [predictions[i] for i in gold_ids]
    matrix = confusion(gold, predicted, dataset.classes[problem])
    if args.json:
        from .model_selection import macro_f1

        print(
            json.dumps(
                {
                    "problem": problem,
                    "macro_f1": macro_f1(matrix),
                    "per_class": matrix.per_class(),
                    "confusion": matrix.to_json(),
                },
                ensure_ascii=False,
                indent=2,
            )
        )
    else:
        print(evaluation_text(matrix))
    return EXIT_OK


def cmd_cv(args: argparse.Namespace) -> int:
    if args.score is not None:
        if args.problem is not None and args.problem != args.score:
            raise ValueError("--score and --problem disagree; give only one")
        args.problem = args.score
    cfg = _effective_config(args)
    _echo_config(cfg, k=args.k, stratify_by=args.stratify_by, threads=args.threads)
    dataset = _load_for_config(args.data, cfg)
    report = cross_validate(
        dataset, cfg, k=args.k, stratify_by=args.stratify_by, n_jobs=args.threads
    )
    if args.json:
        print(json.dumps(report.to_json(), ensure_ascii=False, indent=2))
    else:
        print(report.to_text())
    return EXIT_OK


def cmd_tune(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    space_obj = json.loads(Path(args.space).read_text(encoding="utf-8"))
    if not isinstance(space_obj, dict):
        raise ValueError(f"{args.space}: search space must be a JSON object")
    space = SearchSpace.from_json(space_obj)
    _echo_config(
        cfg, k=args.k, stratify_by=args.stratify_by, threads=args.threads,
        budget=args.budget, mode=args.mode, space=space_obj,
    )
    dataset = _load_for_config(args.data, cfg)
    results = search(
        dataset, cfg, space,
        budget=args.budget, mode=args.mode, k=args.k,
        stratify_by=args.stratify_by, n_jobs=args.threads,
    )
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        write_results_csv(results, f)
    print(json.dumps(results_to_json(results), ensure_ascii=False, indent=2))
    print(f"ranked results written to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_leaderboard(args: argparse.Namespace) -> int:
    rows = lb.load_scores(args.scores)
    transformed = lb.transform(rows)
    problems = args.problems.split(",") if args.problems else None
    ranking = lb.aggregate(transformed, problems)
    if args.json:
        print(json.dumps(lb.ranking_to_json(ranking), ensure_ascii=False, indent=2))
    else:
        print(lb.ranking_to_text(ranking))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            lb.ranking_to_csv(ranking, f)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chargram",
        description="Language-agnostic character n-gram text classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("stats", help="dataset statistics")
    sp.add_argument("--data", required=True, help="TSV dataset")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("train", help="train a model")
    sp.add_argument("--data", required=True)
    sp.add_argument("--model-out", dest="model_out", default="model.json")
    sp.add_argument("--threads", type=int, default=1)
    _add_config_flags(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="predict labels with a trained model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", default="-", help="output TSV path, '-' for stdout")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("eval", help="score predictions against gold labels")
    sp.add_argument("--gold", required=True)
    sp.add_argument("--pred", required=True)
    sp.add_argument("--problem")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("cv", help="stratified cross-validation")
    sp.add_argument("--data", required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--stratify-by", dest="stratify_by")
    sp.add_argument("--score", help="problem to score (alias for --problem)")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--json", action="store_true")
    _add_config_flags(sp)
    sp.set_defaults(func=cmd_cv)

    sp = sub.add_parser("tune", help="hyperparameter search")
    sp.add_argument("--data", required=True)
    sp.add_argument("--space", required=True, help="JSON search space file")
    sp.add_argument("--budget", type=int, required=True)
    sp.add_argument("--mode", choices=("grid", "random"), default="grid")
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--stratify-by", dest="stratify_by")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", default="search_results.csv", help="ranked CSV path")
    _add_config_flags(sp)
    sp.set_defaults(func=cmd_tune)

    sp = sub.add_parser("leaderboard", help="aggregate scores across problems")
    sp.add_argument("--scores", required=True, help="CSV with team,problem,macro_f1")
    sp.add_argument("--problems", help="comma-separated subset of problems")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out", help="also write the ranking as CSV")
    sp.set_defaults(func=cmd_leaderboard)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code in (0, None):
            return EXIT_OK
        return EXIT_USAGE
    threads = getattr(args, "threads", 1)
    if threads is not None and threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
