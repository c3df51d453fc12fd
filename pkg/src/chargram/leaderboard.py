"""Cross-problem leaderboard aggregation.

Raw scores from problems of different difficulty are not comparable, so each
score is first transformed to its ratio against the best score of its
problem (the winner maps to exactly 1.0). A team's aggregate is then the
unweighted mean of its transformed scores over the problems it entered,
annotated with how many that was.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

__all__ = [
    "ScoreRow",
    "TeamScore",
    "load_scores",
    "transform",
    "aggregate",
    "ranking_to_text",
    "ranking_to_csv",
    "ranking_to_json",
]


@dataclass(frozen=True)
class ScoreRow:
    """One team's score on one problem."""

    team: str
    problem: str
    macro_f1: float


@dataclass(frozen=True)
class TeamScore:
    """One team's aggregated leaderboard entry."""

    rank: int
    team: str
    n_problems: int
    mean_score: float


def load_scores(path: str | Path) -> list[ScoreRow]:
    """Read a score table CSV with header ``team,problem,macro_f1``."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if header != ["team", "problem", "macro_f1"]:
            raise ValueError(
                f"{path}: expected header team,problem,macro_f1, got {','.join(header)}"
            )
        rows: list[ScoreRow] = []
        seen: set[tuple[str, str]] = set()
        for line_no, rec in enumerate(reader, start=2):
            if len(rec) != 3:
                raise ValueError(f"{path}:{line_no}: expected 3 fields, got {len(rec)}")
            team, problem, raw = rec
            if not team or not problem:
                raise ValueError(f"{path}:{line_no}: empty team or problem")
            try:
                score = float(raw)
            except ValueError:
                raise ValueError(f"{path}:{line_no}: invalid score {raw!r}") from None
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"{path}:{line_no}: score {score} outside [0, 1]")
            key = (team, problem)
            if key in seen:
                raise ValueError(f"{path}:{line_no}: duplicate entry for {team!r} on {problem!r}")
            seen.add(key)
            rows.append(ScoreRow(team=team, problem=problem, macro_f1=score))
    if not rows:
        raise ValueError(f"{path}: no score rows")
    return rows


def transform(rows: Sequence[ScoreRow]) -> list[ScoreRow]:
    """Divide each score by the best score of its problem.

    Every problem winner maps to exactly 1.0. A problem whose best score is
    not positive cannot be normalized and raises ``ValueError``.
    """
    best: dict[str, float] = {}
    for r in rows:
        if r.problem not in best or r.macro_f1 > best[r.problem]:
            best[r.problem] = r.macro_f1
    dead = sorted(p for p, m in best.items() if m <= 0.0)
    if dead:
        raise ValueError(f"problems {dead} have no positive score; cannot normalize")
    return [ScoreRow(r.team, r.problem, r.macro_f1 / best[r.problem]) for r in rows]


def aggregate(
    rows: Sequence[ScoreRow], problems: Sequence[str] | None = None
) -> list[TeamScore]:
    """Mean transformed score per team over the selected problems.

    Teams without any entry in the selection are dropped. Ranking is by mean
    descending, ties broken by team name for a deterministic order.
    """
    available: list[str] = []
    for r in rows:
        if r.problem not in available:
            available.append(r.problem)
    if problems is None:
        selected = available
    else:
        selected = list(problems)
        unknown = [p for p in selected if p not in available]
        if unknown:
            raise ValueError(f"unknown problems {unknown}; available: {available}")
        if len(set(selected)) != len(selected):
            raise ValueError(f"duplicate problems in selection {selected!r}")
    by_team: dict[str, list[float]] = {}
    for r in rows:
        if r.problem in selected:
            by_team.setdefault(r.team, []).append(r.macro_f1)
    entries = sorted(
        ((scores, team) for team, scores in by_team.items()),
        key=lambda e: (-sum(e[0]) / len(e[0]), e[1]),
    )
    return [
        TeamScore(
            rank=i + 1,
            team=team,
            n_problems=len(scores),
            mean_score=sum(scores) / len(scores),
        )
        for i, (scores, team) in enumerate(entries)
    ]


def ranking_to_text(ranking: Sequence[TeamScore]) -> str:
    """Aligned leaderboard table; means shown to 4 decimals."""
    team_w = max(len("team"), *(len(t.team) for t in ranking)) if ranking else len("team")
    lines = [f"{'rank'.rjust(4)}  {'team'.ljust(team_w)}  problems    mean"]
    for t in ranking:
        lines.append(
            f"{str(t.rank).rjust(4)}  {t.team.ljust(team_w)}  {str(t.n_problems).rjust(8)}  {t.mean_score:.4f}"
        )
    return "\n".join(lines)


def ranking_to_csv(ranking: Sequence[TeamScore], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["rank", "team", "n_problems", "mean_score"])
    for t in ranking:
        writer.writerow([t.rank, t.team, t.n_problems, t.mean_score])


def ranking_to_json(ranking: Sequence[TeamScore]) -> list[dict]:
    return [
        {
            "rank": t.rank,
            "team": t.team,
            "n_problems": t.n_problems,
            "mean_score": t.mean_score,
        }
        for t in ranking
    ]
