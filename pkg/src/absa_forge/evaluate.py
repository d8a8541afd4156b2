"""Tuple-level micro precision/recall/F1 with duplicate-safe counting.

Both sides are compared as sets: predicted tuples arrive deduplicated from
the parser, and gold projections are deduplicated here as well, so a
generation that repeats one correct tuple cannot earn more than one true
positive (naive list counting inflates F1).  All scores are exact rationals;
rendering rounds to four decimal places at the edge only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .core import Example, ForgeError, ProjectedTuple, Task, project, task_by_name
from .parser import ParseOutcome


class TaskMismatch(ForgeError):
    """A parse outcome was produced for a different task than the one scored."""


@dataclass(frozen=True)
class ExampleScore:
    id: str
    tp: int
    pred: int
    gold: int
    malformed_segments: int


@dataclass(frozen=True)
class ScoreReport:
    task: str
    tp: int
    pred_count: int
    gold_count: int
    precision: Fraction
    recall: Fraction
    f1: Fraction
    per_example: tuple[ExampleScore, ...]
    options: dict = field(default_factory=dict)
    gold_duplicates_removed: int = 0
    run: str | None = None
    k: int | None = None


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def f1_from_counts(tp: int, pred_count: int, gold_count: int) -> tuple[Fraction, Fraction, Fraction]:
    precision = _ratio(tp, pred_count)
    recall = _ratio(tp, gold_count)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else Fraction(0)
    return precision, recall, f1


def _fold_tuple(t: ProjectedTuple) -> ProjectedTuple:
    return tuple(x.casefold() if isinstance(x, str) else x for x in t)


def score(
    pairs: list[tuple[Example, ParseOutcome]],
    task: Task,
    casefold: bool = False,
    run: str | None = None,
    k: int | None = None,
) -> ScoreReport:
    """Micro-aggregate tuple matches over (gold example, parse outcome) pairs."""
    tp = pred_count = gold_count = gold_dupes = 0
    per_example: list[ExampleScore] = []
    for example, outcome in pairs:
        if outcome.task != task:
            raise TaskMismatch(f"outcome for {outcome.task.name} scored against {task.name}")
        gold_list = [project(q, task) for q in example.quads]
        gold = set(gold_list)
        gold_dupes += len(gold_list) - len(gold)
        pred = set(outcome.tuples)
        if casefold:
            gold = {_fold_tuple(t) for t in gold}
            pred = {_fold_tuple(t) for t in pred}
        ex_tp = len(pred & gold)
        tp += ex_tp
        pred_count += len(pred)
        gold_count += len(gold)
        per_example.append(
            ExampleScore(example.id, ex_tp, len(pred), len(gold), len(outcome.malformed))
        )
    precision, recall, f1 = f1_from_counts(tp, pred_count, gold_count)
    return ScoreReport(
        task=task.name,
        tp=tp,
        pred_count=pred_count,
        gold_count=gold_count,
        precision=precision,
        recall=recall,
        f1=f1,
        per_example=tuple(per_example),
        options={"casefold": casefold},
        gold_duplicates_removed=gold_dupes,
        run=run,
        k=k,
    )


def render_fraction(x: Fraction) -> str:
    return f"{float(x):.4f}"


def report_to_json(r: ScoreReport) -> dict:
    return {
        "task": r.task,
        "run": r.run,
        "k": r.k,
        "tp": r.tp,
        "pred_count": r.pred_count,
        "gold_count": r.gold_count,
        "precision": render_fraction(r.precision),
        "recall": render_fraction(r.recall),
        "f1": render_fraction(r.f1),
        "precision_exact": [r.precision.numerator, r.precision.denominator],
        "recall_exact": [r.recall.numerator, r.recall.denominator],
        "f1_exact": [r.f1.numerator, r.f1.denominator],
        "options": r.options,
        "gold_duplicates_removed": r.gold_duplicates_removed,
        "per_example": [
            {"id": e.id, "tp": e.tp, "pred": e.pred, "gold": e.gold, "malformed_segments": e.malformed_segments}
            for e in r.per_example
        ],
    }


def report_from_json(obj: dict) -> ScoreReport:
    task = task_by_name(obj["task"])
    per_example = tuple(
        ExampleScore(e["id"], e["tp"], e["pred"], e["gold"], e["malformed_segments"])
        for e in obj.get("per_example", [])
    )
    return ScoreReport(
        task=task.name,
        tp=obj["tp"],
        pred_count=obj["pred_count"],
        gold_count=obj["gold_count"],
        precision=Fraction(*obj["precision_exact"]),
        recall=Fraction(*obj["recall_exact"]),
        f1=Fraction(*obj["f1_exact"]),
        per_example=per_example,
        options=obj.get("options", {}),
        gold_duplicates_removed=obj.get("gold_duplicates_removed", 0),
        run=obj.get("run"),
        k=obj.get("k"),
    )


def _mean_std(values: list[float]) -> tuple[float, float]:
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


def render_report(reports: list[ScoreReport], layout: str = "markdown") -> str:
    """Tabulate reports (columns Task, Model/Run, K, F1) plus mean+-std rows
    for any (task, k) key shared by several runs."""
    if layout not in ("json", "markdown"):
        raise ValueError(f"layout must be json or markdown, got {layout!r}")

    rows = [
        {
            "task": r.task,
            "run": r.run if r.run is not None else "-",
            "k": r.k,
            "f1": render_fraction(r.f1),
        }
        for r in reports
    ]
    groups: dict[tuple[str, int | None], list[ScoreReport]] = {}
    for r in reports:
        groups.setdefault((r.task, r.k), []).append(r)
    aggregates = []
    for (task, k), members in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1] is None, kv[0][1])):
        if len(members) < 2:
            continue
        mean, std = _mean_std([float(m.f1) for m in members])
        aggregates.append(
            {"task": task, "k": k, "runs": len(members), "f1_mean": f"{mean:.4f}", "f1_std": f"{std:.4f}"}
        )

    if layout == "json":
        return json.dumps({"rows": rows, "aggregates": aggregates}, indent=2)

    lines = ["| Task | Model/Run | K | F1 |", "| --- | --- | --- | --- |"]
    for row in rows:
        k = row["k"] if row["k"] is not None else "-"
        lines.append(f"| {row['task']} | {row['run']} | {k} | {row['f1']} |")
    if aggregates:
        lines.append("")
        lines.append("| Task | K | Runs | F1 (mean ± std) |")
        lines.append("| --- | --- | --- | --- |")
        for agg in aggregates:
            k = agg["k"] if agg["k"] is not None else "-"
            lines.append(f"| {agg['task']} | {k} | {agg['runs']} | {agg['f1_mean']} ± {agg['f1_std']} |")
    return "\n".join(lines) + "\n"
