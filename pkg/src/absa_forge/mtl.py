"""Emit training/eval corpora for the text / it / it-mtl configurations.

A corpus is the cartesian product of examples and tasks, one record per pair:

* ``text``   - the input is the raw sentence (single task, ablation);
* ``it``     - the input is an instruction template (single task);
* ``it-mtl`` - instruction templates over two or more tasks.

Training emission draws the template per record and then shuffles the whole
product with the same seeded stream, so a trainer that consumes the file
sequentially sees tasks mixed uniformly; the multi-task objective (mean over
tasks of token-level negative log-likelihood of the target) then falls out of
plain sequential training, since every task contributes exactly one record
per example.  Eval emission keeps the product order and uses a fixed template
index by default.  Targets never depend on the template drawn, so all three
modes emit identical target strings for a given (example, task).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ._rng import Rng, mix
from .core import ForgeError, SchemaError, Task, applicable_tasks, task_by_name
from .ingest import Dataset
from .templates import (
    DEFAULT_LEXICON,
    DEFAULT_REGISTRY,
    SentimentLexicon,
    TemplateRegistry,
    render_input,
    render_target,
    sample_template,
)

CORPUS_SCHEMA = "absa-forge/corpus/v1"

MODES = ("text", "it", "it-mtl")

RANDOM_POLICY = "random"


class InapplicableTask(ForgeError):
    """A requested task needs annotations the dataset does not have."""


@dataclass(frozen=True)
class TrainRecord:
    example_id: str
    task: Task
    template_index: int  # -1 in text mode
    input: str
    target: str


@dataclass(frozen=True)
class EmitConfig:
    mode: str
    tasks: tuple[Task, ...]
    seed: int
    stage: str = "train"  # "train" | "eval"
    eval_template_policy: int | str = 0  # fixed index, or "random"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "it-mtl":
            if len(self.tasks) < 2:
                raise ValueError("it-mtl needs at least two tasks")
        elif len(self.tasks) != 1:
            raise ValueError(f"mode {self.mode} takes exactly one task")
        if self.stage not in ("train", "eval"):
            raise ValueError(f"stage must be train or eval, got {self.stage!r}")
        if isinstance(self.eval_template_policy, str) and self.eval_template_policy != RANDOM_POLICY:
            raise ValueError(f"eval_template_policy must be an index or {RANDOM_POLICY!r}")


def emit_corpus(
    dataset: Dataset,
    config: EmitConfig,
    registry: TemplateRegistry = DEFAULT_REGISTRY,
    lexicon: SentimentLexicon = DEFAULT_LEXICON,
    epoch: int = 0,
) -> list[TrainRecord]:
    """Render the examples-x-tasks product into records.

    Training order is a seeded shuffle; eval keeps product order.  ``epoch``
    (from 1 up) derives a fresh template/shuffle stream from the same seed for
    per-epoch re-emission; epoch 0 is the base stream.
    """
    allowed = set(applicable_tasks(dataset.capabilities))
    blocked = [t.name for t in config.tasks if t not in allowed]
    if blocked:
        raise InapplicableTask(
            f"task(s) {', '.join(blocked)} not applicable to dataset "
            f"{dataset.name!r} (has_category={dataset.capabilities.has_category}, "
            f"has_opinion={dataset.capabilities.has_opinion})"
        )

    rng = Rng(mix(config.seed, epoch))
    fixed_eval = config.stage == "eval" and config.eval_template_policy != RANDOM_POLICY

    records: list[TrainRecord] = []
    for ex in dataset.examples:
        for task in config.tasks:
            target = render_target(ex, task, lexicon)
            if config.mode == "text":
                records.append(TrainRecord(ex.id, task, -1, ex.text, target))
                continue
            if fixed_eval:
                index = int(config.eval_template_policy)
            else:
                index = sample_template(task, rng, registry)
            records.append(
                TrainRecord(ex.id, task, index, render_input(ex.text, task, index, registry), target)
            )

    if config.stage == "train":
        rng.shuffle(records)
    return records


def corpus_header(config: EmitConfig, dataset: Dataset, epoch: int = 0) -> dict:
    return {
        "schema": CORPUS_SCHEMA,
        "dataset": dataset.name,
        "split": dataset.split,
        "mode": config.mode,
        "tasks": [t.name for t in config.tasks],
        "seed": config.seed,
        "stage": config.stage,
        "epoch": epoch,
    }


def write_corpus(records: list[TrainRecord], header: dict, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for r in records:
            obj = {
                "id": r.example_id,
                "task": r.task.name,
                "template_index": r.template_index,
                "input": r.input,
                "target": r.target,
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def read_corpus(path: str | Path) -> tuple[dict, list[TrainRecord]]:
    path = Path(path)
    lines = [l for l in path.read_text(encoding="utf-8").splitlines() if l.strip()]
    if not lines:
        raise SchemaError(f"{path}: empty file, expected schema header")
    header = json.loads(lines[0])
    if not isinstance(header, dict) or header.get("schema") != CORPUS_SCHEMA:
        raise SchemaError(f"{path}: expected schema {CORPUS_SCHEMA!r}, got {header.get('schema')!r}")
    records = []
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
            records.append(
                TrainRecord(
                    example_id=str(obj["id"]),
                    task=task_by_name(obj["task"]),
                    template_index=int(obj["template_index"]),
                    input=obj["input"],
                    target=obj["target"],
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
            raise SchemaError(f"{path}: line {line_no}: bad record: {err}") from None
    return header, records
