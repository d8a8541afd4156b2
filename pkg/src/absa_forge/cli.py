"""Command-line interface: import -> fewshot -> emit -> (external model) -> parse -> eval -> report.

Every subcommand is a thin wrapper over one module operation, writes a run
manifest beside its outputs, and is exit-code disciplined: 0 on success, 1 on
data errors (per-line diagnostics on stderr), 2 on usage errors.  All
randomness flows from explicit ``--seed`` flags; nothing is drawn from the
environment.
"""

from __future__ import annotations

import argparse
import json
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .core import ForgeError, TASKS, applicable_tasks, task_by_name
from .evaluate import render_fraction, render_report, report_from_json, report_to_json, score
from .fewshot import FewShotSpec, sample_fewshot, stratum_totals
from .ingest import DATASET_SCHEMA, Dataset, IngestError, load_dataset, write_canonical
from .manifest import build_manifest, write_manifest
from .mtl import CORPUS_SCHEMA, EmitConfig, corpus_header, emit_corpus, write_corpus
from .parser import (
    PREDICTIONS_SCHEMA,
    parse_prediction,
    read_parsed,
    read_predictions,
    write_parsed,
)
from .templates import DEFAULT_REGISTRY, SSEP_JOINER, TemplateRegistry

_EPILOG = (
    f"File contracts: canonical datasets are line-delimited JSON with a {DATASET_SCHEMA!r} "
    f"header; emitted corpora carry a {CORPUS_SCHEMA!r} header on line 1; predictions use "
    f"{PREDICTIONS_SCHEMA!r}. Multi-tuple targets are joined with the bit-exact separator "
    f"{SSEP_JOINER!r}. A config file given via --config supplies per-subcommand defaults "
    "(JSON, one section per subcommand); explicit flags always win. See docs/formats.md."
)


def _argv_of(args) -> list[str]:
    return list(getattr(args, "argv", sys.argv[1:]))


def _err(msg: str) -> None:
    print(f"absa-forge: {msg}", file=sys.stderr)


def _print_issues(issues, path) -> None:
    for issue in issues:
        print(f"{path}:{issue.line_no}: {issue.severity}: {issue.message}", file=sys.stderr)


def _parse_tasks(spec: str, dataset: Dataset) -> tuple:
    spec = spec.strip().lower()
    if spec == "all":
        return tuple(TASKS.values())
    if spec == "applicable":
        return tuple(applicable_tasks(dataset.capabilities))
    return tuple(task_by_name(part) for part in spec.split(","))


def _load_canonical_or_die(path: str | Path) -> Dataset:
    dataset, issues = load_dataset(path, "canonical")
    _print_issues([i for i in issues if i.severity == "warning"], path)
    return dataset


def _registry_from(args) -> TemplateRegistry:
    if getattr(args, "template_file", None):
        return TemplateRegistry.from_file(args.template_file)
    return DEFAULT_REGISTRY


# --- subcommand implementations ---------------------------------------------


def cmd_import(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs, outputs = [], []
    summary = {}
    for split in ("train", "dev", "test"):
        src = getattr(args, split)
        if src is None:
            continue
        dataset, issues = load_dataset(src, args.format, split=split, name=args.name, lenient=args.lenient)
        _print_issues(issues, src)
        dest = out_dir / f"{split}.jsonl"
        write_canonical(dataset, dest)
        inputs.append(src)
        outputs.append(dest)
        summary[split] = {
            "examples": len(dataset.examples),
            "skipped": sum(1 for i in issues if i.severity == "error"),
        }
    if not inputs:
        _err("nothing to import: give at least one of --train/--dev/--test")
        return 2
    write_manifest(build_manifest(_argv_of(args), {}, inputs, outputs, details=summary), out_dir)
    return 0


def cmd_inspect(args) -> int:
    stats = {}
    for path in args.data:
        dataset = _load_canonical_or_die(path)
        per_category = {}
        per_sentiment = {}
        for ex in dataset.examples:
            for q in ex.quads:
                if q.category is not None:
                    per_category[q.category.surface] = per_category.get(q.category.surface, 0) + 1
                per_sentiment[q.sentiment.value] = per_sentiment.get(q.sentiment.value, 0) + 1
        stats[str(path)] = {
            "name": dataset.name,
            "split": dataset.split,
            "examples": len(dataset.examples),
            "quads": sum(len(ex.quads) for ex in dataset.examples),
            "has_category": dataset.capabilities.has_category,
            "has_opinion": dataset.capabilities.has_opinion,
            "quads_per_category": dict(sorted(per_category.items())),
            "quads_per_sentiment": dict(sorted(per_sentiment.items())),
        }
    print(json.dumps(stats, indent=2, ensure_ascii=False))
    return 0


def cmd_fewshot(args) -> int:
    splits = [s.strip() for s in args.split.split(",") if s.strip()]
    if "test" in splits:
        _err("the test split is never subsampled; drop it from --split")
        return 2
    data_dir = Path(args.data)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = FewShotSpec(k=args.k, stratify_by=args.by, seed=args.seed)
    inputs, outputs = [], []
    details = {"k": args.k, "stratify_by": args.by}
    for split in splits:
        src = data_dir / f"{split}.jsonl"
        dataset = _load_canonical_or_die(src)
        subset = sample_fewshot(dataset, spec)
        dest = out_dir / f"{split}.jsonl"
        write_canonical(subset, dest)
        inputs.append(src)
        outputs.append(dest)
        details[split] = {
            "prefix_length": len(subset.examples),
            "total": len(dataset.examples),
            "stratum_counts": dict(sorted(stratum_totals(subset, args.by).items())),
        }
    write_manifest(build_manifest(_argv_of(args), {"sample_seed": args.seed}, inputs, outputs, details), out_dir)
    return 0


def cmd_emit(args) -> int:
    dataset = _load_canonical_or_die(args.data)
    registry = _registry_from(args)
    tasks = _parse_tasks(args.tasks, dataset)
    policy = args.eval_template
    if policy != "random":
        policy = int(policy)
    config = EmitConfig(mode=args.mode, tasks=tasks, seed=args.seed, stage=args.stage, eval_template_policy=policy)

    out = Path(args.out)
    outputs = []
    epochs = range(args.per_epoch) if args.per_epoch else [0]
    for epoch in epochs:
        records = emit_corpus(dataset, config, registry=registry, epoch=epoch)
        dest = out if not args.per_epoch else out.with_name(f"{out.stem}.epoch{epoch:03d}{out.suffix}")
        write_corpus(records, corpus_header(config, dataset, epoch), dest)
        outputs.append(dest)
    write_manifest(
        build_manifest(
            _argv_of(args),
            {"seed": args.seed},
            [args.data],
            outputs,
            details={"mode": args.mode, "tasks": [t.name for t in tasks], "records_per_file": len(records)},
        ),
        outputs[0],
    )
    return 0


def cmd_parse(args) -> int:
    records, warnings = read_predictions(args.pred)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    vocab: frozenset = frozenset()
    inputs = [args.pred]
    if args.gold:
        gold = _load_canonical_or_die(args.gold)
        vocab = gold.category_vocab
        inputs.append(args.gold)
    elif args.vocab:
        vocab = frozenset(
            l.strip() for l in Path(args.vocab).read_text(encoding="utf-8").splitlines() if l.strip()
        )
        inputs.append(args.vocab)
    outcomes = [(r.id, parse_prediction(r.generated, r.task, vocab)) for r in records]
    write_parsed(outcomes, args.out)
    malformed = sum(len(o.malformed) for _, o in outcomes)
    write_manifest(
        build_manifest(
            _argv_of(args),
            {},
            inputs,
            [args.out],
            details={"records": len(records), "malformed_segments": malformed},
        ),
        args.out,
    )
    return 0


def cmd_eval(args) -> int:
    gold = _load_canonical_or_die(args.gold)
    task = task_by_name(args.task)
    parsed = read_parsed(args.pred)
    by_id = {}
    for ex_id, outcome in parsed:
        if outcome.task != task:
            continue
        if ex_id in by_id:
            _err(f"duplicate parsed record for id {ex_id!r} and task {task.name}")
            return 1
        by_id[ex_id] = outcome
    gold_ids = {ex.id for ex in gold.examples}
    stray = sorted(set(by_id) - gold_ids)
    if stray:
        _err(f"parsed file has ids not present in gold: {', '.join(stray[:5])}")
        return 1
    from .parser import ParseOutcome  # local to keep module surface tidy

    empty = ParseOutcome(task=task, tuples=frozenset(), malformed=(), raw_segment_count=0)
    pairs = [(ex, by_id.get(ex.id, empty)) for ex in gold.examples]
    report = score(pairs, task, casefold=args.casefold, run=args.run, k=args.k)
    rendered = render_report([report], layout=args.format) if args.format else None
    if args.out:
        Path(args.out).write_text(
            json.dumps(report_to_json(report), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        write_manifest(
            build_manifest(_argv_of(args), {}, [args.gold, args.pred], [args.out], details={}),
            args.out,
        )
    print(
        f"task={report.task} tp={report.tp} pred={report.pred_count} gold={report.gold_count} "
        f"P={render_fraction(report.precision)} R={render_fraction(report.recall)} "
        f"F1={render_fraction(report.f1)}"
    )
    if rendered:
        print(rendered, end="")
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in args.scores:
        reports.append(report_from_json(json.loads(Path(path).read_text(encoding="utf-8"))))
    rendered = render_report(reports, layout=args.format)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
        write_manifest(build_manifest(_argv_of(args), {}, list(args.scores), [args.out], details={}), args.out)
    else:
        print(rendered, end="")
    return 0


def _pipeline_cell(cell_args: dict) -> dict:
    """One (k, seed, mode) grid cell; runs in its own process."""
    args = argparse.Namespace(**cell_args)
    cell_dir = Path(args.cell_dir)
    cell_dir.mkdir(parents=True, exist_ok=True)

    fs_rc = cmd_fewshot(
        argparse.Namespace(
            data=args.data, out=str(cell_dir / "fewshot"), k=args.k, by=args.by, seed=args.sample_seed,
            split="train,dev", argv=args.argv,
        )
    )
    if fs_rc != 0:
        return {"cell": cell_dir.name, "status": "fewshot_failed"}

    train_path = cell_dir / "fewshot" / "train.jsonl"
    train = _load_canonical_or_die(train_path)
    tasks = _parse_tasks(args.tasks, train)
    config = EmitConfig(mode=args.mode, tasks=tasks, seed=args.seed)
    corpus_path = cell_dir / "train.corpus.jsonl"
    write_corpus(emit_corpus(train, config), corpus_header(config, train), corpus_path)

    test_path = Path(args.data) / "test.jsonl"
    test = _load_canonical_or_die(test_path)
    eval_config = EmitConfig(mode=args.mode, tasks=tasks, seed=args.seed, stage="eval")
    eval_path = cell_dir / "eval.corpus.jsonl"
    write_corpus(emit_corpus(test, eval_config), corpus_header(eval_config, test), eval_path)

    result = {"cell": cell_dir.name, "status": "emitted", "records": None}
    if args.model_cmd:
        preds_path = cell_dir / "predictions.jsonl"
        cmd = args.model_cmd.format(corpus=corpus_path, eval=eval_path, out=preds_path, seed=args.seed)
        proc = subprocess.run(cmd, shell=True)
        if proc.returncode != 0:
            return {"cell": cell_dir.name, "status": "model_cmd_failed", "rc": proc.returncode}
        parse_rc = cmd_parse(
            argparse.Namespace(
                pred=str(preds_path), gold=str(test_path), vocab=None,
                out=str(cell_dir / "parsed.jsonl"), argv=args.argv,
            )
        )
        if parse_rc != 0:
            return {"cell": cell_dir.name, "status": "parse_failed"}
        score_paths = []
        for task in tasks:
            score_path = cell_dir / f"score.{task.name.lower()}.json"
            rc = cmd_eval(
                argparse.Namespace(
                    task=task.name, gold=str(test_path), pred=str(cell_dir / "parsed.jsonl"),
                    casefold=False, format=None, run=f"seed{args.seed}", k=args.k, out=str(score_path),
                    argv=args.argv,
                )
            )
            if rc != 0:
                return {"cell": cell_dir.name, "status": "eval_failed"}
            score_paths.append(str(score_path))
        result["status"] = "scored"
        result["scores"] = score_paths

    manifest = build_manifest(
        args.argv, {"seed": args.seed, "sample_seed": args.sample_seed},
        [train_path, test_path], [corpus_path, eval_path],
        details={"k": args.k, "mode": args.mode, "status": result["status"]},
    )
    write_manifest(manifest, cell_dir)
    return result


def cmd_pipeline(args) -> int:
    ks = [int(x) for x in str(args.k).split(",") if x]
    seeds_raw = str(args.seeds)
    if "," in seeds_raw:
        seeds = [int(x) for x in seeds_raw.split(",") if x]
    else:
        seeds = [args.seed + i for i in range(int(seeds_raw))]
    modes = [m.strip() for m in args.mode.split(",") if m.strip()]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    cells = []
    for k in ks:
        for seed in seeds:
            for mode in modes:
                cell_dir = out_dir / f"k{k}_seed{seed}_{mode}"
                cells.append(
                    dict(
                        data=args.data, cell_dir=str(cell_dir), k=k, by=args.by, seed=seed,
                        sample_seed=args.sample_seed, mode=mode, tasks=args.tasks,
                        model_cmd=args.model_cmd, argv=_argv_of(args),
                    )
                )
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_pipeline_cell, cells))
    else:
        results = [_pipeline_cell(c) for c in cells]

    all_scores = [p for r in results for p in r.get("scores", [])]
    if all_scores:
        reports = [report_from_json(json.loads(Path(p).read_text(encoding="utf-8"))) for p in all_scores]
        (out_dir / "report.md").write_text(render_report(reports, layout="markdown"), encoding="utf-8")
    (out_dir / "grid.json").write_text(json.dumps(results, indent=2) + "\n", encoding="utf-8")
    failed = [r for r in results if r["status"].endswith("failed")]
    for r in failed:
        _err(f"cell {r['cell']}: {r['status']}")
    return 1 if failed else 0


# --- argument parsing --------------------------------------------------------


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="absa-forge", description=__doc__, epilog=_EPILOG)
    parser.add_argument("--version", action="version", version=f"absa-forge {__version__}")
    parser.add_argument("--config", default=None, help="JSON file with per-subcommand flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("import", help="convert upstream corpus files to canonical datasets")
    p.add_argument("--format", required=True, choices=["quad", "aste", "canonical"])
    p.add_argument("--train")
    p.add_argument("--dev")
    p.add_argument("--test")
    p.add_argument("--name", default=None, help="dataset name (default: input file stem)")
    p.add_argument("--lenient", action="store_true", help="skip malformed lines instead of failing")
    p.add_argument("--out", required=True, help="output directory for <split>.jsonl files")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("inspect", help="print dataset statistics")
    p.add_argument("--data", nargs="+", required=True, help="canonical dataset files")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("fewshot", help="sample a seeded stratified few-shot subset")
    p.add_argument("--data", required=True, help="directory holding <split>.jsonl canonical files")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--by", choices=["category", "sentiment"], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--split", default="train,dev", help="comma list; the test split is never subsampled")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fewshot)

    p = sub.add_parser("emit", help="emit a training or eval corpus")
    p.add_argument("--data", required=True, help="canonical dataset file")
    p.add_argument("--mode", choices=["text", "it", "it-mtl"], required=True)
    p.add_argument("--tasks", default="applicable", help="'all', 'applicable', or comma list (AE,AESC,...)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stage", choices=["train", "eval"], default="train")
    p.add_argument("--eval-template", default="0", help="fixed template index for eval emission, or 'random'")
    p.add_argument("--template-file", default=None, help="JSON template registry override")
    p.add_argument("--per-epoch", type=int, default=0, help="emit N per-epoch files with derived seeds")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("parse", help="decode a predictions file into tuples")
    p.add_argument("--pred", required=True, help="line-delimited {id, task, generated}")
    p.add_argument("--gold", default=None, help="canonical dataset supplying the category vocabulary")
    p.add_argument("--vocab", default=None, help="plain-text category vocabulary, one surface per line")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", help="score parsed tuples against gold")
    p.add_argument("--task", required=True)
    p.add_argument("--gold", required=True, help="canonical dataset file")
    p.add_argument("--pred", required=True, help="parsed-tuples file from 'parse'")
    p.add_argument("--casefold", action="store_true", help="case-insensitive tuple comparison")
    p.add_argument("--format", choices=["json", "markdown"], default=None)
    p.add_argument("--run", default=None, help="run label for report tables")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out", default=None, help="write the full score report JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="combine score reports into one table")
    p.add_argument("--scores", nargs="+", required=True)
    p.add_argument("--format", choices=["json", "markdown"], default="markdown")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("pipeline", help="run the fewshot/emit/(model)/parse/eval grid")
    p.add_argument("--data", required=True, help="directory with canonical train/dev/test.jsonl")
    p.add_argument("--k", required=True, help="comma list of k values, e.g. 5,10,20,50")
    p.add_argument("--seeds", default="1", help="count (seeds seed..seed+N-1) or comma list")
    p.add_argument("--seed", type=int, default=0, help="base run seed when --seeds is a count")
    p.add_argument("--sample-seed", type=int, default=42, help="few-shot sampling seed (held fixed)")
    p.add_argument("--mode", default="it-mtl", help="comma list out of text,it,it-mtl")
    p.add_argument("--tasks", default="applicable")
    p.add_argument("--by", choices=["category", "sentiment"], default="category")
    p.add_argument("--model-cmd", default=None,
                   help="shell template run per cell with {corpus} {eval} {out} {seed} placeholders")
    p.add_argument("--jobs", type=int, default=1, help="parallel cell processes")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pipeline)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Seed subcommand defaults from --config before the real parse."""
    if "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return
    config = json.loads(Path(argv[idx + 1]).read_text(encoding="utf-8"))
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    if not sub_actions:
        return
    for name, subparser in sub_actions[0].choices.items():
        section = config.get(name)
        if isinstance(section, dict):
            dests = {k.replace("-", "_"): v for k, v in section.items()}
            subparser.set_defaults(**dests)
            for action in subparser._actions:
                if action.dest in dests:
                    action.required = False


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_arg_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, json.JSONDecodeError) as err:
        _err(f"bad --config file: {err}")
        return 2
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except IngestError as err:
        for issue in err.issues:
            print(f"line {issue.line_no}: {issue.message}", file=sys.stderr)
        _err(str(err))
        return 1
    except ForgeError as err:
        _err(str(err))
        return 1
    except FileNotFoundError as err:
        _err(str(err))
        return 1


if __name__ == "__main__":
    sys.exit(main())
