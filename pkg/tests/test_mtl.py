import random
from collections import Counter

import pytest

import helpers
from absa_forge import (
    AESC,
    ASQP,
    TASKS,
    EmitConfig,
    emit_corpus,
    read_corpus,
    render_target,
    write_corpus,
)
from absa_forge.core import SchemaError
from absa_forge.mtl import InapplicableTask, corpus_header

ALL_TASKS = tuple(TASKS.values())


def quad_dataset(n=12, seed=0):
    return helpers.random_quad_dataset(random.Random(seed), n)


def aste_dataset(n=10, seed=1):
    return helpers.random_aste_dataset(random.Random(seed), n)


def test_itmtl_emits_exactly_tasks_times_examples():
    dataset = quad_dataset(n=12)
    records = emit_corpus(dataset, EmitConfig("it-mtl", ALL_TASKS, seed=7))
    assert len(records) == 5 * 12
    counts = Counter(r.task.name for r in records)
    assert counts == {name: 12 for name in TASKS}
    pairs = {(r.example_id, r.task.name) for r in records}
    assert len(pairs) == len(records)  # no drops, no duplicates


def test_laptop_style_dataset_gets_three_tasks():
    dataset = aste_dataset(n=10)
    tasks = tuple(t for t in ALL_TASKS if t.name in ("AE", "AESC", "ASTE"))
    records = emit_corpus(dataset, EmitConfig("it-mtl", tasks, seed=7))
    assert len(records) == 3 * 10
    assert Counter(r.task.name for r in records) == {"AE": 10, "AESC": 10, "ASTE": 10}


def test_inapplicable_task_is_refused():
    dataset = aste_dataset()
    with pytest.raises(InapplicableTask) as exc:
        emit_corpus(dataset, EmitConfig("it-mtl", ALL_TASKS, seed=0))
    assert "TASD" in str(exc.value) and "ASQP" in str(exc.value)


def test_text_mode_uses_raw_sentence():
    dataset = quad_dataset(n=5)
    records = emit_corpus(dataset, EmitConfig("text", (ASQP,), seed=3))
    by_id = {r.example_id: r for r in records}
    for ex in dataset.examples:
        r = by_id[ex.id]
        assert r.input == ex.text
        assert r.template_index == -1
        assert r.target == render_target(ex, ASQP)


def test_it_mode_renders_instruction_inputs():
    dataset = quad_dataset(n=5)
    records = emit_corpus(dataset, EmitConfig("it", (AESC,), seed=3))
    for r in records:
        assert "$TEXT" not in r.input
        assert r.input != ""
        assert 0 <= r.template_index < 2


def test_targets_identical_across_modes():
    dataset = quad_dataset(n=6)
    text = emit_corpus(dataset, EmitConfig("text", (ASQP,), seed=1))
    it = emit_corpus(dataset, EmitConfig("it", (ASQP,), seed=2))
    mtl = emit_corpus(dataset, EmitConfig("it-mtl", ALL_TASKS, seed=3))
    def targets(records):
        return {(r.example_id, r.task.name): r.target for r in records if r.task.name == "ASQP"}
    assert targets(text) == targets(it) == targets(mtl)


def test_emission_is_byte_identical(tmp_path):
    dataset = quad_dataset(n=8)
    config = EmitConfig("it-mtl", ALL_TASKS, seed=42)
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_corpus(emit_corpus(dataset, config), corpus_header(config, dataset), p1)
    write_corpus(emit_corpus(dataset, config), corpus_header(config, dataset), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_seed_changes_order_and_templates():
    dataset = quad_dataset(n=10)
    a = emit_corpus(dataset, EmitConfig("it-mtl", ALL_TASKS, seed=1))
    b = emit_corpus(dataset, EmitConfig("it-mtl", ALL_TASKS, seed=2))
    assert [r.example_id for r in a] != [r.example_id for r in b]


def test_train_stage_shuffles_eval_stage_preserves_order():
    dataset = quad_dataset(n=30)
    eval_records = emit_corpus(dataset, EmitConfig("it-mtl", ALL_TASKS, seed=5, stage="eval"))
    expected = [(ex.id, t.name) for ex in dataset.examples for t in ALL_TASKS]
    assert [(r.example_id, r.task.name) for r in eval_records] == expected
    train_records = emit_corpus(dataset, EmitConfig("it-mtl", ALL_TASKS, seed=5))
    assert [(r.example_id, r.task.name) for r in train_records] != expected


def test_eval_default_template_is_fixed_zero():
    dataset = quad_dataset(n=10)
    records = emit_corpus(dataset, EmitConfig("it-mtl", ALL_TASKS, seed=5, stage="eval"))
    assert {r.template_index for r in records} == {0}


def test_eval_random_template_policy():
    dataset = quad_dataset(n=30)
    records = emit_corpus(
        dataset,
        EmitConfig("it-mtl", ALL_TASKS, seed=5, stage="eval", eval_template_policy="random"),
    )
    asqp_indices = {r.template_index for r in records if r.task.name == "ASQP"}
    assert len(asqp_indices) > 1


def test_per_epoch_emission_varies_but_is_reproducible():
    dataset = quad_dataset(n=10)
    config = EmitConfig("it-mtl", ALL_TASKS, seed=9)
    epoch0 = emit_corpus(dataset, config, epoch=0)
    epoch1 = emit_corpus(dataset, config, epoch=1)
    assert epoch0 == emit_corpus(dataset, config, epoch=0)
    assert epoch1 == emit_corpus(dataset, config, epoch=1)
    assert [r.template_index for r in epoch0] != [r.template_index for r in epoch1] or [
        r.example_id for r in epoch0
    ] != [r.example_id for r in epoch1]


def test_corpus_file_roundtrip(tmp_path):
    dataset = quad_dataset(n=4)
    config = EmitConfig("it-mtl", ALL_TASKS, seed=0)
    records = emit_corpus(dataset, config)
    path = tmp_path / "corpus.jsonl"
    write_corpus(records, corpus_header(config, dataset), path)
    header, loaded = read_corpus(path)
    assert header["schema"] == "absa-forge/corpus/v1"
    assert header["tasks"] == [t.name for t in ALL_TASKS]
    assert loaded == records


def test_read_corpus_rejects_wrong_schema(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"schema": "absa-forge/corpus/v9"}\n', encoding="utf-8")
    with pytest.raises(SchemaError):
        read_corpus(path)


def test_config_validation():
    with pytest.raises(ValueError):
        EmitConfig("it-mtl", (ASQP,), seed=0)
    with pytest.raises(ValueError):
        EmitConfig("text", (ASQP, AESC), seed=0)
    with pytest.raises(ValueError):
        EmitConfig("banana", (ASQP,), seed=0)
    with pytest.raises(ValueError):
        EmitConfig("it", (ASQP,), seed=0, stage="predict")
    with pytest.raises(ValueError):
        EmitConfig("it", (ASQP,), seed=0, eval_template_policy="sometimes")
