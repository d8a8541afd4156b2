import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers
from absa_forge import (
    AE,
    AESC,
    ASQP,
    ASTE,
    TASD,
    TASKS,
    parse_prediction,
    parse_segment,
    project,
    render_target,
    split_ssep,
)
from absa_forge.parser import (
    EMPTY_TERM,
    MISSING_IS,
    MISSING_MEANS,
    NO_SENTIMENT_WORD,
    REASONS,
    SENTIMENT_MISMATCH,
    UNKNOWN_CATEGORY,
    ParseError,
    PredictionRecord,
    read_parsed,
    read_predictions,
    tuple_from_obj,
    tuple_to_obj,
    write_parsed,
    write_predictions,
)

VOCAB = frozenset(helpers.CATEGORY_SURFACES) | {"food"}


def test_split_ssep_basic():
    assert split_ssep("a [SSEP] b") == ["a", "b"]
    assert split_ssep("a[SSEP]b [SSEP] ") == ["a", "b"]
    assert split_ssep("no separator") == ["no separator"]
    assert split_ssep("") == []
    assert split_ssep(" [SSEP] [SSEP] ") == []


def test_parse_segment_inverts_each_clause_template():
    assert parse_segment("burger", AE) == ("burger",)
    assert parse_segment("burger is great", AESC) == ("burger", "positive")
    assert parse_segment("burger is great means food is great", TASD, VOCAB) == ("burger", "food", "positive")
    assert parse_segment("burger is loved means it is great", ASTE) == ("burger", "loved", "positive")
    assert parse_segment("burger is loved means food is great", ASQP, VOCAB) == (
        "burger",
        "food",
        "loved",
        "positive",
    )


def test_parse_segment_first_is_split_keeps_opinion_clause_whole():
    got = parse_segment("this is what it is means food is great", ASQP, VOCAB)
    assert got == ("this", "food", "what it is", "positive")


def test_parse_segment_it_aspect_decodes_implicit():
    assert parse_segment("it is bad", AESC) == (None, "negative")
    assert parse_segment("it", AE) == (None,)
    assert parse_segment("it is slow means service general is bad", ASQP, VOCAB) == (
        None,
        "service general",
        "slow",
        "negative",
    )


def test_parse_segment_longest_category_suffix_wins():
    vocab = {"food", "food quality"}
    got = parse_segment("a is b means food quality is ok", ASQP, vocab)
    assert got == ("a", "food quality", "b", "neutral")


@pytest.mark.parametrize(
    "segment,task,reason",
    [
        ("burger is amazing", AESC, NO_SENTIMENT_WORD),
        ("burger", AESC, NO_SENTIMENT_WORD),
        ("a is b means nonsense is great", ASQP, UNKNOWN_CATEGORY),
        ("a is b is great", ASQP, MISSING_MEANS),
        ("a is b means that is great", ASTE, MISSING_MEANS),
        ("a means food is great", ASQP, MISSING_IS),
        (" is great", AESC, EMPTY_TERM),
        ("a is  means it is great", ASTE, EMPTY_TERM),
        ("burger is bad means food is great", TASD, SENTIMENT_MISMATCH),
    ],
)
def test_parse_segment_error_reasons(segment, task, reason):
    with pytest.raises(ParseError) as exc:
        parse_segment(segment, task, VOCAB)
    assert exc.value.reason == reason
    assert exc.value.reason in REASONS


def test_parse_prediction_deduplicates():
    outcome = parse_prediction("burger [SSEP] burger", AE)
    assert outcome.tuples == {("burger",)}
    assert outcome.malformed == ()
    assert outcome.raw_segment_count == 2


def test_parse_prediction_empty_input():
    outcome = parse_prediction("", ASQP, VOCAB)
    assert outcome.tuples == frozenset()
    assert outcome.raw_segment_count == 0


def test_parse_prediction_collects_failures_as_data():
    outcome = parse_prediction("burger is great [SSEP] garbage segment", AESC)
    assert outcome.tuples == {("burger", "positive")}
    assert len(outcome.malformed) == 1
    assert outcome.malformed[0].reason == NO_SENTIMENT_WORD
    assert outcome.raw_segment_count == 2


def test_parse_prediction_counts_it_aspects():
    outcome = parse_prediction("it is bad [SSEP] screen is great", AESC)
    assert outcome.it_aspect_segments == 1


def make_roundtrip_case(seed):
    rng = random.Random(seed)
    ex = helpers.random_example(rng, "t:1")
    return ex


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=10**9), st.sampled_from(sorted(TASKS)))
def test_roundtrip_random_examples(seed, task_name):
    task = TASKS[task_name]
    ex = make_roundtrip_case(seed)
    target = render_target(ex, task)
    outcome = parse_prediction(target, task, helpers.CATEGORY_SURFACES)
    assert outcome.malformed == ()
    assert outcome.tuples == {project(q, task) for q in ex.quads}


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=0, max_value=10**9), st.sampled_from(sorted(TASKS)))
def test_duplicating_segments_never_changes_tuples(seed, task_name):
    task = TASKS[task_name]
    target = render_target(make_roundtrip_case(seed), task)
    once = parse_prediction(target, task, helpers.CATEGORY_SURFACES)
    twice = parse_prediction(f"{target} [SSEP] {target}", task, helpers.CATEGORY_SURFACES)
    assert once.tuples == twice.tuples


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=0, max_value=10**9), st.sampled_from(sorted(TASKS)))
def test_removing_a_segment_never_adds_tuples(seed, task_name):
    task = TASKS[task_name]
    target = render_target(make_roundtrip_case(seed), task)
    segments = split_ssep(target)
    full = parse_prediction(target, task, helpers.CATEGORY_SURFACES).tuples
    for drop in range(len(segments)):
        rest = " [SSEP] ".join(s for i, s in enumerate(segments) if i != drop)
        sub = parse_prediction(rest, task, helpers.CATEGORY_SURFACES).tuples
        assert sub <= full


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=200), st.sampled_from(sorted(TASKS)))
def test_parse_prediction_is_total(text, task_name):
    outcome = parse_prediction(text, TASKS[task_name], VOCAB)
    assert len(outcome.tuples) + len(outcome.malformed) <= outcome.raw_segment_count
    for seg in outcome.malformed:
        assert seg.reason in REASONS


def test_tuple_obj_roundtrip_all_tasks():
    values = {
        "AE": ("burger",),
        "AESC": ("burger", "positive"),
        "TASD": (None, "food", "neutral"),
        "ASTE": ("burger", "loved", "positive"),
        "ASQP": ("burger", "food", "loved", "positive"),
    }
    for name, t in values.items():
        task = TASKS[name]
        assert tuple_from_obj(tuple_to_obj(t, task), task) == t


def test_predictions_file_roundtrip(tmp_path):
    records = [
        PredictionRecord("t:1", AE, "burger [SSEP] fries"),
        PredictionRecord("t:2", ASQP, "a is b means food is great"),
    ]
    path = tmp_path / "preds.jsonl"
    write_predictions(records, path)
    loaded, warnings = read_predictions(path)
    assert warnings == []
    assert loaded == records


def test_predictions_without_header_warns(tmp_path):
    path = tmp_path / "preds.jsonl"
    path.write_text('{"id": "t:1", "task": "AE", "generated": "burger"}\n', encoding="utf-8")
    records, warnings = read_predictions(path)
    assert len(records) == 1
    assert len(warnings) == 1 and "schema" in warnings[0]


def test_parsed_file_roundtrip(tmp_path):
    outcome = parse_prediction("burger is loved means food is great [SSEP] junk", ASQP, VOCAB)
    path = tmp_path / "parsed.jsonl"
    write_parsed([("t:9", outcome)], path)
    loaded = read_parsed(path)
    assert len(loaded) == 1
    ex_id, got = loaded[0]
    assert ex_id == "t:9"
    assert got.tuples == outcome.tuples
    assert len(got.malformed) == len(outcome.malformed)
    assert got.raw_segment_count == outcome.raw_segment_count
