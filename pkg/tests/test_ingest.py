import pytest

from absa_forge import AspectTerm, Capabilities, Dataset, load_dataset, write_canonical
from absa_forge.core import IndexOutOfRange, SentimentPolarity
from absa_forge.ingest import IngestError, MalformedLine, parse_aste_line, parse_quad_line

QUAD_FIXTURE = """\
I loved the burger####[['burger', 'food quality', 'positive', 'loved']]
Great spot.####[['NULL', 'restaurant general', 'positive', 'Great']]
The  fries were  soggy####[['fries', 'FOOD#QUALITY', 'negative', 'soggy'], ['fries', 'FOOD#STYLE_OPTIONS', 'negative', 'NULL']]
"""

ASTE_FIXTURE = """\
The screen is bright####[([1], [3], 'POS')]
Bad keyboard####[([1], [0], 'NEG')]
"""


def test_parse_quad_line_literal_example():
    ex = parse_quad_line("I loved the burger####[['burger', 'food quality', 'positive', 'loved']]", 1)
    assert ex.text == "I loved the burger"
    assert len(ex.quads) == 1
    q = ex.quads[0]
    assert q.aspect.text == "burger"
    assert q.category.surface == "food quality"
    assert q.sentiment is SentimentPolarity.POSITIVE
    assert q.opinion == "loved"
    assert ex.id == "train:1"


def test_parse_quad_line_null_aspect_is_implicit():
    ex = parse_quad_line("Great spot.####[['NULL', 'restaurant general', 'positive', 'Great']]", 7, "dev")
    assert ex.quads[0].aspect.is_implicit
    assert ex.id == "dev:7"


def test_parse_quad_line_null_opinion_is_absent():
    ex = parse_quad_line("ok####[['x', 'food quality', 'neutral', 'NULL']]", 1)
    assert ex.quads[0].opinion is None


def test_parse_quad_line_collapses_whitespace():
    ex = parse_quad_line("The  fries were  soggy####[['fries   here', 'food quality', 'negative', 'so  bad']]", 1)
    assert ex.text == "The fries were soggy"
    assert ex.quads[0].aspect.text == "fries here"
    assert ex.quads[0].opinion == "so bad"


def test_parse_quad_line_escaped_quote_and_double_quotes():
    ex = parse_quad_line("""x####[['don\\'t', 'food quality', 'negative', "isn't"]]""", 1)
    assert ex.quads[0].aspect.text == "don't"
    assert ex.quads[0].opinion == "isn't"


@pytest.mark.parametrize(
    "line",
    [
        "no separator here",
        "x####[['a', 'b', 'positive']]",  # wrong arity
        "x####[['a', 'b', 'meh', 'c']]",  # unknown sentiment
        "x####[['a', 'b', 'positive', 'c'",  # unbalanced brackets
        "x####[['a', 'b', 'positive', 'c']] trailing",
        "####[['a', 'b', 'positive', 'c']]",  # empty sentence
        "has [SSEP] inside####[['a', 'b', 'positive', 'c']]",
    ],
)
def test_parse_quad_line_malformed(line):
    with pytest.raises(MalformedLine) as exc:
        parse_quad_line(line, 12)
    assert exc.value.line_no == 12


def test_parse_aste_line_hand_tokenized():
    # tokens: [The, screen, is, bright] -> aspect [1]=screen, opinion [3]=bright
    ex = parse_aste_line("The screen is bright####[([1], [3], 'POS')]", 1)
    q = ex.quads[0]
    assert q.aspect.text == "screen"
    assert q.opinion == "bright"
    assert q.sentiment is SentimentPolarity.POSITIVE
    assert q.category is None


def test_parse_aste_line_opinion_before_aspect():
    # tokens: [Bad, keyboard] -> aspect [1]=keyboard, opinion [0]=Bad
    ex = parse_aste_line("Bad keyboard####[([1], [0], 'NEG')]", 1)
    assert ex.quads[0].aspect.text == "keyboard"
    assert ex.quads[0].opinion == "Bad"
    assert ex.quads[0].sentiment is SentimentPolarity.NEGATIVE


def test_parse_aste_line_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        parse_aste_line("x####[([9], [0], 'POS')]", 1)


def test_parse_aste_line_multiword_span():
    ex = parse_aste_line("the hard disk drive died fast####[([1, 2, 3], [5], 'NEG')]", 1)
    assert ex.quads[0].aspect.text == "hard disk drive"
    assert ex.quads[0].opinion == "fast"


def test_parse_aste_line_non_contiguous_span_warns_and_joins():
    warnings = []
    ex = parse_aste_line("a b c d####[([0, 2], [3], 'NEU')]", 4, warnings=warnings)
    assert ex.quads[0].aspect.text == "a c"
    assert len(warnings) == 1 and warnings[0].severity == "warning"


@pytest.mark.parametrize(
    "line",
    [
        "a b####[([1, 0], [0], 'POS')]",  # not strictly increasing
        "a b####[([], [0], 'POS')]",  # empty span
        "a b####[([0], [1], 'GOOD')]",  # unknown label
        "a b####([0], [1], 'POS')",  # not a list
    ],
)
def test_parse_aste_line_malformed(line):
    with pytest.raises(MalformedLine):
        parse_aste_line(line, 3)


def test_load_quad_dataset_and_capabilities(tmp_path):
    src = tmp_path / "train.txt"
    src.write_text(QUAD_FIXTURE, encoding="utf-8")
    dataset, issues = load_dataset(src, "quad", split="train", name="rest-mini")
    assert issues == []
    assert dataset.capabilities == Capabilities(True, True)
    assert len(dataset.examples) == 3
    surfaces = {c.surface for c in dataset.category_vocab}
    assert surfaces == {"food quality", "restaurant general", "food style_options"}


def test_load_aste_dataset_capabilities(tmp_path):
    src = tmp_path / "train.txt"
    src.write_text(ASTE_FIXTURE, encoding="utf-8")
    dataset, _ = load_dataset(src, "aste", split="train")
    assert dataset.capabilities == Capabilities(False, True)
    assert dataset.category_vocab == frozenset()


def test_strict_load_fails_and_lists_offenders(tmp_path):
    src = tmp_path / "train.txt"
    src.write_text("good####[['a', 'c', 'positive', 'o']]\nbad line\n", encoding="utf-8")
    with pytest.raises(IngestError) as exc:
        load_dataset(src, "quad", split="train")
    assert exc.value.issues[0].line_no == 2


def test_lenient_load_skips_and_counts(tmp_path):
    src = tmp_path / "train.txt"
    src.write_text("good####[['a', 'c', 'positive', 'o']]\nbad line\n", encoding="utf-8")
    dataset, issues = load_dataset(src, "quad", split="train", lenient=True)
    assert len(dataset.examples) == 1
    assert [i.severity for i in issues] == ["error"]


def test_issues_are_deterministic(tmp_path):
    src = tmp_path / "train.txt"
    src.write_text("bad\nx####[['a','c','positive','o']]\nworse####[[]]\n", encoding="utf-8")
    runs = [load_dataset(src, "quad", split="train", lenient=True)[1] for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


def test_canonical_roundtrip_is_identity(tmp_path):
    src = tmp_path / "train.txt"
    src.write_text(QUAD_FIXTURE, encoding="utf-8")
    dataset, _ = load_dataset(src, "quad", split="train", name="rest-mini")
    out = tmp_path / "train.jsonl"
    write_canonical(dataset, out)
    loaded, issues = load_dataset(out, "canonical")
    assert issues == []
    assert loaded == dataset
    # a second write is byte-identical
    out2 = tmp_path / "again.jsonl"
    write_canonical(loaded, out2)
    assert out.read_text(encoding="utf-8") == out2.read_text(encoding="utf-8")


def test_canonical_roundtrip_aste(tmp_path):
    src = tmp_path / "train.txt"
    src.write_text(ASTE_FIXTURE, encoding="utf-8")
    dataset, _ = load_dataset(src, "aste", split="train")
    out = tmp_path / "c.jsonl"
    write_canonical(dataset, out)
    loaded, _ = load_dataset(out, "canonical")
    assert loaded == dataset


def test_canonical_rejects_wrong_schema(tmp_path):
    from absa_forge.core import SchemaError

    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"schema": "absa-forge/dataset/v99", "name": "x", "split": "train", "has_category": true, "has_opinion": true}\n')
    with pytest.raises(SchemaError):
        load_dataset(bad, "canonical")


def test_duplicate_ids_rejected():
    from absa_forge import Example

    ex = Example(id="train:1", text="a", quads=())
    with pytest.raises(ValueError):
        Dataset.build("d", "train", [ex, ex], Capabilities(False, False))


def test_quad_dataset_quads_have_category_and_sentiment(tmp_path):
    src = tmp_path / "train.txt"
    src.write_text(QUAD_FIXTURE, encoding="utf-8")
    dataset, _ = load_dataset(src, "quad", split="train")
    for ex in dataset.examples:
        for q in ex.quads:
            assert q.category is not None
            assert q.sentiment is not None


def test_aspect_term_helpers():
    assert AspectTerm.implicit().is_implicit
    assert not AspectTerm.explicit("x").is_implicit
