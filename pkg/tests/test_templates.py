import random

import pytest

from absa_forge import (
    AE,
    AESC,
    ASQP,
    ASTE,
    TASD,
    TASKS,
    AspectTerm,
    CategoryLabel,
    Example,
    Quad,
    SentimentPolarity,
    SentimentLexicon,
    TemplateRegistry,
    render_input,
    render_target,
    sample_template,
)
from absa_forge.core import IndexOutOfRange, MissingElement
from absa_forge._rng import Rng
from absa_forge.templates import DEFAULT_LEXICON, DEFAULT_REGISTRY, SSEP_JOINER

BURGER = Example(
    id="t:1",
    text="I loved the burger",
    quads=(
        Quad(AspectTerm.explicit("burger"), CategoryLabel.from_surface("food"), "loved", SentimentPolarity.POSITIVE),
    ),
)


def test_inventory_sizes():
    sizes = {name: DEFAULT_REGISTRY.inventory_size(t) for name, t in TASKS.items()}
    assert sizes == {"AE": 2, "AESC": 2, "TASD": 4, "ASTE": 4, "ASQP": 8}


def test_render_input_first_ae_prompt():
    assert (
        render_input("I loved the burger", AE, 0)
        == "Given the text: I loved the burger, what are the aspect terms in it ?"
    )


def test_render_input_second_asqp_prompt():
    assert (
        render_input("I loved the burger", ASQP, 1)
        == "What are the aspect terms, opinion terms, sentiments and categories in the text: I loved the burger ?"
    )


def test_render_input_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        render_input("x", AE, 7)


def test_every_prompt_mentions_exactly_its_masked_elements():
    phrases = {"aspect terms": "AT", "opinion terms": "OT", "sentiment": "S", "categor": "AC"}
    masks = {name: {e.value for e in t.mask} for name, t in TASKS.items()}
    for name, task in TASKS.items():
        for pattern in DEFAULT_REGISTRY.patterns(task):
            present = {code for phrase, code in phrases.items() if phrase in pattern}
            assert present == masks[name], (name, pattern)


def test_lexicon_is_a_bijection_and_roundtrips():
    lex = DEFAULT_LEXICON
    assert [lex.word(p) for p in SentimentPolarity] == ["great", "bad", "ok"]
    for p in SentimentPolarity:
        assert lex.polarity(lex.word(p)) is p
    with pytest.raises(ValueError):
        SentimentLexicon(forward={SentimentPolarity.POSITIVE: "great"})
    with pytest.raises(ValueError):
        SentimentLexicon(
            forward={
                SentimentPolarity.POSITIVE: "same",
                SentimentPolarity.NEGATIVE: "same",
                SentimentPolarity.NEUTRAL: "ok",
            }
        )


def test_render_target_literal_vectors():
    expected = {
        "AE": "burger",
        "AESC": "burger is great",
        "TASD": "burger is great means food is great",
        "ASTE": "burger is loved means it is great",
        "ASQP": "burger is loved means food is great",
    }
    for name, want in expected.items():
        assert render_target(BURGER, TASKS[name]) == want


def test_render_target_joins_multiple_quads_in_order():
    two = Example(
        id="t:2",
        text="burgers and fries",
        quads=(
            Quad(AspectTerm.explicit("burger"), None, "loved", SentimentPolarity.POSITIVE),
            Quad(AspectTerm.explicit("fries"), None, "soggy", SentimentPolarity.NEGATIVE),
        ),
    )
    assert render_target(two, AESC) == "burger is great [SSEP] fries is bad"
    # round-trip oracle for the joined form
    from absa_forge import parse_prediction, project

    outcome = parse_prediction(render_target(two, AESC), AESC)
    assert outcome.tuples == {project(q, AESC) for q in two.quads}
    assert not outcome.malformed


def test_implicit_aspect_renders_as_it():
    ex = Example(
        id="t:3",
        text="Great spot.",
        quads=(Quad(AspectTerm.implicit(), CategoryLabel.from_surface("restaurant general"), "Great", SentimentPolarity.POSITIVE),),
    )
    assert render_target(ex, TASD) == "it is great means restaurant general is great"
    assert render_target(ex, AE) == "it"


def test_render_target_missing_elements():
    no_cat = Example(
        id="t:4", text="x", quads=(Quad(AspectTerm.explicit("a"), None, "o", SentimentPolarity.NEUTRAL),)
    )
    with pytest.raises(MissingElement):
        render_target(no_cat, TASD)
    no_op = Example(
        id="t:5",
        text="x",
        quads=(Quad(AspectTerm.explicit("a"), CategoryLabel.from_surface("food"), None, SentimentPolarity.NEUTRAL),),
    )
    with pytest.raises(MissingElement):
        render_target(no_op, ASQP)


def test_sentiment_word_occurrences_per_clause():
    counts = {"AE": 0, "AESC": 1, "TASD": 2, "ASTE": 1, "ASQP": 1}
    for name, n in counts.items():
        target = render_target(BURGER, TASKS[name])
        assert target.count("great") == n, (name, target)


def test_target_is_independent_of_template_choice():
    # one target per (example, task), whatever input variant gets sampled
    for task in TASKS.values():
        inputs = {render_input(BURGER.text, task, i) for i in range(DEFAULT_REGISTRY.inventory_size(task))}
        assert len(inputs) == DEFAULT_REGISTRY.inventory_size(task)
        targets = {render_target(BURGER, task) for _ in inputs}
        assert len(targets) == 1


def test_ssep_appears_only_as_joiner():
    ex = Example(
        id="t:6",
        text="a b",
        quads=tuple(
            Quad(AspectTerm.explicit(f"t{i}"), CategoryLabel.from_surface("food"), f"o{i}", SentimentPolarity.NEUTRAL)
            for i in range(3)
        ),
    )
    target = render_target(ex, ASQP)
    assert target.count("[SSEP]") == 2
    assert target.count(SSEP_JOINER) == 2


def test_sample_template_deterministic_and_in_range():
    a = [sample_template(ASQP, Rng(7)) for _ in range(5)]
    b = [sample_template(ASQP, Rng(7)) for _ in range(5)]
    assert a == b
    rng = Rng(0)
    draws = [sample_template(ASQP, rng) for _ in range(100)]
    assert set(draws) <= set(range(8))
    assert sample_template(AE, Rng(0)) in (0, 1)


def test_sample_template_accepts_stdlib_random_too():
    rng = random.Random(3)
    assert 0 <= sample_template(TASD, rng) < 4


def test_registry_override_changes_inventory():
    reg = TemplateRegistry.from_json('{"AE": ["Find aspects in $TEXT now", "List the aspect terms of $TEXT", "Aspects of $TEXT ?"]}')
    assert reg.inventory_size(AE) == 3
    assert render_input("hi", AE, 2, registry=reg) == "Aspects of hi ?"
    rng = Rng(1)
    assert all(sample_template(AE, rng, registry=reg) in (0, 1, 2) for _ in range(20))


def test_registry_rejects_bad_patterns():
    with pytest.raises(ValueError):
        TemplateRegistry({"AE": ("no placeholder here",)})
    with pytest.raises(ValueError):
        TemplateRegistry({"AE": ("$TEXT and $TEXT twice",)})
    with pytest.raises(ValueError):
        TemplateRegistry({"NOPE": ("$TEXT",)})


def test_registry_export_import_roundtrip(tmp_path):
    path = tmp_path / "registry.json"
    path.write_text(DEFAULT_REGISTRY.to_json(), encoding="utf-8")
    loaded = TemplateRegistry.from_file(path)
    for task in TASKS.values():
        assert loaded.patterns(task) == DEFAULT_REGISTRY.patterns(task)
