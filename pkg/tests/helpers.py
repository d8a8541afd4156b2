"""Shared generators for randomized tests.

Terms produced by `safe_term` avoid every token the clause grammar anchors
on ("is", "means", "it", the sentiment words, and the category surfaces), so
render->parse round-trips on generated data are expected to be exact.
"""

from __future__ import annotations

import random
import string

from absa_forge import (
    AspectTerm,
    Capabilities,
    CategoryLabel,
    Dataset,
    Example,
    Quad,
    SentimentPolarity,
)

RESERVED_TOKENS = {"is", "means", "it", "great", "bad", "ok"}

CATEGORY_SURFACES = (
    "food quality",
    "service general",
    "ambience general",
    "drinks prices",
    "restaurant general",
    "location general",
)

_CATEGORY_WORDS = {w for surface in CATEGORY_SURFACES for w in surface.split()}


def safe_word(rng: random.Random) -> str:
    while True:
        w = "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(3, 8)))
        if w not in RESERVED_TOKENS and w not in _CATEGORY_WORDS:
            return w


def safe_term(rng: random.Random, max_words: int = 3) -> str:
    return " ".join(safe_word(rng) for _ in range(rng.randint(1, max_words)))


def random_quad(rng: random.Random, implicit_ok: bool = True) -> Quad:
    if implicit_ok and rng.random() < 0.15:
        aspect = AspectTerm.implicit()
    else:
        aspect = AspectTerm.explicit(safe_term(rng))
    return Quad(
        aspect=aspect,
        category=CategoryLabel.from_surface(rng.choice(CATEGORY_SURFACES)),
        opinion=safe_term(rng),
        sentiment=rng.choice(list(SentimentPolarity)),
    )


def random_example(rng: random.Random, ex_id: str, max_quads: int = 4) -> Example:
    quads = tuple(random_quad(rng) for _ in range(rng.randint(1, max_quads)))
    return Example(id=ex_id, text=safe_term(rng, max_words=6), quads=quads)


def random_quad_dataset(rng: random.Random, n: int, name: str = "synth", split: str = "train") -> Dataset:
    examples = [random_example(rng, f"{split}:{i + 1}") for i in range(n)]
    return Dataset.build(name, split, examples, Capabilities(has_category=True, has_opinion=True))


def random_aste_dataset(rng: random.Random, n: int, name: str = "synth", split: str = "train") -> Dataset:
    examples = []
    for i in range(n):
        quads = tuple(
            Quad(
                aspect=AspectTerm.explicit(safe_term(rng)),
                category=None,
                opinion=safe_term(rng),
                sentiment=rng.choice(list(SentimentPolarity)),
            )
            for _ in range(rng.randint(1, 3))
        )
        examples.append(Example(id=f"{split}:{i + 1}", text=safe_term(rng, 6), quads=quads))
    return Dataset.build(name, split, examples, Capabilities(has_category=False, has_opinion=True))
