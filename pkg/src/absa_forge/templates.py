"""Instruction-prompt rendering and templated target serialization.

The forward transformation: an input instruction is one of a small inventory
of natural-language question patterns per task with a ``$TEXT`` placeholder,
and the target is a per-quad clause rendering joined by the literal separator
token ``[SSEP]``.  Sentiment polarities serialize through a small bijective
lexicon (positive/negative/neutral -> great/bad/ok) so targets stay natural
language.  The reverse transformation lives in :mod:`absa_forge.parser`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .core import (
    AC,
    OT,
    Example,
    IndexOutOfRange,
    MissingElement,
    SentimentPolarity,
    Task,
    task_by_name,
)

PLACEHOLDER = "$TEXT"

# Separator between per-quad clauses, single flanking spaces, bit-exact.
SSEP = "[SSEP]"
SSEP_JOINER = " [SSEP] "

# Built-in instruction inventory. Sizes are AE:2, AESC:2, TASD:4, ASTE:4, ASQP:8.
DEFAULT_PROMPTS: dict[str, tuple[str, ...]] = {
    "AE": (
        "Given the text: $TEXT, what are the aspect terms in it ?",
        "What are the aspect terms in the text: $TEXT ?",
    ),
    "AESC": (
        "Given the text: $TEXT, what are the aspect terms and their sentiments ?",
        "What are the aspect terms and their sentiments in the text: $TEXT ?",
    ),
    "TASD": (
        "Given the text: $TEXT, what are the aspect terms, sentiments and categories ?",
        "What are the aspect terms, sentiments and categories in the text: $TEXT ?",
        "Given the text: $TEXT, what are the aspect terms, categories and sentiments ?",
        "What are the aspect terms, categories and sentiments in the text: $TEXT ?",
    ),
    "ASTE": (
        "Given the text: $TEXT, what are the aspect terms, opinion terms and sentiments ?",
        "What are the aspect terms, opinion terms and sentiments in the text: $TEXT ?",
        "Given the text: $TEXT, what are the opinion terms, aspect terms and sentiments ?",
        "What are the opinion terms, aspect terms and sentiments in the text: $TEXT ?",
    ),
    "ASQP": (
        "Given the text: $TEXT, what are the aspect terms, opinion terms, sentiments and categories ?",
        "What are the aspect terms, opinion terms, sentiments and categories in the text: $TEXT ?",
        "Given the text: $TEXT, what are the aspect terms, opinion terms, categories and sentiments ?",
        "What are the aspect terms, opinion terms, categories and sentiments in the text: $TEXT ?",
        "Given the text: $TEXT, what are the opinion terms, aspect terms, sentiments and categories ?",
        "What are the opinion terms, aspect terms, sentiments and categories in the text: $TEXT ?",
        "Given the text: $TEXT, what are the opinion terms, aspect terms, categories and sentiments ?",
        "What are the opinion terms, aspect terms, categories and sentiments in the text: $TEXT ?",
    ),
}


class TemplateRegistry:
    """Ordered prompt patterns per task, overridable from a JSON file.

    Every pattern must contain the ``$TEXT`` placeholder exactly once.
    Overriding the registry changes inventory sizes; everything downstream
    (sampling, emission) recomputes from the registry it is handed.
    """

    def __init__(self, prompts: dict[str, tuple[str, ...]]):
        validated: dict[str, tuple[str, ...]] = {}
        for name, patterns in prompts.items():
            task = task_by_name(name)
            if not patterns:
                raise ValueError(f"no prompt patterns for task {task.name}")
            for p in patterns:
                if p.count(PLACEHOLDER) != 1:
                    raise ValueError(
                        f"pattern must contain {PLACEHOLDER} exactly once: {p!r}"
                    )
            validated[task.name] = tuple(patterns)
        self._prompts = validated

    def inventory_size(self, task: Task) -> int:
        return len(self.patterns(task))

    def patterns(self, task: Task) -> tuple[str, ...]:
        try:
            return self._prompts[task.name]
        except KeyError:
            raise ValueError(f"registry has no patterns for task {task.name}") from None

    def to_json(self) -> str:
        return json.dumps({k: list(v) for k, v in self._prompts.items()}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "TemplateRegistry":
        data = json.loads(text)
        return cls({k: tuple(v) for k, v in data.items()})

    @classmethod
    def from_file(cls, path: str | Path) -> "TemplateRegistry":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


DEFAULT_REGISTRY = TemplateRegistry(DEFAULT_PROMPTS)


def _default_forward() -> dict[SentimentPolarity, str]:
    return {
        SentimentPolarity.POSITIVE: "great",
        SentimentPolarity.NEGATIVE: "bad",
        SentimentPolarity.NEUTRAL: "ok",
    }


@dataclass(frozen=True)
class SentimentLexicon:
    """Bijection between polarities and the words they serialize to."""

    forward: dict[SentimentPolarity, str] = field(default_factory=_default_forward)

    def __post_init__(self) -> None:
        if set(self.forward) != set(SentimentPolarity):
            raise ValueError("lexicon must map every polarity")
        if len(set(self.forward.values())) != len(self.forward):
            raise ValueError("lexicon words must be distinct")

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(self.forward.values())

    def word(self, polarity: SentimentPolarity) -> str:
        return self.forward[polarity]

    def polarity(self, word: str) -> SentimentPolarity:
        for p, w in self.forward.items():
            if w == word:
                return p
        raise KeyError(word)


DEFAULT_LEXICON = SentimentLexicon()


def render_input(
    text: str,
    task: Task,
    template_index: int,
    registry: TemplateRegistry = DEFAULT_REGISTRY,
) -> str:
    """Substitute ``$TEXT`` into the chosen pattern; no other rewriting."""
    patterns = registry.patterns(task)
    if not 0 <= template_index < len(patterns):
        raise IndexOutOfRange(
            f"template index {template_index} out of range for {task.name} "
            f"(inventory size {len(patterns)})"
        )
    return patterns[template_index].replace(PLACEHOLDER, text)


def render_clause(quad, task: Task, lexicon: SentimentLexicon = DEFAULT_LEXICON) -> str:
    """Render one quad as this task's clause. The implicit aspect reads "it"."""
    at = "it" if quad.aspect.is_implicit else quad.aspect.text
    if task.name == "AE":
        return at
    sw = lexicon.word(quad.sentiment)
    if task.name == "AESC":
        return f"{at} is {sw}"
    if AC in task.mask and quad.category is None:
        raise MissingElement(f"task {task.name} requires a category")
    if OT in task.mask and quad.opinion is None:
        raise MissingElement(f"task {task.name} requires an opinion term")
    if task.name == "TASD":
        return f"{at} is {sw} means {quad.category.surface} is {sw}"
    if task.name == "ASTE":
        return f"{at} is {quad.opinion} means it is {sw}"
    if task.name == "ASQP":
        return f"{at} is {quad.opinion} means {quad.category.surface} is {sw}"
    raise ValueError(f"no clause template for task {task.name}")


def render_target(
    example: Example,
    task: Task,
    lexicon: SentimentLexicon = DEFAULT_LEXICON,
) -> str:
    """Per-quad clauses in annotation order, joined by the separator token.

    The target does not depend on which input template was sampled.
    """
    return SSEP_JOINER.join(render_clause(q, task, lexicon) for q in example.quads)


def sample_template(task: Task, rng, registry: TemplateRegistry = DEFAULT_REGISTRY) -> int:
    """Draw a template index uniformly from the task's inventory.

    ``rng`` is any caller-seeded source exposing ``randrange(n)``.
    """
    return rng.randrange(registry.inventory_size(task))
