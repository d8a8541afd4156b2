"""Domain types shared by every other module.

Everything here is immutable after construction and free of I/O.  Whitespace
normalization happens exactly once, at ingestion; the constructors in this
module *reject* non-canonical strings instead of silently fixing them, so a
normalization bug cannot drift between the serializer and the evaluator.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class ForgeError(Exception):
    """Base class for all toolkit errors."""


class MissingElement(ForgeError):
    """A task requires an element the quad does not carry."""


class IndexOutOfRange(ForgeError):
    """An index pointed past the end of its inventory or token list."""


class SchemaError(ForgeError):
    """A line-delimited file did not match its declared schema."""


def normalize_ws(s: str) -> str:
    """Collapse internal whitespace to single spaces and trim."""
    return " ".join(s.split())


class SentimentPolarity(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"

    @classmethod
    def from_label(cls, label: str) -> "SentimentPolarity":
        for member in cls:
            if member.value == label:
                return member
        raise ValueError(f"unknown sentiment label: {label!r}")


class Element(enum.Enum):
    """The four prediction targets a task may cover."""

    ASPECT_TERM = "AT"
    ASPECT_CATEGORY = "AC"
    SENTIMENT = "S"
    OPINION_TERM = "OT"


AT = Element.ASPECT_TERM
AC = Element.ASPECT_CATEGORY
S = Element.SENTIMENT
OT = Element.OPINION_TERM


@dataclass(frozen=True)
class AspectTerm:
    """An aspect span, or the implicit aspect when the corpus annotated NULL.

    ``text`` is None exactly for the implicit case.
    """

    text: str | None

    def __post_init__(self) -> None:
        if self.text is not None:
            if not self.text or self.text != normalize_ws(self.text):
                raise ValueError(
                    f"explicit aspect text must be non-empty and whitespace-normalized: {self.text!r}"
                )

    @classmethod
    def explicit(cls, text: str) -> "AspectTerm":
        return cls(text=text)

    @classmethod
    def implicit(cls) -> "AspectTerm":
        return cls(text=None)

    @property
    def is_implicit(self) -> bool:
        return self.text is None


@dataclass(frozen=True)
class CategoryLabel:
    """A closed-vocabulary category like "food quality".

    ``surface`` is the space-joined natural-language form used in targets and
    in decoding; ``entity`` is its first word and ``attribute`` the rest (None
    for single-word categories).
    """

    entity: str
    attribute: str | None
    surface: str

    def __post_init__(self) -> None:
        expected = self.entity if self.attribute is None else f"{self.entity} {self.attribute}"
        if self.surface != expected:
            raise ValueError(f"surface {self.surface!r} does not match entity/attribute")
        if not self.entity or self.surface != self.surface.lower():
            raise ValueError(f"category must be non-empty lowercase: {self.surface!r}")
        if self.surface != normalize_ws(self.surface):
            raise ValueError(f"category surface not whitespace-normalized: {self.surface!r}")

    @classmethod
    def from_token(cls, token: str) -> "CategoryLabel":
        """Build from an upstream annotation token.

        Accepts both the ``ENTITY#ATTRIBUTE`` convention and an already
        natural-language form; ``#`` becomes a space, everything lowercased.
        """
        surface = normalize_ws(token.replace("#", " ").lower())
        return cls.from_surface(surface)

    @classmethod
    def from_surface(cls, surface: str) -> "CategoryLabel":
        surface = normalize_ws(surface)
        if not surface:
            raise ValueError("empty category")
        head, _, rest = surface.partition(" ")
        return cls(entity=head, attribute=rest or None, surface=surface)


@dataclass(frozen=True)
class Quad:
    """One annotation unit: aspect, optional category, optional opinion, sentiment."""

    aspect: AspectTerm
    category: CategoryLabel | None
    opinion: str | None
    sentiment: SentimentPolarity

    def __post_init__(self) -> None:
        if self.opinion is not None:
            if not self.opinion or self.opinion != normalize_ws(self.opinion):
                raise ValueError(
                    f"opinion term must be non-empty and whitespace-normalized: {self.opinion!r}"
                )


@dataclass(frozen=True)
class Example:
    """A review sentence plus its quads, in source-file annotation order."""

    id: str
    text: str
    quads: tuple[Quad, ...]

    def __post_init__(self) -> None:
        if not self.text or self.text != normalize_ws(self.text):
            raise ValueError(f"example text must be non-empty and whitespace-normalized: {self.text!r}")


@dataclass(frozen=True)
class Task:
    """One of the five factorized sub-tasks and the elements it predicts."""

    name: str
    mask: frozenset[Element]


AE = Task("AE", frozenset({AT}))
AESC = Task("AESC", frozenset({AT, S}))
TASD = Task("TASD", frozenset({AT, AC, S}))
ASTE = Task("ASTE", frozenset({AT, S, OT}))
ASQP = Task("ASQP", frozenset({AT, AC, S, OT}))

TASKS: dict[str, Task] = {t.name: t for t in (AE, AESC, TASD, ASTE, ASQP)}

# "ASE" appears as an alternate name for the extraction+sentiment task in some
# prompt listings; treat it as AESC everywhere.
_TASK_ALIASES = {"ASE": "AESC"}


def task_by_name(name: str) -> Task:
    key = name.strip().upper()
    key = _TASK_ALIASES.get(key, key)
    if key not in TASKS:
        raise ValueError(f"unknown task: {name!r} (expected one of {', '.join(TASKS)})")
    return TASKS[key]


@dataclass(frozen=True)
class Capabilities:
    """Which optional annotations a dataset carries."""

    has_category: bool
    has_opinion: bool


# A projected tuple holds, in this fixed order, the masked elements among:
# aspect text (None when implicit), category surface, opinion text, polarity value.
ProjectedTuple = tuple


def project(quad: Quad, task: Task) -> ProjectedTuple:
    """Project a quad onto a task's element mask.

    Element order within the tuple is aspect, category, opinion, sentiment.
    Raises MissingElement when the quad lacks a masked element.
    """
    parts: list[str | None] = []
    if AT in task.mask:
        parts.append(quad.aspect.text)
    if AC in task.mask:
        if quad.category is None:
            raise MissingElement(f"task {task.name} requires a category")
        parts.append(quad.category.surface)
    if OT in task.mask:
        if quad.opinion is None:
            raise MissingElement(f"task {task.name} requires an opinion term")
        parts.append(quad.opinion)
    if S in task.mask:
        parts.append(quad.sentiment.value)
    return tuple(parts)


def applicable_tasks(capabilities: Capabilities) -> list[Task]:
    """Tasks whose mask is satisfiable under the dataset's annotations."""
    out = []
    for task in TASKS.values():
        if AC in task.mask and not capabilities.has_category:
            continue
        if OT in task.mask and not capabilities.has_opinion:
            continue
        out.append(task)
    return out
