"""Decode generated text back into per-task tuples.

Generated output follows fixed clause templates, but the free-text terms
inside them may themselves contain template keywords ("is", "means", category
words).  Decoding is therefore anchored right-to-left on the closed
vocabularies: the sentiment word comes from the three-word lexicon, the
category from the dataset's category vocabulary, and the triplet pivot is the
literal word "it".  The only free split left is aspect-vs-opinion inside
``{AT} is {OT}``, which takes the first " is " occurrence; aspect terms that
contain " is " are the documented residual failure case.

``parse_prediction`` is total: any input string yields a ParseOutcome, with
per-segment failures carried as data, never exceptions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .core import (
    AC,
    AT,
    OT,
    S,
    CategoryLabel,
    ProjectedTuple,
    SchemaError,
    Task,
    task_by_name,
)
from .templates import DEFAULT_LEXICON, SSEP, SentimentLexicon

# Failure reason codes, the complete set.
NO_SENTIMENT_WORD = "no_sentiment_word"
UNKNOWN_CATEGORY = "unknown_category"
MISSING_MEANS = "missing_means"
MISSING_IS = "missing_is"
EMPTY_TERM = "empty_term"
SENTIMENT_MISMATCH = "sentiment_mismatch"

REASONS = frozenset(
    {NO_SENTIMENT_WORD, UNKNOWN_CATEGORY, MISSING_MEANS, MISSING_IS, EMPTY_TERM, SENTIMENT_MISMATCH}
)


class ParseError(Exception):
    """A single segment failed to match its task's clause grammar."""

    def __init__(self, reason: str, segment: str):
        assert reason in REASONS
        super().__init__(f"{reason}: {segment!r}")
        self.reason = reason
        self.segment = segment


@dataclass(frozen=True)
class MalformedSegment:
    segment: str
    reason: str


@dataclass(frozen=True)
class ParseOutcome:
    """Deduplicated tuples plus the segments that failed, for one generation."""

    task: Task
    tuples: frozenset[ProjectedTuple]
    malformed: tuple[MalformedSegment, ...]
    raw_segment_count: int
    # Segments whose aspect slot was the bare word "it": decoded as implicit,
    # indistinguishable from an explicit aspect literally equal to "it".
    it_aspect_segments: int = 0


def split_ssep(generated: str) -> list[str]:
    """Split on the exact separator token, strip segments, drop empties."""
    return [seg for seg in (s.strip() for s in generated.split(SSEP)) if seg]


def _vocab_surfaces(category_vocab) -> list[str]:
    surfaces = set()
    for item in category_vocab:
        surfaces.add(item.surface if isinstance(item, CategoryLabel) else str(item))
    # Longest first so nested surfaces ("food" vs "food quality") resolve right.
    return sorted(surfaces, key=len, reverse=True)


def _strip_sentiment_suffix(segment: str, lexicon: SentimentLexicon) -> tuple[str, str]:
    """Match the final ``... is <word>`` against the lexicon; return (head, word)."""
    for word in sorted(lexicon.words, key=len, reverse=True):
        suffix = f" is {word}"
        if segment.endswith(suffix):
            return segment[: -len(suffix)], word
    raise ParseError(NO_SENTIMENT_WORD, segment)


def _aspect(term: str, segment: str) -> str | None:
    if not term:
        raise ParseError(EMPTY_TERM, segment)
    return None if term == "it" else term


def parse_segment(
    segment: str,
    task: Task,
    category_vocab=(),
    lexicon: SentimentLexicon = DEFAULT_LEXICON,
) -> ProjectedTuple:
    """Parse one clause into the task's projected tuple, or raise ParseError."""
    if task.name == "AE":
        return (_aspect(segment, segment),)

    head, sentiment_word = _strip_sentiment_suffix(segment, lexicon)
    polarity = lexicon.polarity(sentiment_word).value

    if task.name == "AESC":
        return (_aspect(head, segment), polarity)

    if AC in task.mask:
        category = None
        for surface in _vocab_surfaces(category_vocab):
            marker = f" means {surface}"
            if head.endswith(marker):
                category = surface
                head = head[: -len(marker)]
                break
        if category is None:
            raise ParseError(
                UNKNOWN_CATEGORY if " means " in head else MISSING_MEANS, segment
            )
    else:  # ASTE pivots on the literal "it" instead of a category
        marker = " means it"
        if not head.endswith(marker):
            raise ParseError(MISSING_MEANS, segment)
        head = head[: -len(marker)]

    if task.name == "TASD":
        # Left clause repeats the sentiment word: "{AT} is {S}". Anchor on the
        # lexicon suffix again so aspect terms containing " is " still parse.
        for word in sorted(lexicon.words, key=len, reverse=True):
            suffix = f" is {word}"
            if head.endswith(suffix):
                if word != sentiment_word:
                    raise ParseError(SENTIMENT_MISMATCH, segment)
                return (_aspect(head[: -len(suffix)], segment), category, polarity)
        raise ParseError(MISSING_IS, segment)

    # ASTE / ASQP: remainder is "{AT} is {OT}", split at the FIRST " is ".
    at_part, sep, ot_part = head.partition(" is ")
    if not sep:
        raise ParseError(MISSING_IS, segment)
    if not ot_part:
        raise ParseError(EMPTY_TERM, segment)
    aspect = _aspect(at_part, segment)
    if task.name == "ASTE":
        return (aspect, ot_part, polarity)
    return (aspect, category, ot_part, polarity)


def parse_prediction(
    generated: str,
    task: Task,
    category_vocab=(),
    lexicon: SentimentLexicon = DEFAULT_LEXICON,
) -> ParseOutcome:
    """Split on the separator and parse every segment; never raises.

    Successes are deduplicated into a set; each failure keeps its segment and
    reason code.
    """
    segments = split_ssep(generated)
    tuples: set[ProjectedTuple] = set()
    malformed: list[MalformedSegment] = []
    it_count = 0
    for seg in segments:
        try:
            parsed = parse_segment(seg, task, category_vocab, lexicon)
        except ParseError as err:
            malformed.append(MalformedSegment(segment=seg, reason=err.reason))
            continue
        if parsed[0] is None:
            it_count += 1
        tuples.add(parsed)
    return ParseOutcome(
        task=task,
        tuples=frozenset(tuples),
        malformed=tuple(malformed),
        raw_segment_count=len(segments),
        it_aspect_segments=it_count,
    )


# --- wire formats for the parse subcommand ---------------------------------

PREDICTIONS_SCHEMA = "absa-forge/predictions/v1"
PARSED_SCHEMA = "absa-forge/parsed/v1"

_SLOT_ORDER = (AT, AC, OT, S)
_SLOT_KEYS = {AT: "aspect", AC: "category", OT: "opinion", S: "sentiment"}


def _task_slots(task: Task) -> list[str]:
    return [_SLOT_KEYS[e] for e in _SLOT_ORDER if e in task.mask]


def tuple_to_obj(t: ProjectedTuple, task: Task) -> dict:
    return dict(zip(_task_slots(task), t))


def tuple_from_obj(obj: dict, task: Task) -> ProjectedTuple:
    return tuple(obj[slot] for slot in _task_slots(task))


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    task: Task
    generated: str


def read_predictions(path: str | Path) -> tuple[list[PredictionRecord], list[str]]:
    """Read a line-delimited predictions file; returns (records, warnings).

    A schema header on line 1 is expected; a file without one is still read,
    with a warning, for interoperability with hand-made prediction dumps.
    """
    path = Path(path)
    lines = [l for l in path.read_text(encoding="utf-8").splitlines() if l.strip()]
    warnings: list[str] = []
    start = 0
    if lines:
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError:
            header = None
        if isinstance(header, dict) and "schema" in header:
            if header["schema"] != PREDICTIONS_SCHEMA:
                raise SchemaError(f"{path}: expected schema {PREDICTIONS_SCHEMA!r}, got {header['schema']!r}")
            start = 1
        else:
            warnings.append(f"{path}: missing schema header, assuming {PREDICTIONS_SCHEMA}")
    records = []
    for line_no, line in enumerate(lines[start:], start=start + 1):
        try:
            obj = json.loads(line)
            records.append(PredictionRecord(str(obj["id"]), task_by_name(obj["task"]), obj["generated"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
            raise SchemaError(f"{path}: line {line_no}: bad prediction record: {err}") from None
    return records, warnings


def write_predictions(records: list[PredictionRecord], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"schema": PREDICTIONS_SCHEMA}, ensure_ascii=False) + "\n")
        for r in records:
            fh.write(
                json.dumps(
                    {"id": r.id, "task": r.task.name, "generated": r.generated}, ensure_ascii=False
                )
                + "\n"
            )


def write_parsed(outcomes: list[tuple[str, ParseOutcome]], path: str | Path) -> None:
    """Write (example id, outcome) rows: id, task, tuples, malformed count."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"schema": PARSED_SCHEMA}, ensure_ascii=False) + "\n")
        for ex_id, outcome in outcomes:
            obj = {
                "id": ex_id,
                "task": outcome.task.name,
                "tuples": sorted(
                    (tuple_to_obj(t, outcome.task) for t in outcome.tuples),
                    key=lambda o: json.dumps(o, ensure_ascii=False, sort_keys=True),
                ),
                "malformed": len(outcome.malformed),
                "raw_segments": outcome.raw_segment_count,
                "it_aspect_segments": outcome.it_aspect_segments,
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def read_parsed(path: str | Path) -> list[tuple[str, ParseOutcome]]:
    path = Path(path)
    lines = [l for l in path.read_text(encoding="utf-8").splitlines() if l.strip()]
    if not lines:
        raise SchemaError(f"{path}: empty file, expected schema header")
    header = json.loads(lines[0]) if lines[0].lstrip().startswith("{") else {}
    if not isinstance(header, dict) or header.get("schema") != PARSED_SCHEMA:
        raise SchemaError(f"{path}: expected schema {PARSED_SCHEMA!r}")
    out = []
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
            task = task_by_name(obj["task"])
            tuples = frozenset(tuple_from_obj(o, task) for o in obj["tuples"])
            filler = tuple(
                MalformedSegment(segment="", reason="unrecorded") for _ in range(int(obj["malformed"]))
            )
            out.append(
                (
                    str(obj["id"]),
                    ParseOutcome(
                        task=task,
                        tuples=tuples,
                        malformed=filler,
                        raw_segment_count=int(obj.get("raw_segments", len(tuples) + len(filler))),
                        it_aspect_segments=int(obj.get("it_aspect_segments", 0)),
                    ),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
            raise SchemaError(f"{path}: line {line_no}: bad parsed record: {err}") from None
    return out
