"""Parse source corpora into Examples and define the canonical interchange file.

Two upstream text formats are supported, both one example per line with a
``####`` separator between the sentence and its annotation list:

* quad lines carry ``[['aspect', 'category', 'sentiment', 'opinion'], ...]``
  (aspect or opinion may be the literal NULL);
* triplet lines carry ``[([aspect indices], [opinion indices], 'POS'), ...]``
  over the whitespace tokens of the sentence.

Annotation lists are scanned by a small quote-aware tokenizer rather than an
expression evaluator.  Whitespace is normalized here, once, so every
downstream module sees canonical strings.  The canonical on-disk form is
line-delimited JSON with a schema header; see docs/formats.md for grammars.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .core import (
    AspectTerm,
    Capabilities,
    CategoryLabel,
    Example,
    ForgeError,
    IndexOutOfRange,
    Quad,
    SchemaError,
    SentimentPolarity,
    normalize_ws,
)
from .templates import SSEP

DATASET_SCHEMA = "absa-forge/dataset/v1"

SEPARATOR = "####"

_ASTE_POLARITY = {"POS": SentimentPolarity.POSITIVE, "NEG": SentimentPolarity.NEGATIVE, "NEU": SentimentPolarity.NEUTRAL}


class MalformedLine(ForgeError):
    """A source line violated its format; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.reason = message


@dataclass(frozen=True)
class LineIssue:
    line_no: int
    severity: str  # "error" | "warning"
    message: str


class IngestError(ForgeError):
    """Strict-mode loading failed; carries every per-line issue."""

    def __init__(self, issues: list[LineIssue]):
        lines = "; ".join(f"line {i.line_no}: {i.message}" for i in issues[:5])
        more = f" (+{len(issues) - 5} more)" if len(issues) > 5 else ""
        super().__init__(f"{len(issues)} malformed line(s): {lines}{more}")
        self.issues = issues


@dataclass(frozen=True)
class Dataset:
    name: str
    split: str
    examples: tuple[Example, ...]
    category_vocab: frozenset[CategoryLabel]
    capabilities: Capabilities

    def __post_init__(self) -> None:
        ids = [e.id for e in self.examples]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate example ids in split {self.split!r}: {dupes}")
        if self.capabilities.has_category:
            derived = frozenset(q.category for e in self.examples for q in e.quads if q.category)
            if derived != self.category_vocab:
                raise ValueError("category_vocab must equal the categories present in examples")

    @classmethod
    def build(
        cls,
        name: str,
        split: str,
        examples: list[Example] | tuple[Example, ...],
        capabilities: Capabilities,
    ) -> "Dataset":
        vocab = frozenset(q.category for e in examples for q in e.quads if q.category is not None)
        if not capabilities.has_category:
            vocab = frozenset()
        return cls(
            name=name,
            split=split,
            examples=tuple(examples),
            category_vocab=vocab,
            capabilities=capabilities,
        )


class _Scanner:
    """Character scanner for the bracketed annotation syntax."""

    def __init__(self, text: str, line_no: int):
        self.text = text
        self.pos = 0
        self.line_no = line_no

    def error(self, message: str) -> MalformedLine:
        return MalformedLine(self.line_no, f"{message} at column {self.pos}")

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def parse_string(self) -> str:
        quote = self.peek()
        if quote not in ("'", '"'):
            raise self.error("expected quoted string")
        self.pos += 1
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated string")
            ch = self.text[self.pos]
            if ch == "\\" and self.pos + 1 < len(self.text):
                out.append(self.text[self.pos + 1])
                self.pos += 2
                continue
            if ch == quote:
                self.pos += 1
                return "".join(out)
            out.append(ch)
            self.pos += 1

    def parse_int(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise self.error("expected integer")
        return int(self.text[start : self.pos])

    def parse_list(self, item_parser) -> list:
        self.expect("[")
        items = []
        if self.peek() == "]":
            self.pos += 1
            return items
        while True:
            items.append(item_parser())
            ch = self.peek()
            if ch == ",":
                self.pos += 1
                continue
            if ch == "]":
                self.pos += 1
                return items
            raise self.error("expected ',' or ']'")


def _split_line(line: str, line_no: int) -> tuple[str, str]:
    if SEPARATOR not in line:
        raise MalformedLine(line_no, f"missing {SEPARATOR!r} separator")
    sentence, _, annotation = line.partition(SEPARATOR)
    return sentence, annotation


def _check_reserved(raw: str, line_no: int, what: str) -> None:
    if SSEP in raw:
        raise MalformedLine(line_no, f"{what} contains the reserved token {SSEP}")


def _normalized_term(raw: str, line_no: int, what: str) -> str:
    _check_reserved(raw, line_no, what)
    term = normalize_ws(raw)
    if not term:
        raise MalformedLine(line_no, f"empty {what}")
    return term


def parse_quad_line(line: str, line_no: int, split: str = "train") -> Example:
    """Parse a quad-annotated line into an Example (id ``<split>:<line_no>``)."""
    sentence_raw, annotation = _split_line(line, line_no)
    _check_reserved(sentence_raw, line_no, "sentence")
    text = normalize_ws(sentence_raw)
    if not text:
        raise MalformedLine(line_no, "empty sentence")

    scanner = _Scanner(annotation, line_no)
    entries = scanner.parse_list(lambda: scanner.parse_list(scanner.parse_string))
    if not scanner.at_end():
        raise scanner.error("trailing characters after annotation list")
    quads: list[Quad] = []
    for entry in entries:
        if len(entry) != 4:
            raise MalformedLine(line_no, f"annotation needs 4 fields, got {len(entry)}")
        aspect_raw, category_raw, sentiment_raw, opinion_raw = entry
        if aspect_raw == "NULL":
            aspect = AspectTerm.implicit()
        else:
            aspect = AspectTerm.explicit(_normalized_term(aspect_raw, line_no, "aspect term"))
        _check_reserved(category_raw, line_no, "category")
        if not category_raw.strip():
            raise MalformedLine(line_no, "empty category")
        category = CategoryLabel.from_token(category_raw)
        try:
            sentiment = SentimentPolarity.from_label(sentiment_raw)
        except ValueError as err:
            raise MalformedLine(line_no, str(err)) from None
        if opinion_raw == "NULL":
            opinion = None
        else:
            opinion = _normalized_term(opinion_raw, line_no, "opinion term")
        quads.append(Quad(aspect=aspect, category=category, opinion=opinion, sentiment=sentiment))
    return Example(id=f"{split}:{line_no}", text=text, quads=tuple(quads))


def parse_aste_line(
    line: str,
    line_no: int,
    split: str = "train",
    warnings: list[LineIssue] | None = None,
) -> Example:
    """Parse a triplet-annotated line; spans are index runs over whitespace tokens.

    Non-contiguous index runs are tolerated (warning, joined with spaces);
    indices past the token count raise IndexOutOfRange.
    """
    sentence_raw, annotation = _split_line(line, line_no)
    _check_reserved(sentence_raw, line_no, "sentence")
    tokens = sentence_raw.split()
    if not tokens:
        raise MalformedLine(line_no, "empty sentence")
    text = " ".join(tokens)

    scanner = _Scanner(annotation, line_no)

    def parse_triplet() -> tuple[list[int], list[int], str]:
        scanner.expect("(")
        aspect_idx = scanner.parse_list(scanner.parse_int)
        scanner.expect(",")
        opinion_idx = scanner.parse_list(scanner.parse_int)
        scanner.expect(",")
        label = scanner.parse_string()
        scanner.expect(")")
        return aspect_idx, opinion_idx, label

    triplets = scanner.parse_list(parse_triplet)
    if not scanner.at_end():
        raise scanner.error("trailing characters after annotation list")

    def span_text(indices: list[int], what: str) -> str:
        if not indices:
            raise MalformedLine(line_no, f"empty {what} index list")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise MalformedLine(line_no, f"{what} indices must be strictly increasing")
        for i in indices:
            if i >= len(tokens):
                raise IndexOutOfRange(f"{what} token index {i} >= token count {len(tokens)}")
        if indices != list(range(indices[0], indices[-1] + 1)) and warnings is not None:
            warnings.append(
                LineIssue(line_no, "warning", f"non-contiguous {what} span {indices}, joining with spaces")
            )
        return " ".join(tokens[i] for i in indices)

    quads: list[Quad] = []
    for aspect_idx, opinion_idx, label in triplets:
        if label not in _ASTE_POLARITY:
            raise MalformedLine(line_no, f"unknown sentiment label: {label!r}")
        quads.append(
            Quad(
                aspect=AspectTerm.explicit(span_text(aspect_idx, "aspect")),
                category=None,
                opinion=span_text(opinion_idx, "opinion"),
                sentiment=_ASTE_POLARITY[label],
            )
        )
    return Example(id=f"{split}:{line_no}", text=text, quads=tuple(quads))


def _quad_to_json(q: Quad) -> dict:
    return {
        "aspect": q.aspect.text,
        "category": q.category.surface if q.category else None,
        "sentiment": q.sentiment.value,
        "opinion": q.opinion,
    }


def _quad_from_json(obj: dict, line_no: int) -> Quad:
    try:
        aspect = AspectTerm.implicit() if obj["aspect"] is None else AspectTerm.explicit(obj["aspect"])
        category = None if obj["category"] is None else CategoryLabel.from_surface(obj["category"])
        sentiment = SentimentPolarity.from_label(obj["sentiment"])
        return Quad(aspect=aspect, category=category, opinion=obj["opinion"], sentiment=sentiment)
    except (KeyError, TypeError, ValueError) as err:
        raise MalformedLine(line_no, f"bad quad record: {err}") from None


def write_canonical(dataset: Dataset, path: str | Path) -> None:
    """Write the dataset as schema-headed line-delimited JSON (lossless)."""
    path = Path(path)
    header = {
        "schema": DATASET_SCHEMA,
        "name": dataset.name,
        "split": dataset.split,
        "has_category": dataset.capabilities.has_category,
        "has_opinion": dataset.capabilities.has_opinion,
    }
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for ex in dataset.examples:
            record = {"id": ex.id, "text": ex.text, "quads": [_quad_to_json(q) for q in ex.quads]}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _load_canonical(lines: list[tuple[int, str]], path: Path) -> tuple[Dataset, list[LineIssue]]:
    if not lines:
        raise SchemaError(f"{path}: empty file, expected schema header")
    header_no, header_line = lines[0]
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as err:
        raise SchemaError(f"{path}: bad header line: {err}") from None
    if not isinstance(header, dict) or header.get("schema") != DATASET_SCHEMA:
        raise SchemaError(f"{path}: expected schema {DATASET_SCHEMA!r}, got {header.get('schema')!r}")
    capabilities = Capabilities(bool(header["has_category"]), bool(header["has_opinion"]))
    examples: list[Example] = []
    issues: list[LineIssue] = []
    for line_no, line in lines[1:]:
        try:
            obj = json.loads(line)
            quads = tuple(_quad_from_json(q, line_no) for q in obj["quads"])
            examples.append(Example(id=str(obj["id"]), text=obj["text"], quads=quads))
        except MalformedLine as err:
            issues.append(LineIssue(line_no, "error", err.reason))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
            issues.append(LineIssue(line_no, "error", f"bad record: {err}"))
    dataset = Dataset.build(header["name"], header["split"], examples, capabilities)
    return dataset, issues


def load_dataset(
    path: str | Path,
    fmt: str,
    *,
    split: str | None = None,
    name: str | None = None,
    lenient: bool = False,
) -> tuple[Dataset, list[LineIssue]]:
    """Load a file in one of the formats {quad, aste, canonical}.

    Returns the dataset plus per-line issues (warnings always; skipped-line
    errors in lenient mode).  In strict mode any malformed line is fatal and
    raises IngestError listing every offender.
    """
    path = Path(path)
    raw_lines = path.read_text(encoding="utf-8").splitlines()
    numbered = [(i + 1, line) for i, line in enumerate(raw_lines) if line.strip()]

    if fmt == "canonical":
        dataset, issues = _load_canonical(numbered, path)
        errors = [i for i in issues if i.severity == "error"]
        if errors and not lenient:
            raise IngestError(errors)
        return dataset, issues

    if fmt not in ("quad", "aste"):
        raise ValueError(f"unknown format: {fmt!r} (expected quad, aste or canonical)")
    if split is None:
        raise ValueError("split is required for quad/aste formats")
    name = name if name is not None else path.stem

    issues: list[LineIssue] = []
    examples: list[Example] = []
    for line_no, line in numbered:
        try:
            if fmt == "quad":
                examples.append(parse_quad_line(line, line_no, split))
            else:
                examples.append(parse_aste_line(line, line_no, split, warnings=issues))
        except MalformedLine as err:
            issues.append(LineIssue(line_no, "error", err.reason))
        except IndexOutOfRange as err:
            issues.append(LineIssue(line_no, "error", str(err)))
    errors = [i for i in issues if i.severity == "error"]
    if errors and not lenient:
        raise IngestError(errors)

    capabilities = Capabilities(has_category=fmt == "quad", has_opinion=True)
    dataset = Dataset.build(name, split, examples, capabilities)
    return dataset, issues
