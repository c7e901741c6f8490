"""Domain types and span grounding.

Spans use half-open token intervals ``[start, end)``.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import BioError, OverlapError

DEFAULT_TAGS = ("PER", "LOC", "ORG")
DEFAULT_MAX_SPAN_TOKENS = 10
# scripts written without spaces between words
UNSEGMENTED_LANGUAGES = frozenset({"zh", "ja", "th"})

_LANG_RE = re.compile(r"^[a-z]{2}$")


def check_language(code: str) -> str:
    """Validate an ISO 639-1 code and return it unchanged."""
    if not isinstance(code, str) or not _LANG_RE.match(code):
        raise ValueError(f"invalid language code {code!r}; expected two lowercase ASCII letters")
    return code


def check_tag(name: str, tag_set: Iterable[str] = DEFAULT_TAGS) -> str:
    if name not in tuple(tag_set):
        raise ValueError(f"unknown entity tag {name!r}")
    return name


def split_bio(label: str) -> tuple[str, Optional[str]]:
    """``"B-PER" -> ("B", "PER")``, ``"O" -> ("O", None)``."""
    if label == "O":
        return "O", None
    if len(label) > 2 and label[1] == "-" and label[0] in "BI":
        return label[0], label[2:]
    raise ValueError(f"not a BIO label: {label!r}")


def check_bio(tags: Sequence[str], tag_set: Optional[Iterable[str]] = None) -> None:
    """Raise BioError at the first token violating BIO2."""
    allowed = None if tag_set is None else set(tag_set)
    prev_type = None
    for i, label in enumerate(tags):
        try:
            prefix, typ = split_bio(label)
        except ValueError as exc:
            raise BioError(str(exc), i) from None
        if allowed is not None and typ is not None and typ not in allowed:
            raise BioError(f"unknown entity tag {typ!r}", i)
        if prefix == "I" and prev_type != typ:
            raise BioError(f"{label} does not continue an entity of the same type", i)
        prev_type = typ


@dataclass(frozen=True)
class LabeledSentence:
    tokens: tuple[str, ...]
    tags: tuple[str, ...]
    language: str = "en"
    id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "tags", tuple(self.tags))
        if len(self.tokens) != len(self.tags):
            raise ValueError(
                f"sentence {self.id}: {len(self.tokens)} tokens but {len(self.tags)} tags"
            )
        check_language(self.language)
        check_bio(self.tags)

    def __len__(self):
        return len(self.tokens)

    @property
    def text(self) -> str:
        sep = "" if self.language in UNSEGMENTED_LANGUAGES else " "
        return sep.join(self.tokens)


@dataclass(frozen=True, order=True)
class EntitySpan:
    start: int
    end: int
    tag: str
    surface: str = field(default="", compare=False)

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def __len__(self):
        return self.end - self.start

    def overlaps(self, other: "EntitySpan") -> bool:
        return self.start < other.end and other.start < self.end


class Entity(NamedTuple):
    """An extracted entity not yet anchored to tokens."""

    surface: str
    tag: str


@dataclass(frozen=True)
class NormalizationPolicy:
    unicode_form: str = "NFC"
    case_sensitive: bool = True
    collapse_whitespace: bool = True

    def normalize(self, text: str) -> str:
        s = unicodedata.normalize(self.unicode_form, text)
        if not self.case_sensitive:
            # casefold can emit decomposed sequences
            s = unicodedata.normalize(self.unicode_form, s.casefold())
        if self.collapse_whitespace:
            s = " ".join(s.split())
        return s


DEFAULT_POLICY = NormalizationPolicy()


def spans_from_bio(sentence: LabeledSentence | Sequence[str]) -> list[EntitySpan]:
    """Maximal contiguous spans of a BIO2 tag sequence.

    Accepts a LabeledSentence (surfaces filled from its tokens) or a bare tag sequence.
    """
    if isinstance(sentence, LabeledSentence):
        tags, tokens = sentence.tags, sentence.tokens
    else:
        tags, tokens = tuple(sentence), None
    check_bio(tags)

    spans = []
    start = typ = None
    for i, label in enumerate(list(tags) + ["O"]):
        prefix, t = split_bio(label)
        if start is not None and prefix != "I":
            surface = " ".join(tokens[start:i]) if tokens else ""
            spans.append(EntitySpan(start, i, typ, surface))
            start = None
        if prefix == "B":
            start, typ = i, t
    return spans


def bio_from_spans(n: int, spans: Iterable[EntitySpan]) -> list[str]:
    tags = ["O"] * n
    for span in sorted(spans):
        if span.end > n:
            raise ValueError(f"span [{span.start}, {span.end}) exceeds sentence length {n}")
        if any(t != "O" for t in tags[span.start:span.end]):
            raise OverlapError(f"span [{span.start}, {span.end}) overlaps an earlier span")
        tags[span.start] = f"B-{span.tag}"
        for i in range(span.start + 1, span.end):
            tags[i] = f"I-{span.tag}"
    return tags


def ground_span(
    candidate: str,
    sentence: LabeledSentence | Sequence[str],
    policy: NormalizationPolicy = DEFAULT_POLICY,
    max_span_tokens: int = DEFAULT_MAX_SPAN_TOKENS,
) -> Optional[tuple[int, int]]:
    """Locate ``candidate`` as a contiguous token span of ``sentence``.

    A span matches when its tokens, joined either by a single space or with no
    separator, normalize to the normalized candidate. Returns the match with the
    smallest start, then the smallest end, or None.
    """
    target = policy.normalize(candidate)
    if not target:
        raise ValueError("candidate is empty after normalization")
    tokens = sentence.tokens if isinstance(sentence, LabeledSentence) else tuple(sentence)
    n = len(tokens)
    for i in range(n):
        for j in range(i + 1, min(n, i + max_span_tokens) + 1):
            window = tokens[i:j]
            if policy.normalize(" ".join(window)) == target or policy.normalize("".join(window)) == target:
                return i, j
    return None
