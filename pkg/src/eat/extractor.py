"""Text-to-text English NER over the forward translation.

Answers follow a tiny grammar: ``TAG: surface`` entries separated by ``;`` or
newlines, with ``none`` (or nothing) meaning no entities.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .core import DEFAULT_TAGS, Entity
from .errors import ExtractionError
from .llm import DEFAULT_PARAMS, ChatTranscript, complete

logger = logging.getLogger(__name__)

DEFAULT_PREFIX = (
    "Label the named entities in the sentence. Answer with one 'TAG: entity' entry per "
    "entity, separated by ';', using only the tags listed. Answer 'none' if there are no entities."
)

_SEPARATORS = re.compile(r"[;\n]")
_NONE = {"none", "none.", "no entities", "n/a"}


@dataclass(frozen=True)
class ExtractorInput:
    prefix: str
    tags: tuple[str, ...]
    sentence: str

    def text(self) -> str:
        return f"PREFIX: {self.prefix}\nTAGS: {', '.join(self.tags)}\nSENTENCE: {self.sentence}"


@dataclass(frozen=True)
class ExtractionAnswer:
    raw: str
    entities: tuple[Entity, ...]
    skipped: int = 0


def build_input(sentence: str, tags: Sequence[str] = DEFAULT_TAGS, prefix: str = DEFAULT_PREFIX) -> ExtractorInput:
    if not sentence.strip():
        raise ValueError("sentence must be non-empty")
    tags = tuple(tags)
    if not tags:
        raise ValueError("tag set must be non-empty")
    return ExtractorInput(prefix, tags, sentence)


def parse_answer(raw: str, tags: Iterable[str] = DEFAULT_TAGS) -> tuple[list[Entity], int]:
    """Parse a generated answer into entities; returns ``(entities, skipped)``.

    Never raises. Fragments with an unknown tag, no colon or an empty surface are
    skipped and counted.
    """
    allowed = set(tags)
    entities: list[Entity] = []
    skipped = 0
    for fragment in _SEPARATORS.split(raw or ""):
        fragment = fragment.strip().lstrip("-*• ").strip()
        if not fragment or fragment.lower() in _NONE:
            continue
        tag, sep, surface = fragment.partition(":")
        tag = tag.strip().upper()
        surface = surface.strip().strip("\"'“”").strip()
        if not sep or tag not in allowed or not surface:
            skipped += 1
            continue
        entities.append(Entity(surface, tag))
    if skipped:
        logger.warning("skipped %d unparseable answer fragment(s)", skipped)
    return entities, skipped


def extract(inp: ExtractorInput, engine) -> ExtractionAnswer:
    raw = engine.generate(inp)
    entities, skipped = parse_answer(raw, inp.tags)
    stripped = raw.strip()
    if stripped and stripped.lower() not in _NONE and not entities and ":" not in stripped:
        raise ExtractionError("unparseable extractor answer", raw)
    return ExtractionAnswer(raw, tuple(entities), skipped)


class DictionaryEngine:
    """Deterministic lookup engine: emits every known surface found in the sentence.

    Matches are whole-word, longest first, reported in sentence order.
    """

    engine_id = "dictionary"

    def __init__(self, entries: dict[str, str]):
        self.entries = dict(entries)
        alternatives = sorted(self.entries, key=len, reverse=True)
        self._pattern = (
            re.compile(r"(?<!\w)(" + "|".join(map(re.escape, alternatives)) + r")(?!\w)")
            if alternatives else None
        )

    @classmethod
    def from_file(cls, path, tags: Iterable[str] = DEFAULT_TAGS) -> "DictionaryEngine":
        """Load ``surface<TAB>TAG`` lines."""
        allowed = set(tags)
        entries = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            surface, sep, tag = line.rpartition("\t")
            if not sep or not surface.strip():
                raise ValueError(f"{path}:{lineno}: expected 'surface<TAB>TAG'")
            if tag.strip() not in allowed:
                raise ValueError(f"{path}:{lineno}: unknown tag {tag.strip()!r}")
            entries[surface.strip()] = tag.strip()
        return cls(entries)

    def generate(self, inp: ExtractorInput) -> str:
        if self._pattern is None:
            return "none"
        found = [
            f"{self.entries[m.group(1)]}: {m.group(1)}"
            for m in self._pattern.finditer(inp.sentence)
            if self.entries[m.group(1)] in inp.tags
        ]
        return "; ".join(found) if found else "none"


class LlmEngine:
    """Sends the labeled extractor input as a single chat turn."""

    def __init__(self, backend, params: Optional[dict] = None):
        self.backend = backend
        self.params = dict(params or DEFAULT_PARAMS)

    @property
    def engine_id(self):
        return f"llm:{self.backend.backend_id}"

    def generate(self, inp: ExtractorInput) -> str:
        transcript = ChatTranscript(self.backend.backend_id, dict(self.params))
        transcript.add("user", inp.text())
        return complete(self.backend, transcript)
