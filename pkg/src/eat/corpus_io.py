"""Column-format NER datasets and ShareGPT export."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import DEFAULT_TAGS, LabeledSentence, check_language, split_bio
from .errors import AlignmentError, DataFormatError
from .llm import render

SPLITS = ("train", "valid", "test")

DEFAULT_INSTRUCTION = (
    "Below is a description of the English entity \"{entity}\" written in another "
    "language. Output only the title of the entity exactly as it is written in the "
    "description.\nDescription: {description}"
)


@dataclass(frozen=True)
class DatasetSplit:
    sentences: tuple[LabeledSentence, ...]
    language: str
    split_name: str = "test"

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        check_language(self.language)
        if self.split_name not in SPLITS:
            raise ValueError(f"unknown split {self.split_name!r}")
        for i, s in enumerate(self.sentences):
            if s.id != i:
                raise ValueError(f"sentence ids must be dense from 0; got {s.id} at position {i}")

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)


def parse_bio_file(
    content: bytes,
    language: str,
    tag_set: Iterable[str] = DEFAULT_TAGS,
    split_name: str = "test",
) -> DatasetSplit:
    """Parse ``token<SEP>...<SEP>tag`` lines; blank lines end sentences.

    The tag is the last whitespace-separated field, so 4-column CoNLL-2003 files
    parse too. ``-DOCSTART-`` lines are skipped.
    """
    tags_allowed = set(tag_set)
    try:
        text = content.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"invalid UTF-8 at byte {exc.start}") from None
    if text.startswith("\ufeff"):
        text = text[1:]

    sentences = []
    tokens: list[str] = []
    tags: list[str] = []

    def flush():
        if tokens:
            sentences.append(LabeledSentence(tokens, tags, language, len(sentences)))
            tokens.clear()
            tags.clear()

    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            flush()
            continue
        fields = line.split()
        if fields[0] == "-DOCSTART-":
            continue
        if len(fields) < 2:
            raise DataFormatError(f"expected 'token<TAB>tag', got {line!r}", lineno)
        token, label = fields[0], fields[-1]
        try:
            prefix, typ = split_bio(label)
        except ValueError:
            raise DataFormatError(f"malformed tag {label!r}", lineno) from None
        if typ is not None and typ not in tags_allowed:
            raise DataFormatError(f"unknown tag {typ!r}", lineno)
        if prefix == "I" and (not tags or split_bio(tags[-1])[1] != typ):
            raise DataFormatError(f"BIO2 violation: {label} does not continue an entity", lineno)
        tokens.append(token)
        tags.append(label)
    flush()
    return DatasetSplit(tuple(sentences), language, split_name)


def write_predictions(split: DatasetSplit, predictions: Sequence[Sequence[str]]) -> bytes:
    if len(predictions) != len(split.sentences):
        raise AlignmentError(
            f"{len(predictions)} predictions for {len(split.sentences)} sentences",
            min(len(predictions), len(split.sentences)),
        )
    lines = []
    for sentence, pred in zip(split.sentences, predictions):
        if len(pred) != len(sentence.tokens):
            raise AlignmentError(
                f"{len(pred)} predicted tags for {len(sentence.tokens)} tokens", sentence.id
            )
        for token, tag in zip(sentence.tokens, pred):
            lines.append(f"{token}\t{tag}\n")
        lines.append("\n")
    return "".join(lines).encode("utf-8")


def sharegpt_records(pairs, template: str = DEFAULT_INSTRUCTION) -> list[dict]:
    records = []
    for pair in pairs:
        prompt = render(template, {"entity": pair.english_entity, "description": pair.first_sentence})
        records.append({
            "conversations": [
                {"from": "human", "value": prompt},
                {"from": "gpt", "value": pair.title},
            ],
            "entity": pair.english_entity,
            "language": pair.language,
        })
    return records


def write_sharegpt(pairs, template: str = DEFAULT_INSTRUCTION) -> str:
    return json.dumps(sharegpt_records(pairs, template), ensure_ascii=False, indent=2) + "\n"
