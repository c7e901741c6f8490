"""Multi-round chain-of-thought forward and backward translation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .core import Entity, LabeledSentence
from .errors import EatError, EmptyReplyError, StageError
from .llm import (
    DEFAULT_PARAMS,
    DEFAULT_TEMPLATES,
    ChatTranscript,
    PromptTemplate,
    complete,
    language_name,
    render,
)

DEFAULT_ROUNDS = 2
MAX_ROUNDS = 5
ENGLISH = "en"

# straight and typographic quotes, CJK corner brackets
_QUOTES = "\"'`“”‘’«»「」『』"


def clean_answer(text: str) -> str:
    """Strip whitespace and any surrounding quote characters."""
    return text.strip().strip(_QUOTES).strip()


def check_rounds(rounds: int) -> int:
    if not isinstance(rounds, int) or not 1 <= rounds <= MAX_ROUNDS:
        raise ValueError(f"rounds must be an integer in 1..{MAX_ROUNDS}, got {rounds!r}")
    return rounds


@dataclass(frozen=True)
class ForwardResult:
    english_text: str
    rounds: ChatTranscript
    source_sentence_id: int


@dataclass(frozen=True)
class BackwardResult:
    candidate_text: str
    rounds: ChatTranscript
    source_entity: Entity


def _converse(stage, backend, prompts, params) -> tuple[str, ChatTranscript]:
    """Run ``prompts`` (a list of callables taking the previous reply) in one conversation.

    The final prompt is the filter call; its cleaned reply is returned.
    """
    transcript = ChatTranscript(backend.backend_id, dict(params))
    prior = None
    for i, make_prompt in enumerate(prompts, 1):
        label = "filter" if i == len(prompts) else i
        transcript.add("user", make_prompt(prior))
        try:
            prior = complete(backend, transcript)
        except EatError as exc:
            raise StageError(stage, label, exc) from exc
    answer = clean_answer(prior)
    if not answer:
        raise StageError(stage, "filter", EmptyReplyError("filter output is empty"))
    return answer, transcript


def forward_translate(
    sentence: LabeledSentence,
    language: str,
    backend,
    templates: Mapping[str, PromptTemplate] = DEFAULT_TEMPLATES,
    rounds: int = DEFAULT_ROUNDS,
    params: Optional[dict] = None,
) -> ForwardResult:
    """Translate ``sentence`` into English; issues ``rounds + 1`` backend calls."""
    if language == ENGLISH:
        raise ValueError("forward translation source must not be English")
    check_rounds(rounds)
    bindings = {
        "sentence": sentence.text,
        "target_lang": language_name(language),
        "source_lang": language_name(ENGLISH),
    }
    prompts = [lambda _: render(templates["p1t"], bindings)]
    prompts += [lambda prior: render(templates["p2t"], {**bindings, "prior": prior})] * (rounds - 1)
    prompts.append(lambda _: render(templates["pf"], bindings))
    text, transcript = _converse("forward", backend, prompts, params or DEFAULT_PARAMS)
    return ForwardResult(text, transcript, sentence.id)


def backward_translate(
    entity: Entity,
    sentence: LabeledSentence,
    language: str,
    backend,
    templates: Mapping[str, PromptTemplate] = DEFAULT_TEMPLATES,
    rounds: int = DEFAULT_ROUNDS,
    params: Optional[dict] = None,
) -> BackwardResult:
    """Translate an English entity back into ``language``, checked against ``sentence``."""
    if not entity.surface.strip():
        raise ValueError("entity surface must be non-empty")
    check_rounds(rounds)
    bindings = {
        "entity": entity.surface,
        "sentence": sentence.text,
        "target_lang": language_name(language),
        "source_lang": language_name(ENGLISH),
    }
    prompts = [lambda _: render(templates["p1e"], bindings)]
    prompts += [lambda prior: render(templates["p2e"], {**bindings, "prior": prior})] * (rounds - 1)
    prompts.append(lambda _: render(templates["pf"], bindings))
    text, transcript = _converse("backward", backend, prompts, params or DEFAULT_PARAMS)
    return BackwardResult(text, transcript, entity)
