"""Chat-completion gateway: prompt templates, live/replay/recording backends."""

from __future__ import annotations

import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import httpx

from .errors import (
    BackendError,
    EmptyReplyError,
    ReplayMissError,
    TransportError,
    UnboundPlaceholderError,
)
from .store import FixtureStore, digest_of

logger = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")
DEFAULT_PARAMS = {"temperature": 0.0, "max_tokens": 512}

LANGUAGE_NAMES = {
    "ar": "Arabic", "de": "German", "en": "English", "es": "Spanish", "fr": "French",
    "hi": "Hindi", "hy": "Armenian", "ja": "Japanese", "ka": "Georgian", "ko": "Korean",
    "nl": "Dutch", "ru": "Russian", "zh": "Chinese",
}


def language_name(code: str) -> str:
    return LANGUAGE_NAMES.get(code, code)


@dataclass(frozen=True)
class ChatMessage:
    role: str
    text: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.role != "system" and not self.text:
            raise ValueError(f"{self.role} message text must be non-empty")


@dataclass
class ChatTranscript:
    backend_id: str
    request_params: dict = field(default_factory=lambda: dict(DEFAULT_PARAMS))
    turns: list = field(default_factory=list)

    def add(self, role: str, text: str) -> None:
        expected = "user" if not self.turns or self.turns[-1].role != "user" else "assistant"
        if role == "system":
            if self.turns:
                raise ValueError("system turn must come first")
        elif role != expected:
            raise ValueError(f"expected a {expected} turn, got {role}")
        self.turns.append(ChatMessage(role, text))

    def replies(self) -> list[str]:
        return [t.text for t in self.turns if t.role == "assistant"]

    def request(self) -> dict:
        return {
            "backend_id": self.backend_id,
            "turns": [[t.role, t.text] for t in self.turns],
            "params": dict(self.request_params),
        }

    def digest(self) -> str:
        return digest_of(self.request())


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    body: str

    @property
    def placeholders(self) -> list[str]:
        return _PLACEHOLDER.findall(self.body)


_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


def render(template: PromptTemplate | str, bindings: Mapping[str, object]) -> str:
    """Single-pass literal substitution of ``{name}`` placeholders."""
    body = template.body if isinstance(template, PromptTemplate) else template

    def sub(m):
        name = m.group(1)
        if name not in bindings:
            raise UnboundPlaceholderError(name)
        return str(bindings[name])

    return _PLACEHOLDER.sub(sub, body)


DEFAULT_TEMPLATES = {
    "p1t": PromptTemplate(
        "p1t",
        "The following {target_lang} sentence may contain named entities such as people, "
        "locations and organizations. Before translating it into {source_lang}, list the "
        "entities it probably contains and briefly describe each one.\n"
        "Sentence: {sentence}",
    ),
    "p2t": PromptTemplate(
        "p2t",
        "Taking your previous analysis into account:\n{prior}\n\n"
        "Translate the sentence from {target_lang} to {source_lang}. Render every entity "
        "as a proper name rather than translating its characters literally.\n"
        "Sentence: {sentence}",
    ),
    "pf": PromptTemplate(
        "pf",
        "Output only the final answer, with no explanation, notes or quotation marks.",
    ),
    "p1e": PromptTemplate(
        "p1e",
        "Translate the {source_lang} entity \"{entity}\" into {target_lang}, and analyze "
        "whether your translation can appear in this {target_lang} sentence:\n{sentence}",
    ),
    "p2e": PromptTemplate(
        "p2e",
        "Given your analysis:\n{prior}\n\nCheck whether the result appears verbatim in the "
        "sentence below. If it does not, give the segment of the sentence that refers to "
        "the entity \"{entity}\".\nSentence: {sentence}",
    ),
}


def load_templates(overrides: Optional[Mapping[str, str]] = None) -> dict[str, PromptTemplate]:
    templates = dict(DEFAULT_TEMPLATES)
    for key, body in (overrides or {}).items():
        if key not in DEFAULT_TEMPLATES:
            raise ValueError(f"unknown template id {key!r}")
        templates[key] = PromptTemplate(key, body)
    return templates


def complete(backend, transcript: ChatTranscript) -> str:
    """Send the transcript, append and return the assistant reply."""
    if not transcript.turns or transcript.turns[-1].role != "user":
        raise ValueError("transcript must end with a user turn")
    reply = backend.chat(transcript)
    if not reply or not reply.strip():
        raise EmptyReplyError(f"{transcript.backend_id} returned an empty reply")
    transcript.add("assistant", reply)
    return reply


class CallableBackend:
    """Wraps ``fn(transcript) -> str``; used for scripted mocks."""

    def __init__(self, fn: Callable[[ChatTranscript], str], backend_id: str = "callable"):
        self.fn = fn
        self.backend_id = backend_id

    def chat(self, transcript):
        return self.fn(transcript)


class OpenAIBackend:
    """OpenAI-compatible ``/v1/chat/completions`` client.

    Retries transport errors, 429 and 5xx with exponential backoff; at most
    ``max_in_flight`` requests are outstanding at once.
    """

    def __init__(
        self,
        model: str,
        base_url: Optional[str] = None,
        api_key: Optional[str] = None,
        max_retries: int = 3,
        backoff: float = 1.0,
        max_in_flight: int = 4,
        timeout: float = 120.0,
        transport: Optional[httpx.BaseTransport] = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        base_url = base_url or os.environ.get("EAT_API_BASE")
        if not base_url:
            raise ValueError("no API base URL; set EAT_API_BASE")
        self.model = model
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get("EAT_API_KEY")
        self.max_retries = max_retries
        self.backoff = backoff
        self.max_in_flight = max_in_flight
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._sleep = sleep
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    @property
    def backend_id(self):
        return f"openai:{self.model}"

    def payload(self, transcript: ChatTranscript) -> dict:
        params = transcript.request_params
        return {
            "model": self.model,
            "messages": [{"role": t.role, "content": t.text} for t in transcript.turns],
            "temperature": params.get("temperature", DEFAULT_PARAMS["temperature"]),
            "max_tokens": params.get("max_tokens", DEFAULT_PARAMS["max_tokens"]),
        }

    def chat(self, transcript):
        url = f"{self.base_url}/v1/chat/completions"
        body = self.payload(transcript)
        attempts = 0
        while True:
            attempts += 1
            try:
                with self._slots:
                    resp = self._client.post(url, json=body)
            except httpx.TransportError as exc:
                error = f"transport error: {exc}"
            else:
                if resp.status_code == 429 or resp.status_code >= 500:
                    error = f"HTTP {resp.status_code}"
                elif resp.status_code >= 400:
                    raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                else:
                    try:
                        return resp.json()["choices"][0]["message"]["content"] or ""
                    except (ValueError, KeyError, IndexError, TypeError) as exc:
                        raise BackendError(f"malformed completion response: {exc}") from exc
            if attempts > self.max_retries:
                raise TransportError(error, attempts)
            delay = self.backoff * 2 ** (attempts - 1)
            logger.warning("%s; retrying in %.1fs (attempt %d)", error, delay, attempts)
            self._sleep(delay)

    def close(self):
        self._client.close()


class ReplayBackend:
    def __init__(self, store: FixtureStore, backend_id: str):
        self.store = store
        self.backend_id = backend_id

    def chat(self, transcript):
        digest = transcript.digest()
        record = self.store.get(digest)
        if record is None:
            raise ReplayMissError(digest)
        return record["reply"]


class RecordingBackend:
    """Passes calls to ``live`` and persists each successful reply."""

    def __init__(self, live, store: FixtureStore):
        self.live = live
        self.store = store

    @property
    def backend_id(self):
        return self.live.backend_id

    def chat(self, transcript):
        reply = self.live.chat(transcript)
        if reply and reply.strip():
            self.store.put(transcript.digest(), transcript.request(), reply)
        return reply


def record(backend, store: FixtureStore) -> RecordingBackend:
    return RecordingBackend(backend, store)
