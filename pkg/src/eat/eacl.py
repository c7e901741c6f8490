"""Entity-aligned cross-lingual corpus harvesting from Wikipedia interlanguage links."""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional
from urllib.parse import quote

import httpx

from .core import DEFAULT_POLICY, UNSEGMENTED_LANGUAGES, NormalizationPolicy, check_language
from .errors import FetchError, ReplayMissError
from .store import FixtureStore, digest_of

logger = logging.getLogger(__name__)

DEFAULT_USER_AGENT = "eat-eacl-harvester/0.1 (research corpus builder)"
DEFAULT_RATE = 10.0

_TERMINATORS = set(".!?。！？؟।")
# ASCII terminators also appear in abbreviations and decimals
_NEEDS_SPACE = set(".!?")
_OPEN = "([{（［｛【〔「『"
_CLOSE = ")]}）］｝】〕」』"


@dataclass(frozen=True)
class EaclPair:
    english_entity: str
    title: str
    first_sentence: str
    language: str


def first_sentence(text: str, language: str = "en") -> str:
    """Text up to and including the first sentence terminator outside brackets.

    ``. ! ?`` only end a sentence when followed by whitespace or end of text.
    """
    depth = 0
    for i, ch in enumerate(text):
        if ch in _OPEN:
            depth += 1
        elif ch in _CLOSE:
            depth = max(0, depth - 1)
        elif ch in _TERMINATORS and depth == 0:
            if ch in _NEEDS_SPACE and i + 1 < len(text) and not text[i + 1].isspace():
                continue
            return text[:i + 1].strip()
    return text.strip()


class RateLimiter:
    """Token bucket; with ``burst=1`` consecutive acquisitions are >= 1/rate apart."""

    def __init__(self, rate: float = DEFAULT_RATE, burst: int = 1,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.burst = burst
        self._clock = clock
        self._sleep = sleep
        self._tokens = float(burst)
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> float:
        """Block until a token is available; returns the grant time."""
        with self._lock:
            now = self._clock()
            self._tokens = min(self.burst, self._tokens + (now - self._last) * self.rate)
            if self._tokens < 1.0:
                wait = (1.0 - self._tokens) / self.rate
                self._sleep(wait)
                # grant after the computed wait even if float error leaves the
                # refill a hair short of a full token
                now = max(self._clock(), now + wait)
                self._tokens = 1.0
            self._tokens -= 1.0
            self._last = now
            return now


class ReplayTransport(httpx.BaseTransport):
    """Serves responses from a FixtureStore keyed by (method, URL without query, params)."""

    def __init__(self, store: FixtureStore):
        self.store = store

    def handle_request(self, request):
        digest = request_digest(request)
        record = self.store.get(digest)
        if record is None:
            raise ReplayMissError(digest)
        reply = record["reply"]
        return httpx.Response(reply["status"], json=reply["body"], request=request)


class RecordingTransport(httpx.BaseTransport):
    def __init__(self, inner: httpx.BaseTransport, store: FixtureStore):
        self.inner = inner
        self.store = store

    def handle_request(self, request):
        response = self.inner.handle_request(request)
        response.read()
        if response.status_code < 500 and response.status_code != 429:
            try:
                body = response.json()
            except ValueError:
                return response
            self.store.put(request_digest(request), request_key(request),
                           {"status": response.status_code, "body": body})
        return response


def request_key(request: httpx.Request) -> dict:
    url = request.url
    return {
        "method": request.method,
        "url": str(url.copy_with(query=None)),
        "params": sorted([k, v] for k, v in url.params.multi_items()),
    }


def request_digest(request: httpx.Request) -> str:
    return digest_of(request_key(request))


class WikiClient:
    """Interlanguage links and page summaries with rate limiting and retries."""

    def __init__(
        self,
        transport: Optional[httpx.BaseTransport] = None,
        rate: float = DEFAULT_RATE,
        max_retries: int = 3,
        backoff: float = 1.0,
        user_agent: Optional[str] = None,
        limiter: Optional[RateLimiter] = None,
        sleep: Callable[[float], None] = time.sleep,
        timeout: float = 30.0,
    ):
        ua = user_agent or os.environ.get("EAT_WIKI_UA") or DEFAULT_USER_AGENT
        self._http = httpx.Client(transport=transport, headers={"User-Agent": ua},
                                  timeout=timeout, follow_redirects=True)
        self.limiter = limiter or RateLimiter(rate)
        self.max_retries = max_retries
        self.backoff = backoff
        self._sleep = sleep
        self.request_log: list[tuple[float, str]] = []
        self.retries = 0

    def get_json(self, url: str, params: Optional[dict] = None) -> Optional[dict]:
        """GET and decode JSON; None on 404. Retries 429/5xx/transport errors."""
        attempts = 0
        while True:
            attempts += 1
            granted = self.limiter.acquire()
            self.request_log.append((granted, url))
            try:
                resp = self._http.get(url, params=params)
            except httpx.TransportError as exc:
                error = f"transport error: {exc}"
            else:
                if resp.status_code == 404:
                    return None
                if resp.status_code == 429 or resp.status_code >= 500:
                    error = f"HTTP {resp.status_code} from {url}"
                elif resp.status_code >= 400:
                    raise FetchError(f"HTTP {resp.status_code} from {url}", attempts)
                else:
                    return resp.json()
            if attempts > self.max_retries:
                raise FetchError(error, attempts)
            self.retries += 1
            delay = self.backoff * 2 ** (attempts - 1)
            logger.warning("%s; retry %d in %.1fs", error, attempts, delay)
            self._sleep(delay)

    def fetch_langlinks(self, entity: str) -> dict[str, str]:
        if not entity.strip():
            raise ValueError("entity title must be non-empty")
        params = {
            "action": "query", "prop": "langlinks", "titles": entity, "lllimit": "max",
            "redirects": "1", "format": "json", "formatversion": "2",
        }
        links: dict[str, str] = {}
        while True:
            doc = self.get_json("https://en.wikipedia.org/w/api.php", params) or {}
            for page in doc.get("query", {}).get("pages", []):
                if page.get("missing") or page.get("invalid"):
                    continue
                for link in page.get("langlinks", []):
                    links[link["lang"]] = link.get("title", link.get("*", ""))
            cont = doc.get("continue")
            if not cont:
                return links
            params = {**params, **cont}

    def fetch_summary(self, language: str, title: str) -> str:
        url = f"https://{language}.wikipedia.org/api/rest_v1/page/summary/{quote(title.replace(' ', '_'), safe='')}"
        doc = self.get_json(url)
        return (doc or {}).get("extract", "") or ""

    def close(self):
        self._http.close()


@dataclass
class HarvestState:
    processed: list = field(default_factory=list)
    pairs: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    pending: dict = field(default_factory=dict)
    failed: list = field(default_factory=list)

    @classmethod
    def load(cls, path) -> "HarvestState":
        p = Path(path)
        if not p.exists():
            return cls()
        return cls(**json.loads(p.read_text(encoding="utf-8")))

    def save(self, path) -> None:
        p = Path(path)
        tmp = p.with_suffix(p.suffix + ".tmp")
        tmp.write_text(json.dumps(asdict(self), ensure_ascii=False, indent=2), encoding="utf-8")
        os.replace(tmp, p)

    def pairs_for(self, language: str) -> list[EaclPair]:
        return [EaclPair(**d) for d in self.pairs.get(language, [])]


def keep_pair(title: str, sentence: str, policy: NormalizationPolicy = DEFAULT_POLICY) -> bool:
    t = policy.normalize(title)
    return bool(t) and t in policy.normalize(sentence)


def harvest_entity(entity: str, languages: Iterable[str], client: WikiClient,
                   policy: NormalizationPolicy = DEFAULT_POLICY) -> dict[str, EaclPair]:
    links = client.fetch_langlinks(entity)
    found = {}
    for lang in languages:
        title = links.get(lang)
        if not title:
            continue
        sentence = first_sentence(client.fetch_summary(lang, title), lang)
        if keep_pair(title, sentence, policy):
            found[lang] = EaclPair(entity, title, sentence, lang)
    return found


def build_corpus(
    entities: Iterable[str],
    languages: Iterable[str],
    client: WikiClient,
    state: Optional[HarvestState] = None,
    state_path=None,
    max_attempts: int = 3,
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> tuple[dict[str, list[EaclPair]], HarvestState]:
    """Harvest filtered pairs for every (entity, language).

    State is saved after each entity when ``state_path`` is given, so an
    interrupted run resumes without duplicating pairs. Entities that keep failing
    are retried in later passes, up to ``max_attempts`` in total.
    """
    languages = [check_language(a) for a in languages]
    if state is None:
        state = HarvestState.load(state_path) if state_path else HarvestState()
    for lang in languages:
        state.pairs.setdefault(lang, [])
        state.counts.setdefault(lang, 0)
    done = set(state.processed) | set(state.failed)
    queue = [e for e in dict.fromkeys(entities) if e not in done]

    while queue:
        retry = []
        for entity in queue:
            try:
                found = harvest_entity(entity, languages, client, policy)
            except FetchError as exc:
                attempts = state.pending.get(entity, 0) + 1
                state.pending[entity] = attempts
                logger.warning("entity %r failed (attempt %d): %s", entity, attempts, exc)
                if attempts >= max_attempts:
                    state.pending.pop(entity)
                    state.failed.append(entity)
                else:
                    retry.append(entity)
            else:
                for lang, pair in found.items():
                    state.pairs[lang].append(asdict(pair))
                    state.counts[lang] += 1
                state.pending.pop(entity, None)
                state.processed.append(entity)
            if state_path:
                state.save(state_path)
        queue = retry

    return {lang: state.pairs_for(lang) for lang in languages}, state


def count_tokens(text: str, language: str) -> int:
    if language in UNSEGMENTED_LANGUAGES:
        return sum(1 for c in text if not c.isspace())
    return len(text.split())


def corpus_summary(pairs: dict[str, list[EaclPair]]) -> dict:
    """Pair and token counts per language, shaped like a corpus statistics table."""
    return {
        lang: {"pairs": len(ps), "tokens": sum(count_tokens(p.first_sentence, lang) for p in ps)}
        for lang, ps in pairs.items()
    }
