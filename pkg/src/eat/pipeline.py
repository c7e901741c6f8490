"""Per-sentence orchestration: translate, extract, translate back, ground, tag."""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .core import (
    DEFAULT_MAX_SPAN_TOKENS,
    DEFAULT_POLICY,
    DEFAULT_TAGS,
    EntitySpan,
    LabeledSentence,
    NormalizationPolicy,
    bio_from_spans,
    ground_span,
)
from .corpus_io import DatasetSplit, write_predictions
from .errors import EatError, ReplayMissError
from .extractor import DEFAULT_PREFIX, build_input, extract
from .llm import DEFAULT_PARAMS, DEFAULT_TEMPLATES, PromptTemplate
from .translation import (
    DEFAULT_ROUNDS,
    BackwardResult,
    ForwardResult,
    backward_translate,
    check_rounds,
    forward_translate,
)

NO_SPAN_MATCH = "no span match"
OVERLAP = "overlaps a kept span"


@dataclass
class PipelineConfig:
    backend: object
    engine: object
    language: str
    templates: Mapping[str, PromptTemplate] = field(default_factory=lambda: dict(DEFAULT_TEMPLATES))
    rounds: int = DEFAULT_ROUNDS
    tags: tuple = DEFAULT_TAGS
    prefix: str = DEFAULT_PREFIX
    policy: NormalizationPolicy = DEFAULT_POLICY
    max_span_tokens: int = DEFAULT_MAX_SPAN_TOKENS
    params: dict = field(default_factory=lambda: dict(DEFAULT_PARAMS))
    parallelism: Optional[int] = None
    strict_replay: bool = True

    def __post_init__(self):
        check_rounds(self.rounds)
        missing = {"p1t", "p2t", "pf", "p1e", "p2e"} - set(self.templates)
        if missing:
            raise ValueError(f"missing templates: {sorted(missing)}")
        if self.parallelism is not None and self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")

    def workers(self) -> int:
        if self.parallelism is not None:
            return self.parallelism
        n = os.cpu_count() or 1
        cap = getattr(self.backend, "max_in_flight", None)
        return min(n, cap) if cap else n


@dataclass(frozen=True)
class Dropped:
    surface: str
    tag: str
    reason: str
    candidate: Optional[str] = None


@dataclass
class SentenceOutcome:
    sentence_id: int
    predicted_tags: list
    grounded: list = field(default_factory=list)
    dropped: list = field(default_factory=list)
    forward: Optional[ForwardResult] = None
    backward: list = field(default_factory=list)
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class RunManifest:
    dataset: str
    language: str
    backend_id: str
    template_digests: dict
    rounds: int
    engine_id: str
    sentences: int = 0
    failures: int = 0
    started: str = ""
    finished: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def resolve_overlaps(spans: Sequence[EntitySpan]) -> list[EntitySpan]:
    """Greedy sweep by (start, longest first, extraction order); keeps non-overlapping spans."""
    order = sorted(range(len(spans)), key=lambda i: (spans[i].start, -len(spans[i]), i))
    kept: list[EntitySpan] = []
    for i in order:
        if not any(spans[i].overlaps(k) for k in kept):
            kept.append(spans[i])
    return sorted(kept)


def process_sentence(x: LabeledSentence, cfg: PipelineConfig) -> SentenceOutcome:
    """Run every stage for one sentence. Stage errors propagate to the caller."""
    forward = forward_translate(x, cfg.language, cfg.backend, cfg.templates, cfg.rounds, cfg.params)
    answer = extract(build_input(forward.english_text, cfg.tags, cfg.prefix), cfg.engine)

    candidates: list[EntitySpan] = []
    backward: list[BackwardResult] = []
    dropped: list[Dropped] = []
    for entity in answer.entities:
        result = backward_translate(entity, x, cfg.language, cfg.backend, cfg.templates, cfg.rounds, cfg.params)
        backward.append(result)
        bounds = ground_span(result.candidate_text, x, cfg.policy, cfg.max_span_tokens)
        if bounds is None:
            dropped.append(Dropped(entity.surface, entity.tag, NO_SPAN_MATCH, result.candidate_text))
            continue
        candidates.append(EntitySpan(*bounds, entity.tag, cfg.policy.normalize(result.candidate_text)))

    grounded = resolve_overlaps(candidates)
    kept = {id(s) for s in grounded}
    for span in candidates:
        if id(span) not in kept:
            dropped.append(Dropped(span.surface, span.tag, OVERLAP, span.surface))
    return SentenceOutcome(
        sentence_id=x.id,
        predicted_tags=bio_from_spans(len(x), grounded),
        grounded=grounded,
        dropped=dropped,
        forward=forward,
        backward=backward,
    )


def _replay_miss(exc: BaseException) -> Optional[ReplayMissError]:
    while exc is not None:
        if isinstance(exc, ReplayMissError):
            return exc
        exc = exc.__cause__
    return None


def _contained(x: LabeledSentence, cfg: PipelineConfig) -> SentenceOutcome:
    try:
        return process_sentence(x, cfg)
    except EatError as exc:
        miss = _replay_miss(exc)
        if miss is not None and cfg.strict_replay:
            raise miss
        return SentenceOutcome(x.id, ["O"] * len(x), error=str(exc))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def template_digests(templates: Mapping[str, PromptTemplate]) -> dict:
    return {k: hashlib.sha256(t.body.encode("utf-8")).hexdigest()[:16] for k, t in sorted(templates.items())}


def run(dataset: DatasetSplit, cfg: PipelineConfig, dataset_path: str = "") -> tuple[list[SentenceOutcome], RunManifest]:
    """Process every sentence with bounded parallelism; outcomes keep input order.

    In strict-replay mode a fixture miss aborts the run by raising ReplayMissError.
    """
    manifest = RunManifest(
        dataset=str(dataset_path),
        language=cfg.language,
        backend_id=cfg.backend.backend_id,
        template_digests=template_digests(cfg.templates),
        rounds=cfg.rounds,
        engine_id=cfg.engine.engine_id,
        started=_now(),
    )
    sentences = list(dataset.sentences)
    workers = cfg.workers()
    if workers == 1 or len(sentences) <= 1:
        outcomes = [_contained(x, cfg) for x in sentences]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda x: _contained(x, cfg), sentences))
    manifest.sentences = len(outcomes)
    manifest.failures = sum(o.failed for o in outcomes)
    manifest.finished = _now()
    return outcomes, manifest


def dropped_log(outcomes: Sequence[SentenceOutcome]) -> str:
    lines = []
    for o in outcomes:
        for d in o.dropped:
            lines.append(f"{o.sentence_id}\t{d.surface}\t{d.reason}\n")
        if o.error:
            lines.append(f"{o.sentence_id}\t\tsentence failed: {o.error}\n")
    return "".join(lines)


def write_run(out_dir, dataset: DatasetSplit, outcomes, manifest: RunManifest) -> dict:
    """Write predictions, manifest and dropped-entity log; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "predictions": out / "predictions.bio",
        "manifest": out / "manifest.json",
        "dropped": out / "dropped.tsv",
    }
    paths["predictions"].write_bytes(write_predictions(dataset, [o.predicted_tags for o in outcomes]))
    paths["manifest"].write_text(manifest.to_json(), encoding="utf-8")
    paths["dropped"].write_text(dropped_log(outcomes), encoding="utf-8")
    return paths
