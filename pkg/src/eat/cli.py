"""``eat`` command line: run, record, eval, translate-metrics, build-eacl.

Exit codes: 0 success, 1 config error, 2 data error, 3 backend/replay error,
4 partial network failure. Credentials come from EAT_API_KEY, EAT_API_BASE and
EAT_WIKI_UA only.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import httpx

from . import metrics
from .core import DEFAULT_TAGS, check_language
from .corpus_io import DEFAULT_INSTRUCTION, parse_bio_file, write_sharegpt
from .eacl import RecordingTransport, ReplayTransport, WikiClient, build_corpus, corpus_summary
from .errors import BackendError, DataFormatError, EatError, ReplayMissError
from .extractor import DictionaryEngine, LlmEngine
from .llm import DEFAULT_PARAMS, OpenAIBackend, RecordingBackend, ReplayBackend, load_templates
from .pipeline import PipelineConfig, run, write_run
from .store import FixtureStore
from .translation import DEFAULT_ROUNDS, MAX_ROUNDS

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_BACKEND, EXIT_PARTIAL = 0, 1, 2, 3, 4

logger = logging.getLogger("eat")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    input: Path
    language: str
    backend: str
    out: Path
    fixtures: Optional[Path] = None
    backend_id: Optional[str] = None
    model: Optional[str] = None
    templates: Optional[Path] = None
    rounds: int = DEFAULT_ROUNDS
    engine: str = "llm"
    dictionary: Optional[Path] = None
    parallelism: Optional[int] = None
    tags: tuple = DEFAULT_TAGS
    params: dict = field(default_factory=lambda: dict(DEFAULT_PARAMS))

    def validate(self):
        try:
            check_language(self.language)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not 1 <= self.rounds <= MAX_ROUNDS:
            raise ConfigError(f"--rounds must be in 1..{MAX_ROUNDS}")
        if self.parallelism is not None and self.parallelism < 1:
            raise ConfigError("--parallelism must be >= 1")
        if not self.input.is_file():
            raise ConfigError(f"input file {self.input} not found")
        if self.backend == "replay":
            if self.fixtures is None or not self.fixtures.is_dir():
                raise ConfigError("replay mode requires an existing --fixtures directory")
            if not (self.backend_id or self.model):
                raise ConfigError("replay mode requires --backend-id or --model")
        if self.backend in ("live", "record"):
            if not self.model:
                raise ConfigError(f"{self.backend} mode requires --model")
            if not os.environ.get("EAT_API_BASE"):
                raise ConfigError(f"{self.backend} mode requires EAT_API_BASE in the environment")
            if self.backend == "record" and self.fixtures is None:
                raise ConfigError("record mode requires --fixtures")
        if self.engine == "dictionary" and (self.dictionary is None or not self.dictionary.is_file()):
            raise ConfigError("dictionary engine requires an existing --dictionary file")

    def build_backend(self):
        if self.backend == "replay":
            return ReplayBackend(FixtureStore(self.fixtures), self.backend_id or f"openai:{self.model}")
        live = OpenAIBackend(self.model)
        if self.backend == "record":
            return RecordingBackend(live, FixtureStore(self.fixtures, create=True))
        return live


def _run_config(args, backend_mode) -> RunConfig:
    params = dict(DEFAULT_PARAMS)
    if args.temperature is not None:
        params["temperature"] = args.temperature
    if args.max_tokens is not None:
        params["max_tokens"] = args.max_tokens
    return RunConfig(
        input=Path(args.input), language=args.lang, backend=backend_mode, out=Path(args.out),
        fixtures=Path(args.fixtures) if args.fixtures else None, backend_id=args.backend_id,
        model=args.model, templates=Path(args.templates) if args.templates else None,
        rounds=args.rounds, engine=args.engine,
        dictionary=Path(args.dictionary) if args.dictionary else None,
        parallelism=args.parallelism, tags=tuple(args.tags.split(",")), params=params,
    )


def cmd_run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        overrides = json.loads(cfg.templates.read_text(encoding="utf-8")) if cfg.templates else None
        templates = load_templates(overrides)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        dataset = parse_bio_file(cfg.input.read_bytes(), cfg.language, cfg.tags)
    except DataFormatError as exc:
        print(f"data error: {cfg.input}: {exc}", file=sys.stderr)
        return EXIT_DATA

    backend = cfg.build_backend()
    engine = (DictionaryEngine.from_file(cfg.dictionary, cfg.tags) if cfg.engine == "dictionary"
              else LlmEngine(backend, cfg.params))
    pcfg = PipelineConfig(
        backend=backend, engine=engine, language=cfg.language, templates=templates,
        rounds=cfg.rounds, tags=cfg.tags, params=cfg.params, parallelism=cfg.parallelism,
        strict_replay=cfg.backend == "replay",
    )
    try:
        outcomes, manifest = run(dataset, pcfg, str(cfg.input))
    except ReplayMissError as exc:
        print(f"replay miss: digest {exc.digest}", file=sys.stderr)
        return EXIT_BACKEND
    write_run(cfg.out, dataset, outcomes, manifest)
    print(f"sentences: {manifest.sentences} failures: {manifest.failures}")
    return EXIT_OK


def _read_split(path, lang, tags):
    return parse_bio_file(Path(path).read_bytes(), lang, tags)


def cmd_eval(gold_path, pred_path, lang: str = "xx", tags=DEFAULT_TAGS) -> int:
    try:
        gold = _read_split(gold_path, lang, tags)
        pred = _read_split(pred_path, lang, tags)
        report = metrics.micro_f1([s.tags for s in gold], [s.tags for s in pred])
    except (OSError, EatError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    for g, p in zip(gold, pred):
        if g.tokens != p.tokens:
            print(f"data error: sentence {g.id}: tokens differ between files", file=sys.stderr)
            return EXIT_DATA
    print(metrics.metric_report(f1=report))
    return EXIT_OK


def cmd_translate_metrics(original_path, roundtrip_path, chars: bool = False, max_n: int = 4) -> int:
    try:
        originals = Path(original_path).read_text(encoding="utf-8").splitlines()
        roundtrips = Path(roundtrip_path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if len(originals) != len(roundtrips):
        print(f"data error: {len(originals)} original lines vs {len(roundtrips)} round-trip lines",
              file=sys.stderr)
        return EXIT_DATA

    rows = []
    for i, (orig, rt) in enumerate(zip(originals, roundtrips)):
        ref, cand = metrics.tokenize(orig, chars), metrics.tokenize(rt, chars)
        b = metrics.bleu(cand, ref, max_n)
        le = metrics.entropy_loss(ref, cand)
        rows.append({"line": i, "bleu": b.bleu, "bp": b.brevity_penalty,
                     "precisions": list(b.precisions), "entropy_loss": "inf" if math.isinf(le) else le})
    finite = [r["entropy_loss"] for r in rows if r["entropy_loss"] != "inf"]
    summary = {
        "sentences": len(rows),
        "mean_bleu": sum(r["bleu"] for r in rows) / len(rows) if rows else 0.0,
        "mean_entropy_loss": sum(finite) / len(finite) if finite else None,
        "infinite_entropy_loss": len(rows) - len(finite),
        "per_sentence": rows,
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_build_eacl(entities_path, langs, out_dir, fixtures=None, record_to=None,
                   state_path=None, rate: float = 10.0, max_retries: int = 3,
                   template: str = DEFAULT_INSTRUCTION) -> int:
    try:
        languages = [check_language(a) for a in langs]
        entities = [e.strip() for e in Path(entities_path).read_text(encoding="utf-8").splitlines() if e.strip()]
        transport = None
        if fixtures:
            transport = ReplayTransport(FixtureStore(fixtures))
        elif record_to:
            transport = RecordingTransport(httpx.HTTPTransport(), FixtureStore(record_to, create=True))
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    client = WikiClient(transport=transport, rate=rate, max_retries=max_retries)
    state_path = state_path or out / "harvest_state.json"
    try:
        pairs, state = build_corpus(entities, languages, client, state_path=state_path)
    except ReplayMissError as exc:
        print(f"replay miss: digest {exc.digest}", file=sys.stderr)
        return EXIT_BACKEND
    for lang, ps in pairs.items():
        (out / f"eacl_{lang}.json").write_text(write_sharegpt(ps, template), encoding="utf-8")
    summary = corpus_summary(pairs)
    (out / "counts.json").write_text(json.dumps(summary, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    for lang, row in summary.items():
        print(f"{lang}\tpairs={row['pairs']}\ttokens={row['tokens']}")
    if state.failed:
        print(f"{len(state.failed)} entit(y/ies) failed after retries", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _add_run_args(p: argparse.ArgumentParser, with_backend: bool):
    p.add_argument("--input", required=True, help="BIO column file to tag")
    p.add_argument("--lang", required=True, help="ISO 639-1 code of the input language")
    if with_backend:
        p.add_argument("--backend", choices=["live", "replay", "record"], default="replay")
    p.add_argument("--fixtures", help="fixture store directory (replay/record)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--model", help="model name sent to the chat endpoint")
    p.add_argument("--backend-id", help="backend id recorded in fixtures (default openai:<model>)")
    p.add_argument("--templates", help="JSON object overriding prompt template bodies by id")
    p.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS, help="chain-of-thought rounds before the filter call")
    p.add_argument("--engine", choices=["llm", "dictionary"], default="llm")
    p.add_argument("--dictionary", help="surface<TAB>TAG file for the dictionary engine")
    p.add_argument("--parallelism", type=int, help="concurrent sentences")
    p.add_argument("--tags", default=",".join(DEFAULT_TAGS), help="comma-separated tag set")
    p.add_argument("--temperature", type=float)
    p.add_argument("--max-tokens", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eat", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_args(sub.add_parser("run", help="tag a dataset with the dual-translation pipeline"), True)
    _add_run_args(sub.add_parser("record", help="run against a live backend, recording fixtures"), False)

    p = sub.add_parser("eval", help="token-level micro F1 of predictions against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--tags", default=",".join(DEFAULT_TAGS))

    p = sub.add_parser("translate-metrics", help="BLEU and entropy loss of round-trip translations")
    p.add_argument("--original", required=True, help="one original sentence per line")
    p.add_argument("--roundtrip", required=True, help="one round-trip sentence per line")
    p.add_argument("--chars", action="store_true", help="tokenize per character")
    p.add_argument("--max-n", type=int, default=4)

    p = sub.add_parser("build-eacl", help="harvest the entity-aligned corpus from Wikipedia")
    p.add_argument("--entities", required=True, help="one English entity title per line")
    p.add_argument("--langs", required=True, help="comma-separated language codes")
    p.add_argument("--out", required=True)
    p.add_argument("--fixtures", help="replay HTTP responses from this fixture store")
    p.add_argument("--record", dest="record_to", help="record live HTTP responses into this store")
    p.add_argument("--state", help="resumable harvest state file (default <out>/harvest_state.json)")
    p.add_argument("--rate", type=float, default=10.0, help="request ceiling per second")
    p.add_argument("--max-retries", type=int, default=3)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command in ("run", "record"):
        try:
            cfg = _run_config(args, "record" if args.command == "record" else args.backend)
        except ValueError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        try:
            return cmd_run(cfg)
        except BackendError as exc:
            print(f"backend error: {exc}", file=sys.stderr)
            return EXIT_BACKEND
    if args.command == "eval":
        return cmd_eval(args.gold, args.pred, tags=tuple(args.tags.split(",")))
    if args.command == "translate-metrics":
        return cmd_translate_metrics(args.original, args.roundtrip, args.chars, args.max_n)
    return cmd_build_eacl(args.entities, args.langs.split(","), args.out, args.fixtures,
                          args.record_to, args.state, args.rate, args.max_retries)


if __name__ == "__main__":
    sys.exit(main())
