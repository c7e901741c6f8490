"""Regenerate the committed test fixtures.

* tests/fixtures/llm_store: replies of a scripted mock LLM, recorded through
  RecordingBackend exactly as a live session would be.
* tests/fixtures/zh_e2e.bio, ko_e2e.bio: gold-tagged input sentences.
* tests/fixtures/wiki_store: Wikipedia API responses (hand-written, stored in the
  same digest-keyed format the RecordingTransport produces).

Run from the repo root: ``python scripts/make_fixtures.py``. Prompt template
changes alter digests, so rerun this after editing the default templates.
"""

import re
import shutil
from pathlib import Path
from urllib.parse import quote

import httpx

from eat.corpus_io import parse_bio_file
from eat.eacl import request_digest, request_key
from eat.extractor import LlmEngine
from eat.llm import CallableBackend, RecordingBackend
from eat.pipeline import PipelineConfig, run
from eat.store import FixtureStore

ROOT = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
BACKEND_ID = "mock:scripted"

# (sentence, english translation, [(english surface, tag, target surface)])
ZH = [
    ("高明在北京工作。", "Gao Ming works in Beijing.", [("Gao Ming", "PER", "高明"), ("Beijing", "LOC", "北京")]),
    ("李娜出生于武汉。", "Li Na was born in Wuhan.", [("Li Na", "PER", "李娜"), ("Wuhan", "LOC", "武汉")]),
    ("清华大学位于北京。", "Tsinghua University is located in Beijing.",
     [("Tsinghua University", "ORG", "清华大学"), ("Beijing", "LOC", "北京")]),
    ("今天天气很好。", "The weather is nice today.", []),
    ("姚明曾效力于休斯顿火箭队。", "Yao Ming once played for the Houston Rockets.",
     [("Yao Ming", "PER", "姚明"), ("Houston Rockets", "ORG", "休斯顿火箭队")]),
    ("长江流经上海。", "The Yangtze River flows through Shanghai.",
     [("Yangtze River", "LOC", "长江"), ("Shanghai", "LOC", "上海")]),
    ("联合国总部设在纽约。", "The headquarters of the United Nations is in New York.",
     [("United Nations", "ORG", "联合国"), ("New York", "LOC", "纽约")]),
    ("鲁迅是浙江绍兴人。", "Lu Xun was a native of Shaoxing, Zhejiang.",
     [("Lu Xun", "PER", "鲁迅"), ("Shaoxing", "LOC", "绍兴"), ("Zhejiang", "LOC", "浙江")]),
    ("华为公司总部在深圳。", "Huawei's headquarters is in Shenzhen.",
     [("Huawei", "ORG", "华为公司"), ("Shenzhen", "LOC", "深圳")]),
    ("王芳和张伟访问了东京。", "Wang Fang and Zhang Wei visited Tokyo.",
     [("Wang Fang", "PER", "王芳"), ("Zhang Wei", "PER", "张伟"), ("Tokyo", "LOC", "东京")]),
]

KO = [
    (["서울", "은", "한국", "의", "수도", "이다", "."], "Seoul is the capital of South Korea.",
     [("Seoul", "LOC", "서울"), ("South Korea", "LOC", "한국")]),
]


def bio_lines(tokens, entities, joiner):
    tags = ["O"] * len(tokens)
    for _, tag, target in entities:
        for i in range(len(tokens)):
            for j in range(i + 1, len(tokens) + 1):
                if joiner.join(tokens[i:j]) == target and all(t == "O" for t in tags[i:j]):
                    tags[i] = f"B-{tag}"
                    tags[i + 1:j] = [f"I-{tag}"] * (j - i - 1)
                    break
            else:
                continue
            break
        else:
            raise ValueError(f"{target} not found in {tokens}")
    return "".join(f"{t}\t{g}\n" for t, g in zip(tokens, tags)) + "\n"


def make_mock():
    by_text = {}
    for text, english, ents in ZH:
        by_text[text] = (english, ents)
    for tokens, english, ents in KO:
        by_text[" ".join(tokens)] = (english, ents)
    by_english = {english: ents for english, ents in by_text.values()}

    def find_sentence(prompt):
        for text in sorted(by_text, key=len, reverse=True):
            if text in prompt:
                return text
        raise KeyError(prompt)

    def reply(transcript):
        first = transcript.turns[0].text
        last = transcript.turns[-1].text
        n_user = sum(t.role == "user" for t in transcript.turns)

        if last.startswith("PREFIX:"):
            english = last.rsplit("SENTENCE: ", 1)[1]
            ents = by_english[english]
            return "; ".join(f"{tag}: {en}" for en, tag, _ in ents) if ents else "none"

        text = find_sentence(first)
        english, ents = by_text[text]
        m = re.search(r'entity "([^"]+)"', first)
        if m is None:
            if "Output only the final answer" in last:
                return english
            if n_user == 1:
                if not ents:
                    return "The sentence does not appear to contain any named entities."
                return "The sentence probably contains:\n" + "\n".join(
                    f"- {target}: {en}, a {tag} name" for en, tag, target in ents)
            return f"Translation: {english}"

        entity = m.group(1)
        target = next(t for en, _, t in ents if en == entity)
        if "Output only the final answer" in last:
            # exercise quote stripping on every other entity
            return f"“{target}”" if len(entity) % 2 else target
        if n_user == 1:
            return f'"{entity}" is written "{target}" in this language, and "{target}" appears in the sentence.'
        return f'Checked: "{target}" appears verbatim in the sentence.'

    return CallableBackend(reply, BACKEND_ID)


def make_llm_store():
    store_dir = ROOT / "llm_store"
    shutil.rmtree(store_dir, ignore_errors=True)
    store = FixtureStore(store_dir, create=True)
    backend = RecordingBackend(make_mock(), store)

    zh = "".join(bio_lines(list(text), ents, "") for text, _, ents in ZH)
    ko = "".join(bio_lines(tokens, ents, " ") for tokens, _, ents in KO)
    (ROOT / "zh_e2e.bio").write_text(zh, encoding="utf-8")
    (ROOT / "ko_e2e.bio").write_text(ko, encoding="utf-8")

    for lang, content in (("zh", zh), ("ko", ko)):
        split = parse_bio_file(content.encode("utf-8"), lang)
        cfg = PipelineConfig(backend=backend, engine=LlmEngine(backend), language=lang, parallelism=1)
        outcomes, _ = run(split, cfg)
        assert not any(o.failed for o in outcomes), [o.error for o in outcomes]
    print(f"llm_store: {len(store)} recorded replies")


SUMMARIES = {
    ("ja", "ドイツ"): "ドイツ連邦共和国（ドイツれんぽうきょうわこく、独: Bundesrepublik Deutschland）、通称ドイツは、中央ヨーロッパ西部に位置する連邦共和制国家。首都はベルリン。",
    ("zh", "德国"): "德国，全称德意志联邦共和国，是位于中欧的联邦议会共和制国家。首都为柏林。",
    ("ja", "日本"): "日本国（にっぽんこく、にほんこく）、または日本（にっぽん、にほん）は、東アジアに位置する民主制国家。首都は東京都。",
    ("zh", "日本"): "日本国，通称日本，是位于东亚的岛国。",
    ("ja", "ビル・クリントン"): "ウィリアム・ジェファーソン・クリントン（英語: William Jefferson Clinton、1946年8月19日 - ）は、アメリカ合衆国の政治家。通称はビル・クリントン。",
    ("zh", "比尔·克林顿"): "威廉·杰斐逊·克林顿（英语：William Jefferson Clinton，1946年8月19日－），通称比尔·克林顿，美国政治家。曾任美国总统。",
}

LANGLINKS = {
    "Germany": {"ja": "ドイツ", "zh": "德国", "de": "Deutschland"},
    "Japan": {"ja": "日本", "zh": "日本", "de": "Japan"},
    "Bill Clinton": {"ja": "ビル・クリントン", "zh": "比尔·克林顿"},
    "Example Village": {"de": "Beispieldorf"},
}
MISSING = ["Xyzzy Nonexistent Page"]
WIKI_ENTITIES = ["Germany", "Japan", "Bill Clinton", "Xyzzy Nonexistent Page", "Example Village"]


def langlinks_params(entity):
    return {
        "action": "query", "prop": "langlinks", "titles": entity, "lllimit": "max",
        "redirects": "1", "format": "json", "formatversion": "2",
    }


def put(store, request, status, body):
    store.put(request_digest(request), request_key(request), {"status": status, "body": body})


def make_wiki_store():
    store_dir = ROOT / "wiki_store"
    shutil.rmtree(store_dir, ignore_errors=True)
    store = FixtureStore(store_dir, create=True)
    api = "https://en.wikipedia.org/w/api.php"
    for i, (entity, links) in enumerate(LANGLINKS.items()):
        page = {"pageid": 1000 + i, "ns": 0, "title": entity,
                "langlinks": [{"lang": k, "title": v} for k, v in sorted(links.items())]}
        put(store, httpx.Request("GET", api, params=langlinks_params(entity)), 200,
            {"batchcomplete": True, "query": {"pages": [page]}})
    for entity in MISSING:
        put(store, httpx.Request("GET", api, params=langlinks_params(entity)), 200,
            {"batchcomplete": True, "query": {"pages": [{"ns": 0, "title": entity, "missing": True}]}})
    for (lang, title), extract in SUMMARIES.items():
        url = f"https://{lang}.wikipedia.org/api/rest_v1/page/summary/{quote(title.replace(' ', '_'), safe='')}"
        put(store, httpx.Request("GET", url), 200, {"type": "standard", "title": title, "extract": extract})
    (ROOT / "wiki_entities.txt").write_text("\n".join(WIKI_ENTITIES) + "\n", encoding="utf-8")
    print(f"wiki_store: {len(store)} recorded responses")


if __name__ == "__main__":
    ROOT.mkdir(parents=True, exist_ok=True)
    make_llm_store()
    make_wiki_store()
