import pytest
from hypothesis import given, strategies as st

from eat.core import (
    DEFAULT_POLICY,
    EntitySpan,
    LabeledSentence,
    NormalizationPolicy,
    bio_from_spans,
    check_language,
    ground_span,
    spans_from_bio,
)
from eat.errors import BioError, OverlapError
from oracles import ground_oracle

TAGS = ["PER", "LOC", "ORG"]


@st.composite
def bio_sequences(draw, max_len=20):
    n = draw(st.integers(0, max_len))
    tags, prev = [], None
    for _ in range(n):
        choice = draw(st.sampled_from(["O", "B", "I"] if prev else ["O", "B"]))
        if choice == "O":
            tags.append("O")
            prev = None
        elif choice == "B":
            prev = draw(st.sampled_from(TAGS))
            tags.append(f"B-{prev}")
        else:
            tags.append(f"I-{prev}")
    return tags


def spans(*triples):
    return [EntitySpan(s, e, t) for s, e, t in triples]


@pytest.mark.parametrize("tags, expected", [
    (["B-PER", "I-PER", "O", "B-LOC"], [(0, 2, "PER"), (3, 4, "LOC")]),
    (["O", "O", "O"], []),
    (["B-ORG", "B-ORG"], [(0, 1, "ORG"), (1, 2, "ORG")]),
])
def test_spans_from_bio(tags, expected):
    assert [(s.start, s.end, s.tag) for s in spans_from_bio(tags)] == expected


def test_spans_from_sentence_carry_surface():
    x = LabeledSentence(["I", "love", "New", "York"], ["O", "O", "B-LOC", "I-LOC"])
    assert spans_from_bio(x)[0].surface == "New York"


@pytest.mark.parametrize("tags, index", [
    (["I-PER"], 0),
    (["O", "B-PER", "I-LOC"], 2),
    (["B-PER", "O", "I-PER"], 2),
    (["B-PER", "X"], 1),
])
def test_malformed_bio_names_index(tags, index):
    with pytest.raises(BioError) as err:
        spans_from_bio(tags)
    assert err.value.index == index


@pytest.mark.parametrize("n, triples, expected", [
    (4, [(0, 2, "PER")], ["B-PER", "I-PER", "O", "O"]),
    (3, [], ["O", "O", "O"]),
    (2, [(0, 1, "LOC"), (1, 2, "LOC")], ["B-LOC", "B-LOC"]),
])
def test_bio_from_spans(n, triples, expected):
    assert bio_from_spans(n, spans(*triples)) == expected


def test_bio_from_spans_rejects_overlap():
    with pytest.raises(OverlapError):
        bio_from_spans(4, spans((0, 2, "PER"), (1, 3, "LOC")))


def test_bio_from_spans_rejects_out_of_range():
    with pytest.raises(ValueError):
        bio_from_spans(2, spans((1, 3, "PER")))


@given(bio_sequences())
def test_bio_round_trip(tags):
    assert bio_from_spans(len(tags), spans_from_bio(tags)) == tags


def test_sentence_invariants():
    with pytest.raises(ValueError):
        LabeledSentence(["a", "b"], ["O"])
    with pytest.raises(BioError):
        LabeledSentence(["a"], ["I-PER"])
    with pytest.raises(ValueError):
        LabeledSentence(["a"], ["O"], language="zho")


@pytest.mark.parametrize("code", ["zh", "ja", "en"])
def test_language_ok(code):
    assert check_language(code) == code


@pytest.mark.parametrize("code", ["ZH", "z", "zho", "z1", ""])
def test_language_rejected(code):
    with pytest.raises(ValueError):
        check_language(code)


def test_entity_span_invariant():
    with pytest.raises(ValueError):
        EntitySpan(2, 2, "PER")


@pytest.mark.parametrize("candidate, tokens, expected", [
    ("New York", ["I", "love", "New", "York"], (2, 4)),
    ("Paris", ["我", "爱", "北", "京"], None),
    ("北京", ["我", "爱", "北", "京"], (2, 4)),
])
def test_ground_span_examples(candidate, tokens, expected):
    assert ground_span(candidate, tokens) == expected


def test_ground_span_leftmost_then_shortest():
    tokens = ["a", "b", "a", "b"]
    assert ground_span("a b", tokens) == (0, 2)
    assert ground_span("a", ["a", "a"]) == (0, 1)
    assert ground_span("a", ["b", "a", "a"]) == (1, 2)


def test_ground_span_respects_max_tokens():
    tokens = list("abcdef")
    assert ground_span("abcdef", tokens, max_span_tokens=5) is None
    assert ground_span("abcdef", tokens, max_span_tokens=6) == (0, 6)


def test_ground_span_normalizes_unicode_and_whitespace():
    decomposed = "Jose\u0301"
    assert ground_span(decomposed, ["Hola", "Jos\u00e9"]) == (1, 2)
    assert ground_span("  New   York ", ["New", "York"]) == (0, 2)


def test_ground_span_case_policy():
    tokens = ["visit", "PARIS"]
    assert ground_span("Paris", tokens) is None
    assert ground_span("Paris", tokens, NormalizationPolicy(case_sensitive=False)) == (1, 2)


def test_ground_span_empty_candidate():
    with pytest.raises(ValueError):
        ground_span("   ", ["a"])


@given(st.text(max_size=30), st.booleans())
def test_normalization_idempotent(s, case_sensitive):
    policy = NormalizationPolicy(case_sensitive=case_sensitive)
    once = policy.normalize(s)
    assert policy.normalize(once) == once


alphabet = st.sampled_from(["北", "京", "a", "b", "New", "York", "\u00e9", "e\u0301"])


@given(st.lists(alphabet, min_size=1, max_size=8), st.lists(alphabet, min_size=1, max_size=3), st.booleans())
def test_ground_span_matches_oracle(tokens, cand_tokens, spaced):
    candidate = (" " if spaced else "").join(cand_tokens)
    got = ground_span(candidate, tokens)
    assert got == ground_oracle(candidate, tokens, DEFAULT_POLICY.normalize)
    if got is not None:
        i, j = got
        target = DEFAULT_POLICY.normalize(candidate)
        joins = {DEFAULT_POLICY.normalize(" ".join(tokens[i:j])), DEFAULT_POLICY.normalize("".join(tokens[i:j]))}
        assert target in joins
        assert ground_span(candidate, tokens) == got
