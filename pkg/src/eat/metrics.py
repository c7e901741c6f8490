"""Translation-quality and NER evaluation metrics.

BLEU is unsmoothed: any zero n-gram precision yields 0. Bigram entropy sums over
distinct bigram types.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from .errors import AlignmentError


@dataclass(frozen=True)
class BleuReport:
    precisions: tuple[float, ...]
    brevity_penalty: float
    bleu: float


@dataclass(frozen=True)
class F1Report:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(candidate: Sequence[str], reference: Sequence[str], n: int) -> float:
    cand = ngram_counts(candidate, n)
    total = sum(cand.values())
    if total == 0:
        return 0.0
    ref = ngram_counts(reference, n)
    return sum(min(c, ref[g]) for g, c in cand.items()) / total


def brevity_penalty(cand_len: int, ref_len: int) -> float:
    if cand_len == 0:
        return 0.0
    if cand_len > ref_len:
        return 1.0
    return math.exp(1 - ref_len / cand_len)


def bleu(candidate: Sequence[str], reference: Sequence[str], max_n: int = 4) -> BleuReport:
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    candidate, reference = list(candidate), list(reference)
    precisions = tuple(modified_precision(candidate, reference, n) for n in range(1, max_n + 1))
    bp = brevity_penalty(len(candidate), len(reference))
    if bp == 0.0 or min(precisions) == 0.0:
        return BleuReport(precisions, bp, 0.0)
    score = bp * math.exp(math.fsum(math.log(p) for p in precisions) / max_n)
    return BleuReport(precisions, bp, min(score, 1.0))


def bigram_entropy(tokens: Sequence[str], base: float = 2.0) -> float:
    """Sum over bigram types (u, v) of P(u, v) * -log P(u | v).

    P(u | v) conditions on the following token: count(u, v) / count(*, v).
    """
    tokens = list(tokens)
    if len(tokens) < 2:
        return 0.0
    pairs = Counter(zip(tokens, tokens[1:]))
    total = len(tokens) - 1
    followers = Counter()
    for (_, v), c in pairs.items():
        followers[v] += c
    h = 0.0
    for (u, v), c in pairs.items():
        h -= (c / total) * math.log(c / followers[v], base)
    return h + 0.0


def entropy_loss(original: Sequence[str], round_trip: Sequence[str], base: float = 2.0) -> float:
    """H(round_trip) / H(original); 1.0 when both are 0, ``inf`` when only the original is."""
    h_orig = bigram_entropy(original, base)
    h_rt = bigram_entropy(round_trip, base)
    if h_orig == 0.0:
        return 1.0 if h_rt == 0.0 else math.inf
    return h_rt / h_orig


def micro_f1(gold: Sequence[Sequence[str]], pred: Sequence[Sequence[str]]) -> F1Report:
    """Token-level micro F1 over exact tag equality; ``O`` tokens never count as hits."""
    if len(gold) != len(pred):
        raise AlignmentError(f"{len(gold)} gold vs {len(pred)} predicted sentences", min(len(gold), len(pred)))
    tp = fp = fn = 0
    for sid, (g_tags, p_tags) in enumerate(zip(gold, pred)):
        if len(g_tags) != len(p_tags):
            raise AlignmentError(f"{len(g_tags)} gold vs {len(p_tags)} predicted tags", sid)
        for g, p in zip(g_tags, p_tags):
            if p == g:
                tp += g != "O"
                continue
            fp += p != "O"
            fn += g != "O"
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    # equals 2PR / (P + R), without the float detour
    f1 = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
    return F1Report(tp, fp, fn, precision, recall, f1)


def tokenize(line: str, chars: bool = False) -> list[str]:
    if chars:
        return [c for c in line if not c.isspace()]
    return line.split()


def metric_report(
    bleu_report: Optional[BleuReport] = None,
    entropy: Optional[float] = None,
    f1: Optional[F1Report] = None,
) -> str:
    """Serialize a MetricReport; ``inf`` entropy loss is written as the string ``"inf"``."""
    doc = {}
    if bleu_report is not None:
        doc["bleu"] = {
            "precisions": list(bleu_report.precisions),
            "bp": bleu_report.brevity_penalty,
            "score": bleu_report.bleu,
        }
    if entropy is not None:
        doc["entropy_loss"] = "inf" if math.isinf(entropy) else entropy
    if f1 is not None:
        doc["f1"] = asdict(f1)
    return json.dumps(doc, indent=2)
