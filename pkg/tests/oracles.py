"""Brute-force reference computations, deliberately naive and independent of eat.*."""

import math


def _grams(tokens, n):
    out = []
    for i in range(len(tokens)):
        if i + n <= len(tokens):
            out.append(tuple(tokens[i:i + n]))
    return out


def bleu_oracle(candidate, reference, max_n=4):
    """Returns (precisions, bp, bleu) by direct enumeration."""
    precisions = []
    for n in range(1, max_n + 1):
        cand = _grams(candidate, n)
        ref = _grams(reference, n)
        if not cand:
            precisions.append(0.0)
            continue
        clipped = 0
        for g in set(cand):
            clipped += min(cand.count(g), ref.count(g))
        precisions.append(clipped / len(cand))
    lc, lr = len(candidate), len(reference)
    if lc == 0:
        return precisions, 0.0, 0.0
    bp = 1.0 if lc > lr else math.exp(1 - lr / lc)
    product = 1.0
    for p in precisions:
        product *= p
    if product == 0:
        return precisions, bp, 0.0
    return precisions, bp, bp * product ** (1.0 / max_n)


def entropy_oracle(tokens, log=math.log2):
    """Bigram entropy by explicit tabulation over distinct pairs."""
    if len(tokens) < 2:
        return 0.0
    pairs = [(tokens[i - 1], tokens[i]) for i in range(1, len(tokens))]
    h = 0.0
    for pair in sorted(set(pairs)):
        joint = pairs.count(pair) / len(pairs)
        same_follower = [p for p in pairs if p[1] == pair[1]]
        cond = pairs.count(pair) / len(same_follower)
        h += joint * -log(cond)
    return h


def ground_oracle(candidate, tokens, normalize, max_span_tokens=10):
    """All matching spans, then the lexicographically smallest (start, end)."""
    target = normalize(candidate)
    matches = []
    for i in range(len(tokens)):
        for j in range(i + 1, len(tokens) + 1):
            if j - i > max_span_tokens:
                continue
            joins = {normalize(" ".join(tokens[i:j])), normalize("".join(tokens[i:j]))}
            if target in joins:
                matches.append((i, j))
    return min(matches) if matches else None


def f1_oracle(gold, pred):
    rows = []
    for g_sent, p_sent in zip(gold, pred):
        for g, p in zip(g_sent, p_sent):
            rows.append((g, p))
    tp = len([1 for g, p in rows if g == p and g != "O"])
    fp = len([1 for g, p in rows if p != "O" and p != g])
    fn = len([1 for g, p in rows if g != "O" and p != g])
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return tp, fp, fn, f1
