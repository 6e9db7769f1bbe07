"""Independent oracles the suite checks the library against.

These deliberately re-derive results through different algorithms than the
implementations they verify: the numeral decoder scans right-to-left with
positional units, and the BM25 oracle scores every document exhaustively
from raw token counts instead of walking an inverted index.
"""

import math
from collections import Counter

from lexlab.corpus import Article
from lexlab.retrieval import tokenize

_DIGITS = {
    "零": 0, "〇": 0, "一": 1, "二": 2, "两": 2, "三": 3, "四": 4,
    "五": 5, "六": 6, "七": 7, "八": 8, "九": 9,
}
_UNITS = {"十": 10, "百": 100, "千": 1000}


def decode_chinese_numeral(text: str) -> int:
    """Right-to-left positional decode of a Chinese numeral."""
    total = 0
    pending_unit: int | None = None
    for ch in reversed(text):
        if ch in _UNITS:
            if pending_unit is not None:
                total += pending_unit
            pending_unit = _UNITS[ch]
        elif ch in _DIGITS:
            digit = _DIGITS[ch]
            if digit == 0:
                continue
            if pending_unit is not None:
                total += digit * pending_unit
                pending_unit = None
            else:
                total += digit
        else:
            raise ValueError(f"not a numeral character: {ch!r}")
    if pending_unit is not None:
        total += pending_unit
    return total


def brute_force_bm25(
    articles: list[Article], query: str, k1: float = 1.2, b: float = 0.75
) -> tuple[list, list[float]]:
    """Exhaustive BM25 over all documents; shares only the public tokenizer.

    Returns (keys ranked with the canonical-key tie-break, scores in
    document order). Per-document sums run over sorted unique query terms,
    the accumulation order the scoring contract fixes.
    """
    docs = sorted(articles, key=lambda a: a.key.sort_key())
    doc_tokens = [tokenize(a.text) for a in docs]
    n_docs = len(docs)
    lens = [len(toks) for toks in doc_tokens]
    total_len = sum(lens)
    avgdl = total_len / n_docs if total_len else 1.0
    df: Counter = Counter()
    for toks in doc_tokens:
        df.update(set(toks))
    query_counts = Counter(tokenize(query))
    scores = []
    for i, toks in enumerate(doc_tokens):
        tf = Counter(toks)
        score = 0.0
        for term in sorted(query_counts):
            if term not in tf:
                continue
            idf = math.log((n_docs - df[term] + 0.5) / (df[term] + 0.5) + 1.0)
            norm = k1 * (1 - b + b * lens[i] / avgdl)
            score += query_counts[term] * idf * (tf[term] * (k1 + 1)) / (tf[term] + norm)
        scores.append(score)
    ranking = sorted(range(n_docs), key=lambda i: (-scores[i], docs[i].key.sort_key()))
    return [docs[i].key for i in ranking], scores
