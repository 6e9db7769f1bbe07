"""Lexical article retrieval, recall metrics and distractor sampling.

Scoring is BM25 (k1=1.2, b=0.75) over a mixed tokenization: character
bigrams for CJK runs, lowercased whitespace/punctuation-split tokens for
Latin runs. A neural scorer can replace the lexical one behind the same
ArticleScorer contract.
"""

import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

from .corpus import Article, ArticleIndex, CitationKey
from .errors import EmptyCorpus, EmptyQuery, InsufficientCorpus, NoData

BM25_K1 = 1.2
BM25_B = 0.75

_CJK_RANGES = (
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
)


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def tokenize(text: str) -> list[str]:
    """CJK runs become character bigrams, Latin runs lowercase words.

    A single-character CJK run yields that character itself; anything that
    is neither CJK nor alphanumeric separates runs.
    """
    tokens: list[str] = []
    cjk_run: list[str] = []
    word_run: list[str] = []

    def flush_cjk():
        if not cjk_run:
            return
        if len(cjk_run) == 1:
            tokens.append(cjk_run[0])
        else:
            tokens.extend(cjk_run[i] + cjk_run[i + 1] for i in range(len(cjk_run) - 1))
        cjk_run.clear()

    def flush_word():
        if word_run:
            tokens.append("".join(word_run).lower())
            word_run.clear()

    for ch in text:
        if _is_cjk(ch):
            flush_word()
            cjk_run.append(ch)
        elif ch.isalnum():
            flush_cjk()
            word_run.append(ch)
        else:
            flush_cjk()
            flush_word()
    flush_cjk()
    flush_word()
    return tokens


@dataclass
class RetrievalResult:
    """Ranked articles for one query; scores non-increasing, keys distinct."""

    query: str
    ranked: list[tuple[CitationKey, float]]

    def keys(self) -> list[CitationKey]:
        return [key for key, _ in self.ranked]


@dataclass
class GoldAnnotation:
    """Up to three annotated necessary articles for a query."""

    query: str
    gold_keys: frozenset[CitationKey]

    def __post_init__(self):
        self.gold_keys = frozenset(self.gold_keys)
        if not 1 <= len(self.gold_keys) <= 3:
            raise ValueError(f"gold_keys must have 1..3 entries, got {len(self.gold_keys)}")


class ArticleScorer(Protocol):
    """Contract a drop-in (e.g. embedding-based) scorer must satisfy."""

    def doc_keys(self) -> Sequence[CitationKey]:
        """All scoreable article keys in canonical order."""

    def score_all(self, query: str) -> list[float]:
        """Scores aligned with doc_keys(); raises EmptyQuery if applicable."""


class LexicalIndex:
    """BM25 inverted index over an article corpus.

    Documents are ordered by canonical citation key, which also provides
    the deterministic tie-break at equal score.
    """

    def __init__(
        self,
        articles: Sequence[Article],
        k1: float = BM25_K1,
        b: float = BM25_B,
        tokenizer: Callable[[str], list[str]] = tokenize,
    ):
        if not articles:
            raise EmptyCorpus("cannot build a lexical index over zero articles")
        self.k1 = k1
        self.b = b
        self._tokenize = tokenizer
        self._articles = sorted(articles, key=lambda a: a.key.sort_key())
        self._keys = [a.key for a in self._articles]
        self._doc_tokens = [tokenizer(a.text) for a in self._articles]
        self._doc_lens = [len(toks) for toks in self._doc_tokens]
        self._n_docs = len(self._articles)
        total = sum(self._doc_lens)
        self._avgdl = (total / self._n_docs) if total else 1.0
        self._postings: dict[str, dict[int, int]] = {}
        for doc_id, toks in enumerate(self._doc_tokens):
            for term, tf in Counter(toks).items():
                self._postings.setdefault(term, {})[doc_id] = tf
        self._idf = {
            term: math.log((self._n_docs - len(docs) + 0.5) / (len(docs) + 0.5) + 1.0)
            for term, docs in self._postings.items()
        }

    @classmethod
    def build(
        cls,
        index: ArticleIndex,
        k1: float = BM25_K1,
        b: float = BM25_B,
        tokenizer: Callable[[str], list[str]] = tokenize,
    ) -> "LexicalIndex":
        return cls(index.articles(), k1=k1, b=b, tokenizer=tokenizer)

    def doc_keys(self) -> list[CitationKey]:
        return list(self._keys)

    def article_at(self, doc_id: int) -> Article:
        return self._articles[doc_id]

    def score_all(self, query: str) -> list[float]:
        """BM25 scores for every document, in doc_keys() order.

        Per-document sums run over sorted unique query terms so that any
        exhaustive re-implementation of the formula lands on bit-identical
        floats.
        """
        query_terms = Counter(self._tokenize(query))
        if not query_terms:
            raise EmptyQuery(f"query has no tokens: {query!r}")
        scores = [0.0] * self._n_docs
        for term in sorted(query_terms):
            docs = self._postings.get(term)
            if not docs:
                continue
            idf = self._idf[term]
            qtf = query_terms[term]
            for doc_id in range(self._n_docs):
                tf = docs.get(doc_id)
                if not tf:
                    continue
                norm = self.k1 * (1 - self.b + self.b * self._doc_lens[doc_id] / self._avgdl)
                scores[doc_id] += qtf * idf * (tf * (self.k1 + 1)) / (tf + norm)
        return scores

    def to_json(self) -> str:
        """Deterministic serialization; identical corpora give identical bytes."""
        payload = {
            "format": "lexlab-lexical-index",
            "version": 1,
            "k1": self.k1,
            "b": self.b,
            "docs": [
                {"key": [k.law_title, k.article_no, k.paragraph_no], "len": n}
                for k, n in zip(self._keys, self._doc_lens)
            ],
            "postings": {
                term: sorted(docs.items()) for term, docs in sorted(self._postings.items())
            },
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def build_lexical_index(
    index: ArticleIndex,
    k1: float = BM25_K1,
    b: float = BM25_B,
    tokenizer: Callable[[str], list[str]] = tokenize,
) -> LexicalIndex:
    """Build the BM25 index over an article corpus (deterministic)."""
    return LexicalIndex.build(index, k1=k1, b=b, tokenizer=tokenizer)


def retrieve(scorer: ArticleScorer, query: str, k: int) -> RetrievalResult:
    """Top-k articles by score; ties broken by ascending canonical key.

    k beyond the corpus size returns every document ranked.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    keys = scorer.doc_keys()
    scores = scorer.score_all(query)
    order = sorted(range(len(keys)), key=lambda i: (-scores[i], keys[i].sort_key()))
    ranked = [(keys[i], scores[i]) for i in order[:k]]
    return RetrievalResult(query=query, ranked=ranked)


@dataclass
class RetrievalMetrics:
    macro_recall_at: dict[int, float] = field(default_factory=dict)
    n_queries: int = 0


def macro_recall_at_k(
    runs: Sequence[tuple[RetrievalResult, GoldAnnotation]], k: int
) -> float:
    """Mean over queries of |top-k ∩ gold| / |gold|."""
    if not runs:
        raise NoData("no retrieval runs to score")
    total = 0.0
    for result, gold in runs:
        top = set(result.keys()[:k])
        total += len(top & gold.gold_keys) / len(gold.gold_keys)
    return total / len(runs)


def evaluate_retrieval(
    scorer: ArticleScorer,
    annotations: Sequence[GoldAnnotation],
    ks: Iterable[int],
) -> RetrievalMetrics:
    """Run retrieval for every annotated query and compute Macro-Recall@k."""
    ks = sorted(set(ks))
    if not annotations:
        raise NoData("no gold annotations")
    max_k = max(ks)
    runs = [(retrieve(scorer, ann.query, max_k), ann) for ann in annotations]
    return RetrievalMetrics(
        macro_recall_at={k: macro_recall_at_k(runs, k) for k in ks},
        n_queries=len(annotations),
    )


def sample_distractors(
    index: LexicalIndex,
    query: str,
    gold_keys: Iterable[CitationKey],
    count: int,
    seed: int,
    near_ratio: float = 0.5,
    k: int = 3,
    near_window: int = 10,
) -> list[CitationKey]:
    """Sample `count` non-gold article keys to use as context distractors.

    Mixes near misses (retrieval ranks k+1..k+near_window, excluding gold)
    with uniform-random keys at `near_ratio`; deterministic for a fixed
    seed. Falls back to uniform sampling when the near-miss pool is short.
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    gold = set(gold_keys)
    all_keys = index.doc_keys()
    available = [key for key in all_keys if key not in gold]
    if count > len(available):
        raise InsufficientCorpus(
            f"need {count} distractors but only {len(available)} non-gold articles exist"
        )
    if count == 0:
        return []
    rng = random.Random(seed)
    n_near = min(count, round(count * near_ratio))
    chosen: list[CitationKey] = []
    if n_near:
        ranked = retrieve(index, query, k + near_window).keys()
        near_pool = [key for key in ranked[k:] if key not in gold]
        take = min(n_near, len(near_pool))
        chosen.extend(rng.sample(near_pool, take))
    remaining = count - len(chosen)
    if remaining:
        pool = [key for key in available if key not in set(chosen)]
        chosen.extend(rng.sample(pool, remaining))
    rng.shuffle(chosen)
    return chosen


def load_gold_jsonl(path: str | Path) -> list[GoldAnnotation]:
    """Read gold annotations: JSONL of {query, gold: [{title, article}]}."""
    annotations = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            keys = frozenset(
                CitationKey(g["title"], int(g["article"]), g.get("paragraph"))
                for g in record["gold"]
            )
            annotations.append(GoldAnnotation(query=record["query"], gold_keys=keys))
    return annotations
