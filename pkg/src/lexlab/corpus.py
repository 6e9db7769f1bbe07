"""Statute corpus: canonically keyed, immutable article index.

Articles are identified by (law_title, article_no, paragraph_no). Citations
without a 款/paragraph part address the whole article. The built index is
read-only and backs retrieval, distractor sampling, consultation prompting
and citation auditing.
"""

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import DuplicateKey, EmptyCorpus, ParseError
from .numerals import parse_article_designation

INDEX_FORMAT = "lexlab-article-index"
INDEX_VERSION = 1

_TITLE_STRIP_RE = re.compile(r'[《》〈〉「」『』"“”\'‘’]')


@dataclass(frozen=True, order=True)
class CitationKey:
    """Reference to a law title, optionally narrowed to article/paragraph.

    article_no=None denotes a title-only reference ("根据《民法典》…").
    """

    law_title: str
    article_no: int | None = None
    paragraph_no: int | None = None

    def __post_init__(self):
        if not self.law_title:
            raise ValueError("law_title must be non-empty")
        if self.article_no is not None and self.article_no < 1:
            raise ValueError(f"article_no must be positive, got {self.article_no}")
        if self.paragraph_no is not None and self.article_no is None:
            raise ValueError("paragraph_no requires article_no")

    def sort_key(self) -> tuple:
        return (self.law_title, self.article_no or 0, self.paragraph_no or 0)


@dataclass(frozen=True)
class Article:
    """One statute article (or paragraph of one) with its source text."""

    law_title: str
    article_no: int
    text: str
    paragraph_no: int | None = None
    source_id: str = ""

    def __post_init__(self):
        if self.article_no < 1:
            raise ValueError(f"article_no must be >= 1, got {self.article_no}")
        if not self.text.strip():
            raise ValueError("article text must be non-empty")

    @property
    def key(self) -> CitationKey:
        return CitationKey(self.law_title, self.article_no, self.paragraph_no)


@dataclass
class BuildStats:
    """Counts from one ingestion run; rejected records are not fatal."""

    ingested: int = 0
    rejected: int = 0
    reject_reasons: Counter = field(default_factory=Counter)

    def reject(self, reason: str) -> None:
        self.rejected += 1
        self.reject_reasons[reason] += 1


def canonicalize_title(raw: str, aliases: Mapping[str, str] | None = None) -> str:
    """Strip 《》/quotes and whitespace, then apply the alias table.

    The alias table maps translated or shortened titles to one canonical
    form; lookup is exact first, then case-folded for Latin aliases.
    """
    if raw is None:
        raise ParseError("title is missing")
    stripped = _TITLE_STRIP_RE.sub("", str(raw)).strip()
    if not stripped:
        raise ParseError(f"title empty after stripping: {raw!r}")
    if aliases:
        if stripped in aliases:
            return aliases[stripped]
        folded = stripped.casefold()
        for alias, canonical in aliases.items():
            if alias.casefold() == folded:
                return canonical
    return stripped


class ArticleIndex:
    """Immutable article lookup over canonical citation keys."""

    def __init__(self, articles: Iterable[Article], build_stats: BuildStats | None = None):
        entries: dict[CitationKey, Article] = {}
        by_article: dict[tuple[str, int], list[Article]] = {}
        for article in articles:
            key = article.key
            if key in entries:
                raise DuplicateKey(key)
            entries[key] = article
            by_article.setdefault((article.law_title, article.article_no), []).append(article)
        for group in by_article.values():
            group.sort(key=lambda a: a.paragraph_no or 0)
        self._entries = entries
        self._by_article = by_article
        self._titles = frozenset(a.law_title for a in entries.values())
        self.build_stats = build_stats or BuildStats(ingested=len(entries))

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Article]:
        return iter(self.articles())

    def articles(self) -> list[Article]:
        """All articles in canonical key order."""
        return sorted(self._entries.values(), key=lambda a: a.key.sort_key())

    def keys(self) -> list[CitationKey]:
        return [a.key for a in self.articles()]

    @property
    def title_set(self) -> frozenset[str]:
        return self._titles

    def lookup(self, key: CitationKey) -> Article | None:
        """Exact-key lookup; None means NotFound.

        A key without paragraph_no matches the whole-article entry if one
        exists, else the article's first paragraph entry. Title-only keys
        always miss here (content search lives in the audit layer).
        """
        if key.article_no is None:
            return None
        hit = self._entries.get(key)
        if hit is not None:
            return hit
        if key.paragraph_no is None:
            group = self._by_article.get((key.law_title, key.article_no))
            if group:
                return group[0]
        return None

    def __contains__(self, key: CitationKey) -> bool:
        return self.lookup(key) is not None


#: Default record schema: JSON field name per logical slot.
DEFAULT_RECORD_SCHEMA = {
    "title": "title",
    "article": "article",
    "paragraph": "paragraph",
    "text": "text",
    "source_id": "source_id",
}


def ingest_statutes(
    records: Iterable[Mapping],
    aliases: Mapping[str, str] | None = None,
    schema: Mapping[str, str] | None = None,
) -> ArticleIndex:
    """Build an ArticleIndex from raw statute records.

    Each record carries {title, article, paragraph?, text, source_id?};
    `article` may be a Chinese/Arabic designation or an integer. A schema
    mapping renames those slots for foreign record layouts. Malformed
    records are counted per reason and skipped; only key collisions and an
    entirely empty stream are fatal.
    """
    field_of = dict(DEFAULT_RECORD_SCHEMA)
    if schema:
        field_of.update(schema)
    stats = BuildStats()
    articles: list[Article] = []
    seen: set[CitationKey] = set()
    empty = True
    for record in records:
        empty = False
        try:
            if not isinstance(record, Mapping):
                raise ParseError("record is not an object")
            article = _parse_record(
                {slot: record.get(name) for slot, name in field_of.items()}, aliases
            )
        except ParseError as exc:
            stats.reject(str(exc))
            continue
        if article.key in seen:
            raise DuplicateKey(article.key)
        seen.add(article.key)
        articles.append(article)
        stats.ingested += 1
    if empty:
        raise EmptyCorpus("no statute records in input")
    return ArticleIndex(articles, stats)


def _parse_record(record: Mapping, aliases: Mapping[str, str] | None) -> Article:
    if not isinstance(record, Mapping):
        raise ParseError("record is not an object")
    title = canonicalize_title(record.get("title"))
    if aliases:
        title = canonicalize_title(title, aliases)
    designation = record.get("article")
    if designation is None:
        raise ParseError("missing article designation")
    if isinstance(designation, int):
        article_no, paragraph_no = designation, None
        if article_no < 1:
            raise ParseError(f"article number must be positive: {designation}")
    else:
        article_no, paragraph_no = parse_article_designation(str(designation))
    explicit_para = record.get("paragraph")
    if explicit_para is not None:
        explicit_para = int(explicit_para)
        if explicit_para < 1:
            raise ParseError(f"paragraph must be positive: {explicit_para}")
        if paragraph_no is not None and paragraph_no != explicit_para:
            raise ParseError(
                f"paragraph conflict: designation says {paragraph_no}, field says {explicit_para}"
            )
        paragraph_no = explicit_para
    text = record.get("text")
    if not isinstance(text, str) or not text.strip():
        raise ParseError("missing or empty article text")
    return Article(
        law_title=title,
        article_no=article_no,
        paragraph_no=paragraph_no,
        text=text.strip(),
        source_id=str(record.get("source_id") or ""),
    )


def read_statutes_jsonl(path: str | Path) -> Iterator[dict]:
    """Yield records from a UTF-8 JSON Lines statute file."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc


def _article_to_json(article: Article) -> dict:
    record = {
        "title": article.law_title,
        "article": article.article_no,
        "text": article.text,
    }
    if article.paragraph_no is not None:
        record["paragraph"] = article.paragraph_no
    if article.source_id:
        record["source_id"] = article.source_id
    return record


def save_index(index: ArticleIndex, path: str | Path) -> None:
    """Serialize an index as a versioned JSON blob (deterministic bytes)."""
    payload = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "ingested": index.build_stats.ingested,
        "rejected": index.build_stats.rejected,
        "articles": [_article_to_json(a) for a in index.articles()],
    }
    data = json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
    Path(path).write_bytes(data.encode("utf-8"))


def load_index(path: str | Path) -> ArticleIndex:
    """Load a serialized index, checking the versioned header."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != INDEX_FORMAT:
        raise ParseError(f"{path}: not a {INDEX_FORMAT} file")
    if payload.get("version") != INDEX_VERSION:
        raise ParseError(f"{path}: unsupported index version {payload.get('version')}")
    stats = BuildStats(
        ingested=payload.get("ingested", len(payload["articles"])),
        rejected=payload.get("rejected", 0),
    )
    return ArticleIndex((_parse_record(r, None) for r in payload["articles"]), stats)
