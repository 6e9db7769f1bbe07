"""Citation extraction and hallucination classification.

Citations in generated text are matched against the statute index. A cited
key that exists is VALID; a missing key whose quoted content matches a real
article is H2 (real content, wrong title or number); anything else is H1
(fabricated). Content matching is character-bigram cosine similarity with a
configurable threshold — a deterministic stand-in for the human judgment
that defined the two categories.
"""

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .corpus import Article, ArticleIndex, CitationKey
from .errors import EmptyCorpus
from .numerals import chinese_numeral_to_int, int_to_chinese_numeral

DEFAULT_SIM_THRESHOLD = 0.35
QUOTED_CONTENT_CAP = 200

SENTENCE_TERMINATORS = "。！？；.!?;\n"

_CN_NUM = r"[0-9０-９零〇一二两三四五六七八九十百千]+"
_EN_TITLE = r"[A-Z][\w'’-]*(?:(?:\s+(?:of|and|the|for|on|to))*\s+[A-Z][\w'’-]*)*"

_CITATION_RE = re.compile(
    # Chinese, numbered: 《民法典》第一千零四十七条[第二款]
    r"《(?P<zh_title>[^《》]+)》\s*第(?P<zh_num>" + _CN_NUM + r")条"
    r"(?:\s*第(?P<zh_para>" + _CN_NUM + r")款)?"
    # Chinese, title-only with an attribution prefix: 根据《民法典》…
    r"|(?:根据|依据|依照|按照)\s*《(?P<zh_only_title>[^《》]+)》(?!\s*第)"
    # English, numbered: Article 32[, paragraph 1] of the …Regulations
    r"|[Aa]rticle\s+(?P<en_num>\d[\d,]*)"
    r"(?:\s*,?\s*[Pp]aragraph\s+(?P<en_para>\d+))?"
    r"\s+of\s+(?:the\s+)?(?P<en_title>" + _EN_TITLE + r")"
    # English, title-only with an attribution prefix: According to the Civil Code, …
    r"|(?:[Aa]ccording(?:\s+to)?|[Uu]nder|[Pp]ursuant\s+to)\s+(?:the\s+)?"
    r"(?!Article\b)(?P<en_only_title>" + _EN_TITLE + r")"
)

_LEADING_CONNECTIVE_RE = re.compile(r"^(?:之?规定|的规定)?[，,、：:\s]*")


@dataclass(frozen=True)
class Citation:
    """One extracted legal-article reference.

    quoted_content is the clause the response attributes to the article
    (capped); span is the citation's character range in the source text.
    """

    law_title: str
    article_no: int | None
    paragraph_no: int | None = None
    quoted_content: str | None = None
    span: tuple[int, int] = (0, 0)

    @property
    def key(self) -> CitationKey:
        return CitationKey(self.law_title, self.article_no, self.paragraph_no)


@dataclass(frozen=True)
class AuditFinding:
    citation: Citation
    verdict: str  # VALID | H1 | H2
    matched_key: CitationKey | None = None
    similarity: float = 0.0
    content_divergence_warning: bool = False

    def to_json(self) -> dict:
        return {
            "citation": {
                "title": self.citation.law_title,
                "article": self.citation.article_no,
                "paragraph": self.citation.paragraph_no,
                "quoted": self.citation.quoted_content,
                "span": list(self.citation.span),
            },
            "verdict": self.verdict,
            "matched": None
            if self.matched_key is None
            else {
                "title": self.matched_key.law_title,
                "article": self.matched_key.article_no,
                "paragraph": self.matched_key.paragraph_no,
            },
            "similarity": round(self.similarity, 6),
            "content_divergence_warning": self.content_divergence_warning,
        }


@dataclass(frozen=True)
class AuditReport:
    findings: tuple[AuditFinding, ...]
    has_h1: bool
    has_h2: bool

    @classmethod
    def from_findings(cls, findings: Iterable[AuditFinding]) -> "AuditReport":
        findings = tuple(findings)
        return cls(
            findings=findings,
            has_h1=any(f.verdict == "H1" for f in findings),
            has_h2=any(f.verdict == "H2" for f in findings),
        )

    def to_json(self) -> dict:
        return {
            "findings": [f.to_json() for f in self.findings],
            "has_h1": self.has_h1,
            "has_h2": self.has_h2,
        }


def _decode_num(token: str) -> int:
    token = token.replace(",", "")
    normalized = token.translate(str.maketrans("０１２３４５６７８９", "0123456789"))
    if normalized.isdigit():
        return int(normalized)
    return chinese_numeral_to_int(token)


def _quoted_clause(text: str, start: int) -> str | None:
    clause = text[start:]
    clause = _LEADING_CONNECTIVE_RE.sub("", clause)
    end = len(clause)
    for i, ch in enumerate(clause):
        if ch in SENTENCE_TERMINATORS:
            end = i
            break
    clause = clause[:end].strip()[:QUOTED_CONTENT_CAP]
    return clause or None


def extract_citations(text: str) -> list[Citation]:
    """Find legal-article references, left-to-right and non-overlapping.

    Numbered Chinese/English citations carry the article (and paragraph)
    number; 根据/依据-style and "According to …" attributions without a
    number come back title-only with the attributed clause captured.
    """
    citations: list[Citation] = []
    for m in _CITATION_RE.finditer(text):
        groups = m.groupdict()
        if groups["zh_title"] is not None:
            title = groups["zh_title"].strip()
            article_no = _decode_num(groups["zh_num"])
            para = _decode_num(groups["zh_para"]) if groups["zh_para"] else None
        elif groups["zh_only_title"] is not None:
            title, article_no, para = groups["zh_only_title"].strip(), None, None
        elif groups["en_num"] is not None:
            title = groups["en_title"].strip()
            article_no = _decode_num(groups["en_num"])
            para = int(groups["en_para"]) if groups["en_para"] else None
        else:
            title, article_no, para = groups["en_only_title"].strip(), None, None
        if not title or (article_no is not None and article_no < 1):
            continue
        citations.append(
            Citation(
                law_title=title,
                article_no=article_no,
                paragraph_no=para,
                quoted_content=_quoted_clause(text, m.end()),
                span=(m.start(), m.end()),
            )
        )
    return citations


def render_citation(key: CitationKey) -> str:
    """Canonical Chinese form of a citation key (round-trips through
    extract_citations)."""
    if key.article_no is None:
        return f"根据《{key.law_title}》"
    rendered = f"《{key.law_title}》第{int_to_chinese_numeral(key.article_no)}条"
    if key.paragraph_no is not None:
        rendered += f"第{int_to_chinese_numeral(key.paragraph_no)}款"
    return rendered


def char_bigrams(text: str) -> Counter:
    chars = [ch.lower() for ch in text if ch.isalnum()]
    if not chars:
        return Counter()
    if len(chars) == 1:
        return Counter(["".join(chars)])
    return Counter(a + b for a, b in zip(chars, chars[1:]))


def bigram_cosine(a: str, b: str) -> float:
    """Character-bigram cosine similarity in [0, 1]."""
    va, vb = char_bigrams(a), char_bigrams(b)
    if not va or not vb:
        return 0.0
    dot = sum(count * vb[gram] for gram, count in va.items())
    if not dot:
        return 0.0
    return dot / math.sqrt(
        sum(c * c for c in va.values()) * sum(c * c for c in vb.values())
    )


def _best_content_match(
    quoted: str, index: ArticleIndex
) -> tuple[Article | None, float]:
    best_article, best_sim = None, -1.0
    for article in index.articles():
        sim = bigram_cosine(quoted, article.text)
        if sim > best_sim:
            best_article, best_sim = article, sim
    return best_article, max(best_sim, 0.0)


def classify_citation(
    citation: Citation,
    index: ArticleIndex,
    sim_threshold: float = DEFAULT_SIM_THRESHOLD,
) -> AuditFinding:
    """Classify one citation as VALID, H1 or H2 against the index.

    An existing cited key is VALID regardless of content (divergent quoted
    content only sets a warning flag); a missing key is H2 when the quoted
    content matches a real article at or above the threshold, H1 otherwise.
    Title-only citations validate by content under the same title.
    """
    if not 0 < sim_threshold <= 1:
        raise ValueError(f"sim_threshold must be in (0, 1], got {sim_threshold}")
    if len(index) == 0:
        raise EmptyCorpus("cannot audit against an empty index")

    quoted = citation.quoted_content

    if citation.article_no is not None:
        cited = index.lookup(CitationKey(citation.law_title, citation.article_no,
                                         citation.paragraph_no))
        if cited is not None:
            sim = bigram_cosine(quoted, cited.text) if quoted else 1.0
            return AuditFinding(
                citation=citation,
                verdict="VALID",
                matched_key=cited.key,
                similarity=sim,
                content_divergence_warning=bool(quoted) and sim < sim_threshold,
            )
        if quoted:
            best, sim = _best_content_match(quoted, index)
            if best is not None and sim >= sim_threshold:
                return AuditFinding(
                    citation=citation, verdict="H2", matched_key=best.key, similarity=sim
                )
            return AuditFinding(citation=citation, verdict="H1", similarity=max(sim, 0.0))
        return AuditFinding(citation=citation, verdict="H1", similarity=0.0)

    # Title-only attribution: only content can validate it.
    if quoted:
        same_title_best, same_sim = None, -1.0
        other_best, other_sim = None, -1.0
        for article in index.articles():
            sim = bigram_cosine(quoted, article.text)
            if article.law_title == citation.law_title:
                if sim > same_sim:
                    same_title_best, same_sim = article, sim
            elif sim > other_sim:
                other_best, other_sim = article, sim
        if same_title_best is not None and same_sim >= sim_threshold:
            return AuditFinding(
                citation=citation,
                verdict="VALID",
                matched_key=same_title_best.key,
                similarity=same_sim,
            )
        if other_best is not None and other_sim >= sim_threshold:
            return AuditFinding(
                citation=citation, verdict="H2", matched_key=other_best.key,
                similarity=other_sim,
            )
        return AuditFinding(citation=citation, verdict="H1",
                            similarity=max(same_sim, other_sim, 0.0))
    return AuditFinding(citation=citation, verdict="H1", similarity=0.0)


def audit_response(
    text: str,
    index: ArticleIndex,
    sim_threshold: float = DEFAULT_SIM_THRESHOLD,
) -> AuditReport:
    """Extract every citation in a response and classify each one."""
    findings = [
        classify_citation(citation, index, sim_threshold)
        for citation in extract_citations(text)
    ]
    return AuditReport.from_findings(findings)
