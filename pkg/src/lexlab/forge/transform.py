"""Regex fusion of MCQ stem+option pairs into true/false queries, plus the
banned-word and length gates applied to transferred queries.

The pattern table is deliberately small and configurable: coverage on any
particular exam dump is tuned by editing patterns, not code.
"""

import re
from dataclasses import dataclass
from typing import Sequence

from .types import MCQItem, TrueFalseQuery


@dataclass(frozen=True)
class Rejected:
    """A stem+option pair no pattern could fuse."""

    reason: str


@dataclass(frozen=True)
class TransformPattern:
    """One fusion rule: a stem regex, an optional option regex, a template.

    Template placeholders: stem/option named groups, {option} (trimmed),
    {option_statement} (terminated with 。), {option_clause} (no trailing
    period, first letter lowercased).
    """

    name: str
    stem: str
    template: str
    option: str | None = None

    def compiled(self) -> tuple[re.Pattern, re.Pattern | None]:
        return re.compile(self.stem), re.compile(self.option) if self.option else None


def default_patterns() -> list[TransformPattern]:
    return [
        TransformPattern(
            name="en-up-to-party-decide",
            stem=r"^(?P<context>.+?),?\s*which of the following options should be taken\?$",
            option=r"^It is up to (?P<party>.+?) to decide whether (?P<action>.+?)\.?$",
            template="{context}, can {party} decide whether {action}?",
        ),
        TransformPattern(
            name="en-which-is-correct",
            stem=(
                r"^(?P<context>.+?),?\s*which of the following"
                r"(?: options| statements)? (?:is|are) (?:correct|true|incorrect|false)\?$"
            ),
            template="{context}, is it correct that {option_clause}?",
        ),
        TransformPattern(
            name="zh-topic-statement-judgment",
            stem=r"^关于(?P<topic>.+?)[，,]下列(?:说法|表述|论述)(?:中)?(?:正确|错误|不正确)的?(?:是|为)?[？?]?$",
            template="关于{topic}，{option_statement}这个说法是否正确？",
        ),
        TransformPattern(
            name="zh-statement-judgment",
            stem=r"^(?P<context>.*?)[，,]?下列(?:哪[一些]?项?)?(?:说法|表述|论述)(?:中)?(?:正确|错误|不正确)的?(?:是|为)?[？?]?$",
            template="{context}，{option_statement}这个说法是否正确？",
        ),
        TransformPattern(
            name="zh-which-option",
            stem=r"^(?P<context>.*?)[，,]?(?:下列|以下)(?:哪[一些]?项?|哪个)?(?:选项|行为|情形)(?:是)?(?:正确|错误)的?[？?]?$",
            template="{context}，{option_statement}这个说法是否正确？",
        ),
    ]


_DEFAULT_PATTERNS = default_patterns()


def _option_clause(option: str) -> str:
    clause = option.strip().rstrip(".。")
    return clause[:1].lower() + clause[1:] if clause else clause


def _option_statement(option: str) -> str:
    statement = option.strip()
    if statement and statement[-1] not in "。！？.!?":
        statement += "。"
    return statement


def transform_mcq_regex(
    item: MCQItem,
    option_label: str,
    patterns: Sequence[TransformPattern] | None = None,
) -> TrueFalseQuery | Rejected:
    """Fuse one option of an MCQ into a true/false query via the pattern table.

    The first pattern whose stem (and option pattern, when present) matches
    wins. gold is the option's membership in the MCQ's correct set.
    """
    option_text = item.options[option_label].strip()
    if not option_text:
        return Rejected("empty option")
    stem = item.stem.strip()
    for pattern in patterns if patterns is not None else _DEFAULT_PATTERNS:
        stem_re, option_re = pattern.compiled()
        stem_match = stem_re.match(stem)
        if not stem_match:
            continue
        slots = {k: (v or "") for k, v in stem_match.groupdict().items()}
        if option_re is not None:
            option_match = option_re.match(option_text)
            if not option_match:
                continue
            slots.update({k: (v or "") for k, v in option_match.groupdict().items()})
        slots["option"] = option_text
        slots["option_statement"] = _option_statement(option_text)
        slots["option_clause"] = _option_clause(option_text)
        query = pattern.template.format(**slots)
        query = re.sub(r"^[，,、\s]+", "", query)
        return TrueFalseQuery(
            source_id=item.id,
            option_label=option_label,
            query_text=query,
            gold=option_label in item.correct,
            method="REGEX",
        )
    return Rejected("no pattern")


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.keep


DEFAULT_BANNED_PHRASES = (
    "option",
    "from following",
    "as below",
    "选项",
    "下列",
    "如下",
)


def filter_transferred_query(
    query_text: str,
    banned_phrases: Sequence[str] = DEFAULT_BANNED_PHRASES,
) -> FilterDecision:
    """Drop iff the query contains a banned phrase.

    Plain substring matching, case-folded for Latin phrases and with no
    quote-awareness: a banned phrase inside a quoted statute title still
    drops the query.
    """
    folded = query_text.casefold()
    for phrase in banned_phrases:
        if phrase.casefold() in folded:
            return FilterDecision(False, f"banned: {phrase}")
    return FilterDecision(True)


def length_gate(query_text: str, min_chars: int = 10, max_chars: int = 512) -> FilterDecision:
    """Drop transferred queries outside the configured character bounds."""
    n = len(query_text.strip())
    if n < min_chars:
        return FilterDecision(False, f"too short: {n} < {min_chars}")
    if n > max_chars:
        return FilterDecision(False, f"too long: {n} > {max_chars}")
    return FilterDecision(True)
