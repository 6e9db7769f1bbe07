"""Record types for forged datasets. Everything serializes to JSONL with a
`kind` discriminator."""

from dataclasses import dataclass, field
from typing import Literal

from ..corpus import CitationKey

OPTION_LABELS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class MCQItem:
    """A multiple-choice(/answer) exam question with exactly four options."""

    id: str
    stem: str
    options: dict[str, str]
    correct: frozenset[str]

    def __post_init__(self):
        if tuple(sorted(self.options)) != OPTION_LABELS:
            raise ValueError(f"options must be labeled exactly A-D, got {sorted(self.options)}")
        object.__setattr__(self, "correct", frozenset(self.correct))
        if not self.correct or not self.correct <= set(OPTION_LABELS):
            raise ValueError(f"correct must be a non-empty subset of A-D, got {self.correct}")

    @classmethod
    def from_json(cls, record: dict) -> "MCQItem":
        return cls(
            id=str(record["id"]),
            stem=record["stem"],
            options=dict(record["options"]),
            correct=frozenset(record["correct"]),
        )

    def to_json(self) -> dict:
        return {
            "kind": "MCQ",
            "id": self.id,
            "stem": self.stem,
            "options": dict(sorted(self.options.items())),
            "correct": sorted(self.correct),
        }


@dataclass(frozen=True)
class TrueFalseQuery:
    """One option of an MCQ fused into a natural true/false query.

    gold is the option's membership in the source MCQ's correct set; it may
    be None for queries whose source labels are unknown.
    """

    source_id: str
    option_label: str
    query_text: str
    gold: bool | None
    method: Literal["REGEX", "ICL", "EXPERT"]

    def to_json(self) -> dict:
        return {
            "kind": "TFQ",
            "source_id": self.source_id,
            "option": self.option_label,
            "query": self.query_text,
            "gold": self.gold,
            "method": self.method,
        }

    @classmethod
    def from_json(cls, record: dict) -> "TrueFalseQuery":
        return cls(
            source_id=str(record["source_id"]),
            option_label=record["option"],
            query_text=record["query"],
            gold=record.get("gold"),
            method=record.get("method", "REGEX"),
        )


@dataclass(frozen=True)
class SFTExample:
    """One supervised fine-tuning record with its context articles.

    context_articles pairs each citation key with a relevance flag; for
    CONSULT examples the gold articles are the relevant ones.
    """

    kind: Literal["Q2EA", "QA2E", "EXPERT", "CONSULT"]
    input_text: str
    target_text: str | None = None
    context_articles: tuple[tuple[CitationKey, bool], ...] = ()
    seed_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "EXPERT" and not (self.target_text and self.target_text.strip()):
            raise ValueError("EXPERT examples require a human-written target_text")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "input": self.input_text,
            "target": self.target_text,
            "context": [
                {
                    "title": key.law_title,
                    "article": key.article_no,
                    "paragraph": key.paragraph_no,
                    "relevant": relevant,
                }
                for key, relevant in self.context_articles
            ],
            "seed_meta": self.seed_meta,
        }


@dataclass(frozen=True)
class EvalChoiceItem:
    """A multi-choice evaluation instance for lowest-perplexity scoring."""

    id: str
    prompt: str
    choices: tuple[str, ...]
    gold_index: int

    def __post_init__(self):
        object.__setattr__(self, "choices", tuple(self.choices))
        if len(self.choices) < 2:
            raise ValueError("need at least two choices")
        if len(set(self.choices)) != len(self.choices):
            raise ValueError("choices must be distinct")
        if not 0 <= self.gold_index < len(self.choices):
            raise ValueError(f"gold_index {self.gold_index} out of range")

    def to_json(self) -> dict:
        return {
            "kind": "CHOICE",
            "id": self.id,
            "prompt": self.prompt,
            "choices": list(self.choices),
            "gold_index": self.gold_index,
        }

    @classmethod
    def from_json(cls, record: dict) -> "EvalChoiceItem":
        return cls(
            id=str(record["id"]),
            prompt=record["prompt"],
            choices=tuple(record["choices"]),
            gold_index=int(record["gold_index"]),
        )
