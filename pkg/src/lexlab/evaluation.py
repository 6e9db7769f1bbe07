"""Lowest-perplexity multi-choice evaluation.

Every choice's continuation is scored against the item prompt; the
prediction is the choice with minimal per-token perplexity (ties to the
lowest index). Raw log-likelihood sums are kept in the report so any other
normalization stays recomputable.
"""

import json
import math
import re
from dataclasses import dataclass, field
from typing import Sequence

from .errors import CapabilityError, DomainError
from .forge.types import EvalChoiceItem
from .gateway import Backend

_STAGE_TAG_RE = re.compile(r"^s[0-8]$")


def perplexity_of(logprob_sum: float, token_count: int) -> float:
    """exp(−logprob_sum / token_count); token_count must be >= 1."""
    if token_count < 1:
        raise DomainError(f"token_count must be >= 1, got {token_count}")
    return math.exp(-logprob_sum / token_count)


@dataclass(frozen=True)
class ScoredChoice:
    choice_index: int
    logprob_sum: float
    token_count: int
    perplexity: float

    @property
    def mean_logprob(self) -> float:
        return self.logprob_sum / self.token_count


@dataclass(frozen=True)
class EvalRunMeta:
    """Provenance for one evaluation run.

    stage_tag records the training-lineage label (s0..s8) the scored model
    claims; with_retrieval distinguishes the no-reference/with-reference
    generation conditions.
    """

    run_id: str
    dataset_name: str = ""
    stage_tag: str | None = None
    with_retrieval: bool = False
    backend_descriptor: str = ""

    def __post_init__(self):
        if self.stage_tag is not None and not _STAGE_TAG_RE.match(self.stage_tag):
            raise ValueError(f"stage_tag must match s0..s8, got {self.stage_tag!r}")


@dataclass
class ItemResult:
    item_id: str
    predicted_index: int | None
    gold_index: int
    scores: list[ScoredChoice] = field(default_factory=list)
    failed: bool = False
    error: str = ""

    @property
    def correct(self) -> bool:
        return not self.failed and self.predicted_index == self.gold_index


@dataclass
class EvalReport:
    meta: EvalRunMeta
    per_item: list[ItemResult]
    accuracy: float
    n_scored: int
    n_failed: int

    def to_json(self) -> dict:
        return {
            "meta": {
                "run_id": self.meta.run_id,
                "dataset": self.meta.dataset_name,
                "stage": self.meta.stage_tag,
                "with_retrieval": self.meta.with_retrieval,
                "backend": self.meta.backend_descriptor,
            },
            "accuracy": self.accuracy,
            "n_scored": self.n_scored,
            "n_failed": self.n_failed,
            "items": [
                {
                    "id": r.item_id,
                    "predicted": r.predicted_index,
                    "gold": r.gold_index,
                    "failed": r.failed,
                    "error": r.error,
                    "choices": [
                        {
                            "index": s.choice_index,
                            "logprob_sum": s.logprob_sum,
                            "token_count": s.token_count,
                            "perplexity": s.perplexity,
                        }
                        for s in r.scores
                    ],
                }
                for r in self.per_item
            ],
        }


def predict_from_scores(scores: Sequence[ScoredChoice]) -> int:
    """Argmin of perplexity, ties broken by the lowest choice index."""
    return min(scores, key=lambda s: (s.perplexity, s.choice_index)).choice_index


def predict_by_mean_logprob(scores: Sequence[ScoredChoice]) -> int:
    """Argmax of mean per-token log-likelihood (identity check companion)."""
    return min(scores, key=lambda s: (-s.mean_logprob, s.choice_index)).choice_index


def score_item(backend: Backend, item: EvalChoiceItem) -> list[ScoredChoice]:
    scores = []
    for i, choice in enumerate(item.choices):
        result = backend.score_continuation(item.prompt, choice)
        scores.append(
            ScoredChoice(
                choice_index=i,
                logprob_sum=result.logprob_sum,
                token_count=result.token_count,
                perplexity=perplexity_of(result.logprob_sum, result.token_count),
            )
        )
    return scores


def eval_multichoice(
    backend: Backend,
    items: Sequence[EvalChoiceItem],
    meta: EvalRunMeta,
    strict: bool = False,
) -> EvalReport:
    """Score every item and report lowest-perplexity accuracy.

    A per-item scoring failure marks the item failed; failed items are
    excluded from the accuracy denominator unless strict=True, which counts
    them as incorrect. Capability errors are configuration mistakes and
    propagate.
    """
    results: list[ItemResult] = []
    for item in items:
        try:
            scores = score_item(backend, item)
        except CapabilityError:
            raise
        except Exception as exc:
            results.append(
                ItemResult(
                    item_id=item.id,
                    predicted_index=None,
                    gold_index=item.gold_index,
                    failed=True,
                    error=str(exc),
                )
            )
            continue
        results.append(
            ItemResult(
                item_id=item.id,
                predicted_index=predict_from_scores(scores),
                gold_index=item.gold_index,
                scores=scores,
            )
        )
    n_failed = sum(1 for r in results if r.failed)
    n_correct = sum(1 for r in results if r.correct)
    denominator = len(results) if strict else len(results) - n_failed
    accuracy = (n_correct / denominator) if denominator else 0.0
    return EvalReport(
        meta=meta,
        per_item=results,
        accuracy=accuracy,
        n_scored=len(results) - n_failed,
        n_failed=n_failed,
    )


def load_items_jsonl(path: str) -> list[EvalChoiceItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                items.append(EvalChoiceItem.from_json(json.loads(line)))
    return items


def render_accuracy_table(reports: Sequence[EvalReport]) -> str:
    """Markdown accuracy(%) table: one row per stage tag, one column per
    dataset."""
    datasets: list[str] = []
    for report in reports:
        if report.meta.dataset_name not in datasets:
            datasets.append(report.meta.dataset_name)
    rows: dict[str, dict[str, float]] = {}
    for report in reports:
        stage = report.meta.stage_tag or report.meta.run_id
        rows.setdefault(stage, {})[report.meta.dataset_name] = report.accuracy
    lines = ["| stage | " + " | ".join(datasets) + " |",
             "| --- |" + " ---: |" * len(datasets)]
    for stage in sorted(rows):
        cells = [
            f"{rows[stage][d] * 100:.2f}" if d in rows[stage] else "—" for d in datasets
        ]
        lines.append(f"| {stage} | " + " | ".join(cells) + " |")
    return "\n".join(lines)
