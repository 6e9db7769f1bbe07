"""Evaluation benchmark construction: true/false exam items and the
confusable-charge prediction set."""

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import InsufficientDocs
from .types import OPTION_LABELS, EvalChoiceItem, MCQItem

TRUE_CHOICE = "正确"
FALSE_CHOICE = "错误"

# Four groups of charges that are easy to misidentify for one another; the
# benchmark always offers all nine as the choice set.
CONFUSABLE_CHARGE_SETS: tuple[tuple[str, ...], ...] = (
    ("抢夺罪", "抢劫罪"),
    ("盗窃罪", "侵占罪"),
    ("放火罪", "失火罪"),
    ("行贿罪", "受贿罪", "贪污罪"),
)

DEFAULT_CHARGES: tuple[str, ...] = tuple(
    charge for group in CONFUSABLE_CHARGE_SETS for charge in group
)

CHARGE_NAMES_EN = {
    "抢夺罪": "Forcible seizure",
    "抢劫罪": "Robbery",
    "盗窃罪": "Theft",
    "侵占罪": "Criminal conversion",
    "放火罪": "Arson",
    "失火罪": "Arson by negligence",
    "行贿罪": "Offering bribes",
    "受贿罪": "Acceptance of bribes",
    "贪污罪": "Embezzlement",
}


def build_jem_items(
    item: MCQItem,
    true_choice: str = TRUE_CHOICE,
    false_choice: str = FALSE_CHOICE,
) -> list[EvalChoiceItem]:
    """Convert one MCQ into four true/false items, one per option.

    Each item's prompt fuses the stem with the option statement; the two
    continuations are the affirmative and negative verdict strings, and the
    gold points at the affirmative exactly when the option is in the MCQ's
    correct set.
    """
    items = []
    for label in OPTION_LABELS:
        option = item.options[label].strip()
        stem = item.stem.strip()
        sep = "" if (not stem or stem[-1] in "。？！，；：.?!,;:") else " "
        items.append(
            EvalChoiceItem(
                id=f"{item.id}:{label}",
                prompt=f"{stem}{sep}{option}",
                choices=(true_choice, false_choice),
                gold_index=0 if label in item.correct else 1,
            )
        )
    return items


@dataclass(frozen=True)
class ChargeDocument:
    """A fact description and the set of charges its judgment refers to."""

    doc_id: str
    fact_text: str
    charges: frozenset[str]

    @classmethod
    def from_json(cls, record: dict) -> "ChargeDocument":
        return cls(
            doc_id=str(record["id"]),
            fact_text=record["fact"],
            charges=frozenset(record["charges"]),
        )


def build_charge_benchmark(
    documents: Iterable[ChargeDocument],
    charge_list: Sequence[str] = DEFAULT_CHARGES,
    n_per_charge: int = 100,
    seed: int = 0,
) -> list[EvalChoiceItem]:
    """Sample a charge-prediction benchmark from judgment documents.

    Documents referring to multiple charges are dropped; n_per_charge
    single-charge documents are then sampled per charge, deterministically
    for a fixed seed and independent of input order. Every item offers the
    full charge list as choices.
    """
    charges = list(charge_list)
    if len(charges) != len(set(charges)):
        raise ValueError("charge_list has duplicate names")
    by_charge: dict[str, list[ChargeDocument]] = {c: [] for c in charges}
    seen_ids: set[str] = set()
    for doc in documents:
        if doc.doc_id in seen_ids:
            raise ValueError(f"duplicate document id {doc.doc_id!r}")
        seen_ids.add(doc.doc_id)
        if len(doc.charges) != 1:
            continue
        (charge,) = doc.charges
        if charge in by_charge:
            by_charge[charge].append(doc)

    rng = random.Random(seed)
    items: list[EvalChoiceItem] = []
    choice_index = {c: i for i, c in enumerate(charges)}
    for charge in charges:
        pool = sorted(by_charge[charge], key=lambda d: d.doc_id)
        if len(pool) < n_per_charge:
            raise InsufficientDocs(charge, len(pool), n_per_charge)
        for doc in rng.sample(pool, n_per_charge):
            items.append(
                EvalChoiceItem(
                    id=doc.doc_id,
                    prompt=doc.fact_text,
                    choices=tuple(charges),
                    gold_index=choice_index[charge],
                )
            )
    return items


def render_charge_report(
    items: Sequence[EvalChoiceItem], charge_list: Sequence[str] = DEFAULT_CHARGES
) -> str:
    """Markdown summary of a charge benchmark: per-charge counts and the
    confusable groupings."""
    counts = {c: 0 for c in charge_list}
    for item in items:
        counts[item.choices[item.gold_index]] += 1
    lines = ["| Charge | Items |", "| --- | ---: |"]
    for charge in charge_list:
        en = CHARGE_NAMES_EN.get(charge)
        name = f"{charge} ({en})" if en else charge
        lines.append(f"| {name} | {counts[charge]} |")
    lines.append("")
    lines.append("Confusable sets:")
    for group in CONFUSABLE_CHARGE_SETS:
        shown = [f"{c} ({CHARGE_NAMES_EN[c]})" if c in CHARGE_NAMES_EN else c for c in group]
        lines.append(f"- {' vs '.join(shown)}")
    return "\n".join(lines)
