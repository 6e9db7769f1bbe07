"""Dataset construction: true/false query transforms, distillation prompts,
consultation SFT assembly, true/false evaluation items and the charge
prediction benchmark."""

from .types import EvalChoiceItem, MCQItem, SFTExample, TrueFalseQuery
from .transform import (
    FilterDecision,
    TransformPattern,
    default_patterns,
    filter_transferred_query,
    length_gate,
    transform_mcq_regex,
)
from .prompts import build_distill_prompt, build_icl_transform_prompt
from .consult_sft import build_consult_sft
from .benchmarks import (
    CONFUSABLE_CHARGE_SETS,
    DEFAULT_CHARGES,
    build_charge_benchmark,
    build_jem_items,
    render_charge_report,
)

__all__ = [
    "CONFUSABLE_CHARGE_SETS",
    "DEFAULT_CHARGES",
    "EvalChoiceItem",
    "FilterDecision",
    "MCQItem",
    "SFTExample",
    "TransformPattern",
    "TrueFalseQuery",
    "build_charge_benchmark",
    "build_consult_sft",
    "build_distill_prompt",
    "build_icl_transform_prompt",
    "build_jem_items",
    "default_patterns",
    "filter_transferred_query",
    "length_gate",
    "render_charge_report",
    "transform_mcq_regex",
]
