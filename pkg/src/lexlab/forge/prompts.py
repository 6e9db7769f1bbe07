"""Prompt builders for the teacher-model pipeline.

Two duties: the in-context-learning prompt that asks a teacher model to fuse
a stem+option pair into one true/false query, and the two distillation
prompts (explanation+answer from the question alone, or explanation only
with the gold verdict embedded). All templates are frozen by golden files.
"""

from dataclasses import dataclass
from typing import Literal, Sequence

from ..errors import BadExemplars, MissingGold
from .types import TrueFalseQuery

ICL_HEADER = (
    "Here is a question from the National Judicial Examination and one of its "
    "options. Please concatenate them as a single true-or-false question. "
    "A few examples are illustrated below."
)

ICL_TARGET_INSTRUCTION = (
    "Now, please concatenate the following question and option as a single fluent "
    'and coherent query. The output should not contain phrases like "options", '
    '"from following", "as below".'
)

DISTILL_HEADER = (
    "Here is a question about law, could you please answer it and give me a "
    "detailed analysis?"
)

Q2EA_INSTRUCTION = "Please provide a detailed reasoning process before giving the answer."

QA2E_DIRECTIONS = (
    '### Directions: The answer of the given question is "{verdict}" '
    '("{judgment}"). Please answer it step by step. If the question is about '
    "case analysis, please analyze the reasons behind the party's decision to "
    "take such action. If the question is about legal concept, please list the "
    "legal basis involved in your answer."
)


@dataclass(frozen=True)
class IclExemplar:
    """One human-annotated fusion example for the ICL transform prompt."""

    question: str
    option: str
    output: str


def build_icl_transform_prompt(
    question: str, option: str, exemplars: Sequence[IclExemplar]
) -> str:
    """Emit the fusion prompt: header, three exemplars, then the target pair.

    The result contains exactly four "### Question:" markers and ends with
    a bare "Output:".
    """
    if len(exemplars) != 3:
        raise BadExemplars(f"need exactly 3 exemplars, got {len(exemplars)}")
    for i, ex in enumerate(exemplars, 1):
        if not (ex.question.strip() and ex.option.strip() and ex.output.strip()):
            raise BadExemplars(f"exemplar {i} has an empty field")
    if not question.strip() or not option.strip():
        raise BadExemplars("target question and option must be non-empty")
    blocks = [ICL_HEADER]
    for i, ex in enumerate(exemplars, 1):
        blocks.append(
            f"# Example {i}:\n"
            f"### Question: {ex.question.strip()}\n"
            f"### Option: {ex.option.strip()}\n"
            f"Output: {ex.output.strip()}"
        )
    blocks.append(ICL_TARGET_INSTRUCTION)
    blocks.append(
        f"### Question: {question.strip()}\n### Option: {option.strip()}\nOutput:"
    )
    return "\n\n".join(blocks)


def build_distill_prompt(query: TrueFalseQuery, mode: Literal["Q2EA", "QA2E"]) -> str:
    """Build the explanation-collection prompt for one true/false query.

    Q2EA asks for reasoning then answer and never reveals the gold verdict;
    QA2E embeds the verdict and asks for the step-by-step explanation with
    the case-analysis / legal-concept branching.
    """
    if mode == "Q2EA":
        return (
            f"{DISTILL_HEADER}\n\n### Question: {query.query_text}\n\n"
            f"{Q2EA_INSTRUCTION}\n\nOutput:"
        )
    if mode == "QA2E":
        if query.gold is None:
            raise MissingGold(f"QA2E prompt for {query.source_id}:{query.option_label} needs gold")
        directions = QA2E_DIRECTIONS.format(
            verdict="Yes" if query.gold else "No",
            judgment="Correct" if query.gold else "Incorrect",
        )
        return (
            f"{DISTILL_HEADER}\n\n### Question: {query.query_text}\n\n"
            f"{directions}\n\nOutput:"
        )
    raise ValueError(f"unknown distill mode {mode!r}")
