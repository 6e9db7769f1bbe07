"""Inference prompt composition for consultation turns.

With reference articles the prompt carries the lawyer-role instruction, the
enumerated articles, the irrelevance disclaimer, condensed history and the
question; with zero articles (the retrieval-free condition) the reference
block and disclaimer are omitted entirely. Templates are configurable and
frozen by golden files.
"""

from dataclasses import dataclass, field
from typing import Sequence

from ..corpus import Article
from ..errors import EmptyQuery
from ..forge.consult_sft import IRRELEVANCE_DISCLAIMER, LAWYER_ROLE_INSTRUCTION, format_article


@dataclass(frozen=True)
class ConsultPromptConfig:
    role_instruction: str = LAWYER_ROLE_INSTRUCTION
    disclaimer: str = IRRELEVANCE_DISCLAIMER
    reference_header: str = "Reference articles:"
    client_prefix: str = "Client: "
    lawyer_prefix: str = "Lawyer: "
    history_budget: int = 4000


DEFAULT_PROMPT_CONFIG = ConsultPromptConfig()


@dataclass(frozen=True)
class HistoryTurn:
    user_message: str
    answer: str


def condense_history(
    history: Sequence[HistoryTurn], config: ConsultPromptConfig
) -> list[str]:
    """Prior turns rendered verbatim, oldest dropped first past the
    character budget."""
    rendered = [
        f"{config.client_prefix}{turn.user_message}\n{config.lawyer_prefix}{turn.answer}"
        for turn in history
    ]
    kept: list[str] = []
    used = 0
    for block in reversed(rendered):
        if used + len(block) > config.history_budget:
            break
        kept.append(block)
        used += len(block)
    kept.reverse()
    return kept


def compose_inference_prompt(
    question: str,
    articles: Sequence[Article] = (),
    history: Sequence[HistoryTurn] = (),
    config: ConsultPromptConfig = DEFAULT_PROMPT_CONFIG,
) -> str:
    """Deterministically compose the consultation prompt for one turn."""
    if not question or not question.strip():
        raise EmptyQuery("consultation question is empty")
    blocks = [config.role_instruction]
    if articles:
        reference_lines = [config.reference_header]
        for i, article in enumerate(articles, 1):
            reference_lines.append(f"({i}) {format_article(article)}")
        reference_lines.append(config.disclaimer)
        blocks.append("\n".join(reference_lines))
    blocks.extend(condense_history(history, config))
    blocks.append(f"{config.client_prefix}{question.strip()}\n{config.lawyer_prefix.rstrip()}")
    return "\n\n".join(blocks)
