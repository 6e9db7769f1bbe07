"""Assembly of consultation SFT examples with distractor injection."""

import random
from typing import Sequence

from ..corpus import Article
from ..errors import OverlapError
from .types import SFTExample

LAWYER_ROLE_INSTRUCTION = (
    "You are a lawyer responding to a client's consultation. Your response must: "
    "(1) properly cite legal articles; "
    "(2) give well-founded analyses based on the facts of the case and the legal articles; "
    "(3) respond comprehensively and analyze the potential possibilities; "
    "(4) ask appropriate questions to dig out facts that assist in further answers; "
    "(5) use plain language; "
    "(6) give preliminary legal opinions and consulting conclusions."
)

IRRELEVANCE_DISCLAIMER = (
    "There may be irrelevant articles in the reference articles, so please avoid "
    "quoting those unrelated ones when replying."
)


def format_article(article: Article) -> str:
    ref = f"《{article.law_title}》第{article.article_no}条"
    if article.paragraph_no is not None:
        ref += f"第{article.paragraph_no}款"
    return f"{ref}：{article.text}"


def build_consult_sft(
    question: str,
    gold_articles: Sequence[Article],
    distractors: Sequence[Article],
    response: str | None = None,
    seed: int = 0,
    role_instruction: str = LAWYER_ROLE_INSTRUCTION,
    include_disclaimer: bool = True,
) -> SFTExample:
    """Build one consultation SFT record.

    Context is gold plus distractor articles, shuffled deterministically by
    seed; the input embeds the six-requirement lawyer instruction, every
    context article and the client question. Only gold articles carry
    relevant=True.
    """
    gold_keys = {a.key for a in gold_articles}
    distractor_keys = {a.key for a in distractors}
    overlap = gold_keys & distractor_keys
    if overlap:
        raise OverlapError(f"gold and distractor articles overlap: {sorted(overlap)[0]}")

    context = [(a, True) for a in gold_articles] + [(a, False) for a in distractors]
    random.Random(seed).shuffle(context)

    lines = [role_instruction]
    if context:
        lines.append("Reference articles:")
        for i, (article, _) in enumerate(context, 1):
            lines.append(f"({i}) {format_article(article)}")
        if include_disclaimer:
            lines.append(IRRELEVANCE_DISCLAIMER)
    lines.append(f"Client: {question}")
    input_text = "\n".join(lines)

    return SFTExample(
        kind="CONSULT",
        input_text=input_text,
        target_text=response,
        context_articles=tuple((a.key, relevant) for a, relevant in context),
        seed_meta={"seed": seed, "n_gold": len(gold_articles), "n_distractors": len(distractors)},
    )
