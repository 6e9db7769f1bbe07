"""Aggregation of human-evaluation ballots and hallucination statistics:
rank proportions with draws, pairwise win rates, the share of
article-mentioning responses carrying each hallucination type, and
redundancy rates."""

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .audit import AuditReport
from .errors import MalformedBallot, NoData


@dataclass(frozen=True)
class HumanRankRecord:
    """One ballot: either a full ranking of the systems or a draw."""

    question_id: str
    entries: tuple[tuple[str, int], ...] = ()
    draw: bool = False

    @classmethod
    def from_json(cls, record: dict) -> "HumanRankRecord":
        return cls(
            question_id=str(record["question_id"]),
            entries=tuple(
                (e["system_id"], int(e["rank"])) for e in record.get("entries", [])
            ),
            draw=bool(record.get("draw", False)),
        )

    def to_json(self) -> dict:
        return {
            "question_id": self.question_id,
            "entries": [{"system_id": s, "rank": r} for s, r in self.entries],
            "draw": self.draw,
        }


@dataclass
class RankingSummary:
    """Per-system rank proportions plus the shared draw share.

    For every system the rank proportions and the draw proportion sum to 1
    (draws count in every system's denominator).
    """

    systems: list[str]
    proportions: dict[str, dict[int, float]]
    draw: float
    n_records: int

    def to_json(self) -> dict:
        return {
            "systems": self.systems,
            "proportions": {
                system: {str(rank): p for rank, p in sorted(ranks.items())}
                for system, ranks in self.proportions.items()
            },
            "draw": self.draw,
            "n_records": self.n_records,
        }


def aggregate_rankings(
    records: Sequence[HumanRankRecord], systems: Sequence[str]
) -> RankingSummary:
    """Aggregate ballots into Figure-style rank proportions.

    Every non-draw ballot must rank exactly the given systems with ranks
    forming a permutation of 1..n.
    """
    if not records:
        raise NoData("no ranking ballots")
    systems = list(systems)
    n = len(systems)
    counts = {system: {rank: 0 for rank in range(1, n + 1)} for system in systems}
    draws = 0
    for record in records:
        if record.draw:
            if record.entries:
                raise MalformedBallot(record.question_id, "draw ballots must not rank")
            draws += 1
            continue
        ranked_systems = [s for s, _ in record.entries]
        if sorted(ranked_systems) != sorted(systems):
            raise MalformedBallot(record.question_id, "ballot systems do not match")
        ranks = sorted(r for _, r in record.entries)
        if ranks != list(range(1, n + 1)):
            raise MalformedBallot(record.question_id, f"ranks {ranks} are not a permutation")
        for system, rank in record.entries:
            counts[system][rank] += 1
    total = len(records)
    return RankingSummary(
        systems=systems,
        proportions={
            system: {rank: counts[system][rank] / total for rank in range(1, n + 1)}
            for system in systems
        },
        draw=draws / total,
        n_records=total,
    )


def render_ranking_summary(summary: RankingSummary) -> str:
    """Markdown table shaped like a stacked ranking figure."""
    n = len(summary.systems)
    header = "| system | " + " | ".join(f"rank {r} %" for r in range(1, n + 1)) + " | draw % |"
    lines = [header, "| --- |" + " ---: |" * (n + 1)]
    for system in summary.systems:
        cells = [f"{summary.proportions[system][r] * 100:.2f}" for r in range(1, n + 1)]
        lines.append(f"| {system} | " + " | ".join(cells) + f" | {summary.draw * 100:.2f} |")
    return "\n".join(lines)


@dataclass(frozen=True)
class PairwiseRecord:
    question_id: str
    winner: str  # "A", "B" or "draw"


def pairwise_winrate(records: Sequence[PairwiseRecord]) -> tuple[float, float, float]:
    """Percentages (A wins, B wins, draws) over all pairwise ballots."""
    if not records:
        raise NoData("no pairwise ballots")
    for record in records:
        if record.winner not in ("A", "B", "draw"):
            raise MalformedBallot(record.question_id, f"bad winner {record.winner!r}")
    total = len(records)
    a = sum(1 for r in records if r.winner == "A")
    b = sum(1 for r in records if r.winner == "B")
    draw = total - a - b
    return (100.0 * a / total, 100.0 * b / total, 100.0 * draw / total)


def render_pairwise(a_name: str, b_name: str, rates: tuple[float, float, float]) -> str:
    return (
        f"| outcome | % |\n| --- | ---: |\n"
        f"| {a_name} better | {rates[0]:.2f} |\n"
        f"| {b_name} better | {rates[1]:.2f} |\n"
        f"| draw | {rates[2]:.2f} |"
    )


def hallucination_proportions(
    responses: Sequence[tuple[str, AuditReport]],
) -> tuple[float, float]:
    """Percent of article-mentioning responses carrying each hallucination.

    The denominator is the responses whose audit found at least one
    citation; the two percentages are independent (a response can count in
    both).
    """
    citing = [report for _, report in responses if report.findings]
    if not citing:
        raise NoData("no responses mention articles")
    h1 = sum(1 for report in citing if report.has_h1)
    h2 = sum(1 for report in citing if report.has_h2)
    return (100.0 * h1 / len(citing), 100.0 * h2 / len(citing))


def render_hallucination_table(rows: Mapping[str, tuple[float, float]]) -> str:
    """Markdown table: one model/condition per row, fabricated-article and
    wrong-attribution percentages as columns."""
    lines = ["| model | H1 % | H2 % |", "| --- | ---: | ---: |"]
    for name, (h1, h2) in rows.items():
        lines.append(f"| {name} | {h1:.1f} | {h2:.1f} |")
    return "\n".join(lines)


@dataclass(frozen=True)
class RedundancyJudgment:
    question_id: str
    redundant: bool


def redundancy_rate(judgments: Sequence[RedundancyJudgment]) -> float:
    """Percent of responses human-annotated as using unnecessary articles."""
    if not judgments:
        raise NoData("no redundancy judgments")
    return 100.0 * sum(1 for j in judgments if j.redundant) / len(judgments)


def render_redundancy_table(rows: Mapping[str, float]) -> str:
    """Markdown table: redundant-response percentage per model/condition."""
    lines = ["| model | redundant % |", "| --- | ---: |"]
    for name, rate in rows.items():
        lines.append(f"| {name} | {rate:.1f} |")
    return "\n".join(lines)


def distractor_citation_rate(
    audited: Sequence[tuple[AuditReport, frozenset]],
) -> float:
    """Automated redundancy proxy: percent of responses citing a known
    distractor key. A proxy for the human judgment, not a claim of
    agreement with it."""
    if not audited:
        raise NoData("no audited responses")
    hits = 0
    for report, distractor_keys in audited:
        cited = {
            (f.citation.law_title, f.citation.article_no)
            for f in report.findings
            if f.citation.article_no is not None
        }
        if any((k.law_title, k.article_no) in cited for k in distractor_keys):
            hits += 1
    return 100.0 * hits / len(audited)


@dataclass
class BallotStore:
    """Append-only in-memory ballot collection used by the service layer."""

    records: list[HumanRankRecord] = field(default_factory=list)

    def add(self, record: HumanRankRecord) -> None:
        self.records.append(record)

    def summary(self, systems: Sequence[str]) -> RankingSummary:
        return aggregate_rankings(self.records, systems)


def load_rank_records_jsonl(path: str) -> list[HumanRankRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(HumanRankRecord.from_json(json.loads(line)))
    return records


def load_pairwise_jsonl(path: str) -> list[PairwiseRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                raw = json.loads(line)
                records.append(PairwiseRecord(str(raw["question_id"]), raw["winner"]))
    return records
