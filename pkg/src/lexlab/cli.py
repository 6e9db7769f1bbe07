"""Command-line entry points for the toolkit."""

import json
import sys
from pathlib import Path

import click

from . import audit as audit_mod
from . import corpus as corpus_mod
from . import evaluation, humaneval
from . import retrieval as retrieval_mod
from .consult.api import create_app
from .consult.service import ConsultService, JsonlSessionStore, run_condition_batch
from .errors import LexlabError
from .forge import benchmarks, consult_sft, prompts, transform
from .forge.types import MCQItem, TrueFalseQuery
from .gateway import (
    BackendConfig,
    MockBackend,
    MockPolicy,
    build_backend,
    load_backend_config,
)


def _read_jsonl(path: str):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def _write_jsonl(path: str, records) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            n += 1
    return n


def _backend_from_file(path: str):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if raw.get("kind") == "MOCK":
        policy_raw = raw.get("default_policy", {"kind": "error"})
        policy = MockPolicy(
            kind=policy_raw.get("kind", "error"),
            text=policy_raw.get("text", ""),
            per_token_logprob=float(policy_raw.get("per_token_logprob", -1.0)),
        )
        table = {
            digest: tuple(value) if isinstance(value, list) else value
            for digest, value in raw.get("table", {}).items()
        }
        return MockBackend(table=table, default_policy=policy)
    return build_backend(load_backend_config(path))


@click.group()
def main():
    """lexlab: statute indexing, retrieval, dataset forging, evaluation,
    citation auditing and consultation serving."""


@main.command()
@click.option("--statutes", required=True, type=click.Path(exists=True))
@click.option("--aliases", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def ingest(statutes, aliases, out_path):
    """Build an article index from a statutes JSONL file."""
    alias_table = None
    if aliases:
        alias_table = json.loads(Path(aliases).read_text(encoding="utf-8"))
    index = corpus_mod.ingest_statutes(corpus_mod.read_statutes_jsonl(statutes), alias_table)
    corpus_mod.save_index(index, out_path)
    stats = index.build_stats
    click.echo(f"ingested {stats.ingested} articles, rejected {stats.rejected}")
    for reason, count in stats.reject_reasons.most_common():
        click.echo(f"  rejected {count}: {reason}", err=True)


@main.command()
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("-q", "--query", required=True)
@click.option("-k", default=3, show_default=True)
def retrieve(index_path, query, k):
    """Rank articles for a query."""
    article_index = corpus_mod.load_index(index_path)
    lexical = retrieval_mod.build_lexical_index(article_index)
    result = retrieval_mod.retrieve(lexical, query, k)
    for rank, (key, score) in enumerate(result.ranked, 1):
        designation = f"《{key.law_title}》第{key.article_no}条"
        if key.paragraph_no:
            designation += f"第{key.paragraph_no}款"
        click.echo(f"{rank}. {designation}  score={score:.4f}")


@main.command("retriever-eval")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--gold", required=True, type=click.Path(exists=True))
@click.option("--k", "ks", default="1,3", show_default=True, help="comma-separated cutoffs")
def retriever_eval(index_path, gold, ks):
    """Macro-Recall@k of the lexical retriever against gold annotations."""
    article_index = corpus_mod.load_index(index_path)
    lexical = retrieval_mod.build_lexical_index(article_index)
    annotations = retrieval_mod.load_gold_jsonl(gold)
    cutoffs = [int(x) for x in ks.split(",") if x.strip()]
    metrics = retrieval_mod.evaluate_retrieval(lexical, annotations, cutoffs)
    click.echo(json.dumps(
        {str(k): v for k, v in sorted(metrics.macro_recall_at.items())}, indent=2
    ))


@main.group()
def forge():
    """Dataset construction commands."""


@forge.command("transform")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def forge_transform(in_path, out_path):
    """Fuse MCQ stem+option pairs into true/false queries via the pattern
    table, then apply the banned-word and length gates."""
    kept = []
    n_pairs = 0
    n_rejected = 0
    n_dropped = 0
    for record in _read_jsonl(in_path):
        item = MCQItem.from_json(record)
        for label in sorted(item.options):
            n_pairs += 1
            result = transform.transform_mcq_regex(item, label)
            if isinstance(result, transform.Rejected):
                n_rejected += 1
                continue
            decision = transform.filter_transferred_query(result.query_text)
            if decision.keep:
                decision = transform.length_gate(result.query_text)
            if not decision.keep:
                n_dropped += 1
                continue
            kept.append(result.to_json())
    _write_jsonl(out_path, kept)
    click.echo(
        f"{n_pairs} pairs: {len(kept)} kept, {n_rejected} unmatched, {n_dropped} filtered"
    )


def _distill_command(mode):
    @click.option("--in", "in_path", required=True, type=click.Path(exists=True))
    @click.option("--out", "out_path", required=True, type=click.Path())
    def command(in_path, out_path):
        records = []
        for record in _read_jsonl(in_path):
            query = TrueFalseQuery.from_json(record)
            records.append(
                {
                    "source_id": query.source_id,
                    "option": query.option_label,
                    "mode": mode,
                    "prompt": prompts.build_distill_prompt(query, mode),
                }
            )
        n = _write_jsonl(out_path, records)
        click.echo(f"wrote {n} {mode} prompts")

    command.__doc__ = f"Emit {mode} distillation prompt records for the gateway."
    return command


forge.command("q2ea")(_distill_command("Q2EA"))
forge.command("qa2e")(_distill_command("QA2E"))


@forge.command("consult")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--distractors", default=2, show_default=True)
@click.option("--seed", default=0, show_default=True)
def forge_consult(in_path, out_path, index_path, distractors, seed):
    """Assemble consultation SFT examples with distractor injection."""
    article_index = corpus_mod.load_index(index_path)
    lexical = retrieval_mod.build_lexical_index(article_index)
    records = []
    for i, record in enumerate(_read_jsonl(in_path)):
        gold_keys = [
            corpus_mod.CitationKey(g["title"], int(g["article"]), g.get("paragraph"))
            for g in record["gold"]
        ]
        gold_articles = [article_index.lookup(key) for key in gold_keys]
        gold_articles = [a for a in gold_articles if a is not None]
        distractor_keys = retrieval_mod.sample_distractors(
            lexical, record["question"], {a.key for a in gold_articles}, distractors, seed + i
        )
        distractor_articles = [article_index.lookup(key) for key in distractor_keys]
        example = consult_sft.build_consult_sft(
            record["question"],
            gold_articles,
            [a for a in distractor_articles if a is not None],
            response=record.get("response"),
            seed=seed + i,
        )
        records.append(example.to_json())
    n = _write_jsonl(out_path, records)
    click.echo(f"wrote {n} consultation SFT examples")


@forge.command("jem")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def forge_jem(in_path, out_path):
    """Convert MCQs into four true/false evaluation items each."""
    records = []
    for record in _read_jsonl(in_path):
        for item in benchmarks.build_jem_items(MCQItem.from_json(record)):
            records.append(item.to_json())
    n = _write_jsonl(out_path, records)
    click.echo(f"wrote {n} items")


@forge.command("charges")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--n", "n_per_charge", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
def forge_charges(in_path, out_path, n_per_charge, seed):
    """Build the nine-charge prediction benchmark from judgment documents."""
    documents = (benchmarks.ChargeDocument.from_json(r) for r in _read_jsonl(in_path))
    items = benchmarks.build_charge_benchmark(
        documents, n_per_charge=n_per_charge, seed=seed
    )
    _write_jsonl(out_path, (item.to_json() for item in items))
    click.echo(benchmarks.render_charge_report(items))


@main.command("eval")
@click.option("--items", "items_path", required=True, type=click.Path(exists=True))
@click.option("--backend", "backend_path", required=True, type=click.Path(exists=True))
@click.option("--meta", "meta_spec", default="", help="comma-separated k=v pairs")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--strict", is_flag=True, help="count failed items as incorrect")
def eval_command(items_path, backend_path, meta_spec, out_path, strict):
    """Lowest-perplexity multi-choice evaluation."""
    pairs = dict(p.split("=", 1) for p in meta_spec.split(",") if "=" in p)
    meta = evaluation.EvalRunMeta(
        run_id=pairs.get("run_id", Path(items_path).stem),
        dataset_name=pairs.get("dataset", Path(items_path).stem),
        stage_tag=pairs.get("stage"),
        with_retrieval=pairs.get("retrieval", "false").lower() == "true",
        backend_descriptor=backend_path,
    )
    backend = _backend_from_file(backend_path)
    items = evaluation.load_items_jsonl(items_path)
    report = evaluation.eval_multichoice(backend, items, meta, strict=strict)
    Path(out_path).write_text(
        json.dumps(report.to_json(), ensure_ascii=False, indent=2), encoding="utf-8"
    )
    click.echo(f"accuracy {report.accuracy * 100:.2f}% over {report.n_scored} items")
    if report.n_failed:
        click.echo(f"warning: {report.n_failed} items failed scoring", err=True)


@main.group()
def report():
    """Render aggregated human-evaluation reports."""


@report.command("rankings")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--systems", required=True, help="comma-separated system ids")
def report_rankings(in_path, systems):
    records = humaneval.load_rank_records_jsonl(in_path)
    summary = humaneval.aggregate_rankings(records, systems.split(","))
    click.echo(json.dumps(summary.to_json(), ensure_ascii=False, indent=2))
    click.echo(humaneval.render_ranking_summary(summary))


@report.command("pairwise")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--names", default="A,B", show_default=True)
def report_pairwise(in_path, names):
    records = humaneval.load_pairwise_jsonl(in_path)
    rates = humaneval.pairwise_winrate(records)
    a_name, b_name = names.split(",", 1)
    click.echo(json.dumps({"A": rates[0], "B": rates[1], "draw": rates[2]}, indent=2))
    click.echo(humaneval.render_pairwise(a_name, b_name, rates))


@report.command("accuracy")
@click.option("--in", "in_paths", required=True, multiple=True, type=click.Path(exists=True))
def report_accuracy(in_paths):
    """Merge eval reports into one stage-by-dataset accuracy table."""
    rows = []
    for path in in_paths:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        meta = payload["meta"]
        rows.append(
            (meta.get("stage") or meta.get("run_id") or Path(path).stem,
             meta.get("dataset") or Path(path).stem,
             payload["accuracy"])
        )
    datasets = []
    for _, dataset, _ in rows:
        if dataset not in datasets:
            datasets.append(dataset)
    by_stage: dict[str, dict[str, float]] = {}
    for stage, dataset, accuracy in rows:
        by_stage.setdefault(stage, {})[dataset] = accuracy
    lines = ["| stage | " + " | ".join(datasets) + " |",
             "| --- |" + " ---: |" * len(datasets)]
    for stage in sorted(by_stage):
        cells = [
            f"{by_stage[stage][d] * 100:.2f}" if d in by_stage[stage] else "—"
            for d in datasets
        ]
        lines.append(f"| {stage} | " + " | ".join(cells) + " |")
    click.echo("\n".join(lines))


@report.command("redundancy")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
def report_redundancy(in_path):
    """Redundancy rates from human judgments ({question_id, model?, redundant})."""
    by_model: dict[str, list[humaneval.RedundancyJudgment]] = {}
    for record in _read_jsonl(in_path):
        by_model.setdefault(record.get("model", "all"), []).append(
            humaneval.RedundancyJudgment(str(record["question_id"]), bool(record["redundant"]))
        )
    rows = {model: humaneval.redundancy_rate(js) for model, js in sorted(by_model.items())}
    click.echo(json.dumps(rows, indent=2))
    click.echo(humaneval.render_redundancy_table(rows))


@report.command("hallu")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", default=audit_mod.DEFAULT_SIM_THRESHOLD, show_default=True)
def report_hallu(in_path, index_path, threshold):
    """Audit responses grouped by model and report hallucination shares."""
    article_index = corpus_mod.load_index(index_path)
    by_model: dict[str, list] = {}
    for record in _read_jsonl(in_path):
        model = record.get("model", "all")
        audit = audit_mod.audit_response(record["text"], article_index, threshold)
        by_model.setdefault(model, []).append((record["text"], audit))
    rows = {}
    for model, audited in sorted(by_model.items()):
        try:
            rows[model] = humaneval.hallucination_proportions(audited)
        except LexlabError:
            rows[model] = (0.0, 0.0)
    click.echo(json.dumps({m: {"h1": r[0], "h2": r[1]} for m, r in rows.items()}, indent=2))
    click.echo(humaneval.render_hallucination_table(rows))


@main.command("audit")
@click.option("--responses", "responses_path", required=True, type=click.Path(exists=True))
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", default=audit_mod.DEFAULT_SIM_THRESHOLD, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def audit_command(responses_path, index_path, threshold, out_path):
    """Audit responses ({id, text} JSONL) for citation hallucinations."""
    article_index = corpus_mod.load_index(index_path)
    n_citing = n_h1 = n_h2 = 0
    records = []
    for record in _read_jsonl(responses_path):
        audit = audit_mod.audit_response(record["text"], article_index, threshold)
        for finding in audit.findings:
            records.append({"id": record["id"], **finding.to_json()})
        if audit.findings:
            n_citing += 1
            n_h1 += audit.has_h1
            n_h2 += audit.has_h2
    records.append(
        {
            "summary": True,
            "responses_with_citations": n_citing,
            "h1_pct": 100.0 * n_h1 / n_citing if n_citing else 0.0,
            "h2_pct": 100.0 * n_h2 / n_citing if n_citing else 0.0,
        }
    )
    _write_jsonl(out_path, records)
    click.echo(f"audited: {n_citing} citing responses, H1 in {n_h1}, H2 in {n_h2}")


def _build_service(index_path, backend_path, data_dir=None, k=3):
    article_index = corpus_mod.load_index(index_path)
    lexical = retrieval_mod.build_lexical_index(article_index)
    backend = _backend_from_file(backend_path)
    store = JsonlSessionStore(data_dir) if data_dir else None
    return ConsultService(article_index, lexical, backend, k=k, store=store)


@main.command()
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--backend", "backend_path", required=True, type=click.Path(exists=True))
@click.option("--data-dir", type=click.Path(), help="session persistence directory")
@click.option("--console", "console_dir", type=click.Path(), help="static console bundle")
@click.option("--systems", help="comma-separated system ids for the ranking workbench")
def serve(port, host, index_path, backend_path, data_dir, console_dir, systems):
    """Run the consultation HTTP service."""
    import uvicorn

    service = _build_service(index_path, backend_path, data_dir)
    app = create_app(
        service,
        systems=systems.split(",") if systems else None,
        console_dir=console_dir,
    )
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("-q", "--question", required=True)
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--backend", "backend_path", required=True, type=click.Path(exists=True))
@click.option("-k", default=3, show_default=True)
def consult(question, index_path, backend_path, k):
    """One-shot consultation from the terminal."""
    service = _build_service(index_path, backend_path, k=k)
    session = service.create_session()
    turn = service.consult(session.session_id, question)
    if turn.failed:
        click.echo(f"failed: {turn.error}", err=True)
        sys.exit(1)
    click.echo(turn.answer)
    if turn.audit.findings:
        click.echo("-- citations --", err=True)
        for finding in turn.audit.findings:
            key = finding.citation
            click.echo(
                f"  [{finding.verdict}] {key.law_title} art.{key.article_no}", err=True
            )


@main.command("batch")
@click.option("--questions", "questions_path", required=True, type=click.Path(exists=True))
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--backend", "backend_path", required=True, type=click.Path(exists=True))
@click.option("--retrieval/--no-retrieval", default=True, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def batch(questions_path, index_path, backend_path, retrieval, out_path):
    """Generate the no-reference/with-reference response batch for audit."""
    article_index = corpus_mod.load_index(index_path)
    lexical = retrieval_mod.build_lexical_index(article_index)
    backend = _backend_from_file(backend_path)
    questions = [r["question"] for r in _read_jsonl(questions_path)]
    responses = run_condition_batch(
        questions, retrieval, backend, article_index, lexical
    )
    n = _write_jsonl(out_path, (r.to_json() for r in responses))
    click.echo(f"wrote {n} responses ({'r1' if retrieval else 'r0'})")


if __name__ == "__main__":
    main()
