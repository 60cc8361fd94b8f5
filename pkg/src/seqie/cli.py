"""Command-line interface: ie prepare | extract | evaluate | audit | ner-export.

Exit codes: 0 success, 1 hard failure, 2 partial (some documents failed).
"""

from __future__ import annotations

import json
import logging
import sys

import click

from . import __version__
from .backend import (
    ApproxTokenCounter,
    OracleBackend,
    RemoteBackend,
    RemoteTokenCounter,
)
from .corpus import (
    RunManifest,
    hash_file,
    read_documents,
    read_jsonl,
    write_jsonl,
    write_manifest,
)
from .errors import SeqIEError
from .ner_export import reduce_corpus, write_conll
from .pipeline import (
    DEFAULT_BUDGET,
    DEFAULT_BUDGET_SAFETY,
    effective_budget,
    evaluate_predictions,
    run_extraction,
)
from .prompting import build_prompts, build_training_target
from .schema import load_schema, schema_index
from .segmentation import segment

logger = logging.getLogger(__name__)

variant_flags = [
    click.option("--compound/--no-compound", "use_compound", default=None,
                 help="Force compound groups on/off (default: per schema)."),
    click.option("--sent/--no-sent", "use_sent", default=None,
                 help="Force sentence-ID contexts on/off (default: per schema)."),
    click.option("--raw/--no-raw", "use_raw", default=None,
                 help="Force raw-text answer suffixes on/off (default: per schema)."),
]


def add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@click.group()
@click.version_option(version=__version__, prog_name="ie")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose: bool):
    """Structured field extraction from documents with a QA seq2seq model."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--docs", "docs_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--budget", default=DEFAULT_BUDGET, show_default=True,
              help="Token budget for context + question.")
@click.option("--budget-safety", default=DEFAULT_BUDGET_SAFETY, show_default=True,
              help="Fraction of the budget usable under approximate counting.")
@add_options(variant_flags)
def prepare(schema_path, docs_path, out_path, budget, budget_safety,
            use_compound, use_sent, use_raw):
    """Generate training examples (question, context, target) as JSONL."""
    schemas = load_schema(schema_path)
    index = schema_index(schemas)
    docs = read_documents(docs_path)
    counter = ApproxTokenCounter()
    budget = effective_budget(budget, budget_safety)

    rows = []
    errors = 0
    for doc in docs:
        schema = index.get(doc.doc_type)
        if schema is None:
            click.echo(f"error: {doc.doc_id}: no schema for doc type {doc.doc_type!r}",
                       err=True)
            errors += 1
            continue
        segmented = segment(doc.doc_id, doc.text)
        annotations = doc.annotation_map()
        compound = True if use_compound is None else use_compound
        units = {u.name: u for u in schema.question_units(use_compound=compound)}
        instances = build_prompts(
            segmented, schema, budget, counter,
            use_compound=use_compound, use_sent=use_sent, use_raw=use_raw,
        )
        for instance in instances:
            try:
                target = build_training_target(
                    instance, units[instance.unit_name], annotations, segmented
                )
            except SeqIEError as exc:
                click.echo(f"error: {doc.doc_id}/{instance.unit_name}: {exc}", err=True)
                errors += 1
                continue
            rows.append({
                "doc_id": instance.doc_id,
                "field": instance.unit_name,
                "window": instance.window_index,
                "question": instance.question,
                "context": instance.context,
                "target": target,
            })
    count = write_jsonl(out_path, rows)
    click.echo(f"wrote {count} training examples to {out_path}")
    if errors:
        sys.exit(2)


@main.command()
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--docs", "docs_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--backend-url", envvar="IE_BACKEND_URL", default=None,
              help="Inference server base URL (env: IE_BACKEND_URL).")
@click.option("--oracle", is_flag=True,
              help="Answer from gold annotations instead of a model.")
@click.option("--budget", default=DEFAULT_BUDGET, show_default=True)
@click.option("--budget-safety", default=DEFAULT_BUDGET_SAFETY, show_default=True)
@click.option("--remote-tokenizer", is_flag=True,
              help="Count tokens via the server's /v1/tokenize (no safety factor).")
@click.option("--beams", default=5, show_default=True)
@click.option("--max-new-tokens", default=256, show_default=True)
@click.option("--workers", default=4, show_default=True)
@add_options(variant_flags)
def extract(schema_path, docs_path, out_path, backend_url, oracle, budget,
            budget_safety, remote_tokenizer, beams, max_new_tokens, workers,
            use_compound, use_sent, use_raw):
    """Run extraction and write one JSON object per field, plus a manifest."""
    schemas = load_schema(schema_path)
    docs = read_documents(docs_path)

    if oracle:
        backend = OracleBackend(schemas, docs)
        counter = ApproxTokenCounter()
        working_budget = effective_budget(budget, budget_safety)
    elif backend_url:
        backend = RemoteBackend(backend_url, num_beams=beams,
                                max_new_tokens=max_new_tokens)
        try:
            health = backend.health()
        except SeqIEError as exc:
            click.echo(f"error: backend not healthy: {exc}", err=True)
            sys.exit(1)
        logger.info("backend healthy: %s", health)
        if remote_tokenizer:
            counter = RemoteTokenCounter(backend)
            working_budget = budget
        else:
            counter = ApproxTokenCounter()
            working_budget = effective_budget(budget, budget_safety)
    else:
        click.echo("error: provide --backend-url (or IE_BACKEND_URL) or --oracle",
                   err=True)
        sys.exit(1)

    try:
        rows, failures = run_extraction(
            docs, schemas, backend, counter, budget=working_budget,
            workers=workers, use_compound=use_compound, use_sent=use_sent,
            use_raw=use_raw,
        )
    except SeqIEError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    count = write_jsonl(out_path, rows)
    manifest = RunManifest(
        schema_sha256=hash_file(schema_path),
        backend=backend.identity,
        num_beams=beams,
        max_new_tokens=max_new_tokens,
        budget=budget,
        budget_safety=1.0 if (not oracle and remote_tokenizer) else budget_safety,
    )
    manifest_path = str(out_path) + ".manifest.json"
    write_manifest(manifest_path, manifest)
    click.echo(f"wrote {count} extractions to {out_path} (manifest: {manifest_path})")
    for failure in failures:
        click.echo(f"failed: {failure.doc_id}: {failure.error}", err=True)
    if failures:
        sys.exit(2 if rows else 1)


@main.command()
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True),
              help="Extraction JSONL from `ie extract`.")
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True),
              help="Gold document JSONL.")
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Write the full report JSON here.")
def evaluate(pred_path, gold_path, schema_path, out_path):
    """Score predictions: per-field, per-dataset and average EM / token F1."""
    schemas = load_schema(schema_path)
    gold_docs = read_documents(gold_path)
    report = evaluate_predictions(pred_path, gold_docs, schemas)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, ensure_ascii=False)
            fh.write("\n")
    for name, data in report["datasets"].items():
        click.echo(f"{name}: EM {data['em']:.1f}  F1 {data['f1']:.1f}  "
                   f"(micro EM {data['em_micro']:.1f}, F1 {data['f1_micro']:.1f})")
    click.echo(f"Avg: EM {report['average']['em']:.1f}  F1 {report['average']['f1']:.1f}")
    if report["missing_documents"]:
        click.echo("missing predictions for: "
                   + ", ".join(report["missing_documents"]), err=True)
        sys.exit(2)


@main.command()
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--docs", "docs_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def audit(pred_path, docs_path, out_path):
    """Write a self-contained static HTML audit report."""
    from .audit import write_report

    docs = read_documents(docs_path)
    extractions = list(read_jsonl(pred_path))
    write_report(out_path, docs, extractions)
    click.echo(f"wrote audit report to {out_path}")


@main.command("ner-export")
@click.option("--docs", "docs_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="CoNLL output file; a .report.json is written alongside.")
@click.option("--overlap-threshold", default=0.01, show_default=True,
              help="Max fraction of documents in which a field class may "
                   "overlap other classes before it is dropped.")
def ner_export(docs_path, out_path, overlap_threshold):
    """Reduce the corpus for NER and export CoNLL-style BIO files."""
    docs = read_documents(docs_path)
    reduced, report = reduce_corpus(docs, overlap_threshold=overlap_threshold)
    count = write_conll(out_path, reduced)
    report_path = str(out_path) + ".report.json"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(
        f"wrote {count} documents to {out_path} "
        f"(retention {report.document_retention:.1%}, "
        f"{report.kept_fields}/{report.total_fields} fields; report: {report_path})"
    )


if __name__ == "__main__":
    main()
