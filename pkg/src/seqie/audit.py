"""Static audit report: per-document extraction listing with sentence text,
highlighted source spans, and ambiguity/malformed flags. Self-contained HTML,
no server, no interactivity."""

from __future__ import annotations

import html
from typing import Sequence

from .corpus import DocumentRecord
from .segmentation import segment

_STYLE = """
body { font-family: sans-serif; margin: 2em; }
h2 { border-bottom: 1px solid #999; padding-bottom: 0.2em; }
table { border-collapse: collapse; margin-bottom: 1.5em; }
td, th { border: 1px solid #ccc; padding: 0.3em 0.6em; text-align: left; }
mark { background: #ffe08a; }
.sent-id { color: #888; font-size: 0.85em; padding-right: 0.5em; }
.flag { color: #b00; font-weight: bold; }
.empty { color: #888; }
"""


def _highlight(text: str, start: int, end: int) -> str:
    return (
        html.escape(text[:start])
        + "<mark>" + html.escape(text[start:end]) + "</mark>"
        + html.escape(text[end:])
    )


def render_report(docs: Sequence[DocumentRecord], extractions: Sequence[dict]) -> str:
    by_doc: dict[str, list[dict]] = {}
    for row in extractions:
        by_doc.setdefault(row["doc_id"], []).append(row)

    parts = [
        "<!DOCTYPE html><html><head><meta charset='utf-8'>",
        "<title>Extraction audit</title>",
        f"<style>{_STYLE}</style></head><body>",
        "<h1>Extraction audit</h1>",
    ]
    for doc in docs:
        rows = by_doc.get(doc.doc_id, [])
        segmented = segment(doc.doc_id, doc.text)
        parts.append(f"<h2>{html.escape(doc.doc_id)} ({html.escape(doc.doc_type)})</h2>")
        parts.append("<table><tr><th>Field</th><th>Value</th><th>Evidence</th>"
                     "<th>Score</th><th>Window</th><th>Flags</th></tr>")
        for row in sorted(rows, key=lambda r: r["field"]):
            flags = []
            if row["status"] == "malformed_all":
                flags.append("all windows malformed")
            span = row.get("span")
            evidence = ""
            if span is not None:
                sentence = segmented.sentence(span["sent_id"])
                evidence = (
                    f"<span class='sent-id'>[SENT{span['sent_id']}]</span>"
                    + _highlight(
                        sentence.text,
                        span["char_start"] - sentence.char_start,
                        span["char_end"] - sentence.char_start,
                    )
                )
                if span.get("ambiguous"):
                    flags.append("ambiguous span")
            elif row.get("sent_id") is not None:
                sentence = segmented.sentence(row["sent_id"])
                evidence = (
                    f"<span class='sent-id'>[SENT{row['sent_id']}]</span>"
                    + html.escape(sentence.text)
                )
            for note in row.get("notes", []):
                flags.append(note)
            value = row.get("value")
            value_html = (
                html.escape(value) if value is not None
                else "<span class='empty'>(empty)</span>"
            )
            score = row.get("score")
            parts.append(
                "<tr>"
                f"<td>{html.escape(row['field'])}</td>"
                f"<td>{value_html}</td>"
                f"<td>{evidence}</td>"
                f"<td>{'' if score is None else f'{score:.4f}'}</td>"
                f"<td>{'' if row.get('window') is None else row['window']}</td>"
                f"<td class='flag'>{html.escape('; '.join(flags))}</td>"
                "</tr>"
            )
        parts.append("</table>")
    parts.append("</body></html>")
    return "\n".join(parts)


def write_report(path, docs: Sequence[DocumentRecord], extractions: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_report(docs, extractions))
