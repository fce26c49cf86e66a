"""Serializing evaluation reports as CSV, Markdown and JSON.

All writers are byte-deterministic: rows keep report order, floats are
written with ``repr`` (CSV/JSON) or fixed precision (Markdown).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from pathlib import Path

from .evaluate import CorpusRow, EvalReport, PageRow

FORMATS = ("csv", "markdown", "json")
SUFFIX = {"csv": ".csv", "markdown": ".md", "json": ".json"}

PAGE_COLUMNS = ("page_id", "engine", "strategy", "crr", "fca", "gt_chars", "seconds", "failed")
CORPUS_COLUMNS = (
    "engine", "detector", "strategy", "crr", "fca", "crr_unweighted", "fca_unweighted",
    "mean_seconds", "pages", "failed_pages",
)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(getattr(row, c)) for c in columns])
    return buf.getvalue()


def pages_csv(report: EvalReport) -> str:
    return _csv(PAGE_COLUMNS, report.pages)


def corpus_csv(report: EvalReport) -> str:
    return _csv(CORPUS_COLUMNS, report.corpus)


def read_pages_csv(text: str) -> list[PageRow]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(
            PageRow(
                page_id=rec["page_id"],
                engine=rec["engine"],
                strategy=rec["strategy"],
                crr=float(rec["crr"]),
                fca=float(rec["fca"]),
                gt_chars=int(rec["gt_chars"]),
                seconds=float(rec["seconds"]) if rec["seconds"] else None,
                failed=rec["failed"] == "1",
            )
        )
    return rows


def _pct(value: float) -> str:
    return f"{100.0 * value:.2f}"


def _engine_cell(row: CorpusRow) -> str:
    return row.engine if row.strategy == "as_is" else f"{row.engine} + {row.strategy}"


def to_markdown(report: EvalReport) -> str:
    """Comparison table in the column order detector, engine, CRR, FCA, seconds."""
    lines = [
        "| Detector | Recognizer / Engine | CRR (↑) | Flex Character Acc. (↑) | Inference Time (s) (↓) |",
        "|---|---|---:|---:|---:|",
    ]
    for row in report.corpus:
        seconds = f"{row.mean_seconds:.2f}" if row.mean_seconds is not None else "-"
        lines.append(
            f"| {row.detector or '-'} | {_engine_cell(row)} | {_pct(row.crr)} | {_pct(row.fca)} | {seconds} |"
        )
    policy = report.config["policy"]
    failed = sum(r.failed_pages for r in report.corpus)
    lines += [
        "",
        f"Metrics are weighted by ground-truth characters; charset: {policy['charset']}, "
        f"case folding: {'on' if policy['case_fold'] else 'off'}."
        + (f" {failed} page(s) scored as empty after engine failures." if failed else ""),
        "",
        f"config digest: `{report.config_digest}`",
    ]
    return "\n".join(lines) + "\n"


def to_json(report: EvalReport) -> str:
    doc = {
        "config": report.config,
        "config_digest": report.config_digest,
        "corpus": [asdict(r) for r in report.corpus],
        "pages": [asdict(r) for r in report.pages],
    }
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def from_json(text: str) -> EvalReport:
    doc = json.loads(text)
    return EvalReport(
        config=doc["config"],
        pages=tuple(PageRow(**r) for r in doc["pages"]),
        corpus=tuple(CorpusRow(**r) for r in doc["corpus"]),
        config_digest=doc["config_digest"],
    )


def emit_report(report: EvalReport, fmt: str, path: str | Path) -> list[Path]:
    """Write ``report`` in ``fmt``; CSV also writes ``<stem>.corpus.csv`` next to the per-page file."""
    path = Path(path)
    if fmt == "csv":
        corpus_path = path.with_name(f"{path.stem}.corpus.csv")
        path.write_text(pages_csv(report), encoding="utf-8")
        corpus_path.write_text(corpus_csv(report), encoding="utf-8")
        return [path, corpus_path]
    if fmt == "markdown":
        path.write_text(to_markdown(report), encoding="utf-8")
        return [path]
    if fmt == "json":
        path.write_text(to_json(report), encoding="utf-8")
        return [path]
    raise ValueError(f"unknown report format {fmt!r}; expected one of {', '.join(FORMATS)}")
