"""Scoring prediction corpora against ground truth."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..ingest import NormalizationPolicy, normalized_lines
from ..metrics import FcaParams, aggregate, fca, page_crr
from ..model import Corpus, PageAnnotation
from ..ordering import AS_IS, BLIND, REFERENCE, OrderingStrategy, apply_strategy
from .engine import TimingRecord


class UnknownPage(KeyError):
    pass


@dataclass(frozen=True)
class PageRow:
    page_id: str
    engine: str
    strategy: str
    crr: float
    fca: float
    gt_chars: int
    seconds: float | None = None
    failed: bool = False


@dataclass(frozen=True)
class CorpusRow:
    engine: str
    detector: str
    strategy: str
    crr: float
    fca: float
    crr_unweighted: float
    fca_unweighted: float
    mean_seconds: float | None
    pages: int
    failed_pages: int


@dataclass(frozen=True)
class EvalReport:
    config: dict
    pages: tuple[PageRow, ...] = ()
    corpus: tuple[CorpusRow, ...] = ()
    config_digest: str = field(default="")

    def __post_init__(self) -> None:
        if not self.config_digest:
            object.__setattr__(self, "config_digest", config_digest(self.config))


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def gt_char_count(page: PageAnnotation, policy: NormalizationPolicy) -> int:
    """Normalized ground-truth characters on the page, line separators excluded."""
    return sum(len(s) for s in normalized_lines(page, policy))


def strategy_name(strategy: OrderingStrategy, reference_is_gt: bool) -> str:
    if strategy.kind == AS_IS:
        return "as_is"
    if strategy.kind == BLIND:
        return "B.O"
    return "G.O" if reference_is_gt else "R.O"


def _score_page(gt, pred, ref, policy, strategy, params):
    ordered = apply_strategy(strategy, pred, ref, policy)
    crr_value = page_crr(gt, ordered, policy).value
    fca_value = fca(gt, ordered, policy, params)[0].value
    return crr_value, fca_value


def corpus_row(rows: Sequence[PageRow], engine: str, detector: str, strategy: str) -> CorpusRow:
    crr_agg = aggregate([(r.page_id, r.crr, r.gt_chars) for r in rows])
    fca_agg = aggregate([(r.page_id, r.fca, r.gt_chars) for r in rows])
    timed = [r.seconds for r in rows if r.seconds is not None]
    mean_seconds = sum(timed) / len(timed) if timed else None
    return CorpusRow(
        engine=engine,
        detector=detector,
        strategy=strategy,
        crr=crr_agg.value,
        fca=fca_agg.value,
        crr_unweighted=crr_agg.unweighted,
        fca_unweighted=fca_agg.unweighted,
        mean_seconds=mean_seconds,
        pages=len(rows),
        failed_pages=sum(r.failed for r in rows),
    )


def evaluate(
    gt: Corpus,
    pred: Corpus,
    policy: NormalizationPolicy = NormalizationPolicy(),
    strategy: OrderingStrategy = OrderingStrategy(),
    fca_params: FcaParams = FcaParams(),
    timings: Iterable[TimingRecord] | None = None,
    *,
    reference: Corpus | None = None,
    engine: str | None = None,
    detector: str = "",
    exclude_stages: Sequence[str] = (),
    failed_pages: Iterable[str] = (),
    workers: int = 1,
) -> EvalReport:
    """Score every ground-truth page for one engine under one ordering strategy.

    Pages missing from ``pred`` are scored as empty predictions.  For
    reference-guided ordering the reference defaults to the ground truth.
    """
    gt_pages = gt.by_id()
    pred_pages = pred.by_id()
    unknown = sorted(set(pred_pages) - set(gt_pages))
    if unknown:
        raise UnknownPage(f"prediction pages absent from ground truth: {', '.join(unknown)}")
    ref_pages = (reference or gt).by_id()
    engine = engine or pred.name or "engine"
    name = strategy_name(strategy, reference is None)
    failed = set(failed_pages)
    seconds = {}
    for t in timings or ():
        seconds[t.page_id] = t.excluding(exclude_stages).seconds

    jobs = []
    for page_id in sorted(gt_pages):
        g = gt_pages[page_id]
        p = pred_pages.get(page_id)
        if p is None:
            failed.add(page_id)
            p = PageAnnotation(page_id=page_id)
        ref = ref_pages.get(page_id) if strategy.kind == REFERENCE else None
        jobs.append((g, p, ref))

    def score(job):
        g, p, ref = job
        return _score_page(g, p, ref or PageAnnotation(page_id=g.page_id), policy, strategy, fca_params)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(score, jobs))
    else:
        scores = [score(job) for job in jobs]

    rows = tuple(
        PageRow(
            page_id=g.page_id,
            engine=engine,
            strategy=name,
            crr=c,
            fca=f,
            gt_chars=gt_char_count(g, policy),
            seconds=seconds.get(g.page_id),
            failed=g.page_id in failed,
        )
        for (g, _, _), (c, f) in zip(jobs, scores)
    )
    run = {
        "engine": engine,
        "detector": detector,
        "strategy": strategy.describe(),
        "strategy_name": name,
        "reference": "ground_truth" if reference is None else (reference.name or "reference"),
        "exclude_stages": sorted(exclude_stages),
    }
    config = {
        "policy": policy.describe(),
        "fca": {"min_split_length": fca_params.min_split_length, "max_match_penalty": fca_params.max_match_penalty},
        "runs": [run],
    }
    corpus = (corpus_row(rows, engine, detector, name),) if rows else ()
    return EvalReport(config=config, pages=rows, corpus=corpus)


def merge_reports(reports: Sequence[EvalReport]) -> EvalReport:
    """Combine runs that share normalization and FCA settings into one report."""
    if not reports:
        raise ValueError("nothing to merge")
    first = reports[0].config
    for r in reports[1:]:
        if r.config["policy"] != first["policy"] or r.config["fca"] != first["fca"]:
            raise ValueError("cannot merge reports computed under different normalization or FCA settings")
    runs = [run for r in reports for run in r.config["runs"]]
    keys = [(run["engine"], run["strategy_name"]) for run in runs]
    if len(set(keys)) != len(keys):
        raise ValueError("duplicate (engine, strategy) runs in merge")
    config = {"policy": first["policy"], "fca": first["fca"], "runs": runs}
    pages = tuple(row for r in reports for row in r.pages)
    corpus = tuple(row for r in reports for row in r.corpus)
    return EvalReport(config=config, pages=pages, corpus=corpus)


def recompute_corpus(report: EvalReport) -> tuple[CorpusRow, ...]:
    """Corpus rows rebuilt from the per-page rows alone."""
    out = []
    for run in report.config["runs"]:
        rows = [r for r in report.pages if r.engine == run["engine"] and r.strategy == run["strategy_name"]]
        if rows:
            out.append(corpus_row(rows, run["engine"], run["detector"], run["strategy_name"]))
    return tuple(out)
