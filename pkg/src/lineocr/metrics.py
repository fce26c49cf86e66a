"""CRR and Flexible Character Accuracy, per page and per corpus.

CRR compares the whole page as one sequence (lines joined by ``\\n`` in
reading order), so it is sensitive to line order.  FCA matches lines across
the page regardless of order, splitting lines where one side merged what
the other side kept apart, and pools the per-match counts.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .align import AlignmentCounts, align, pairwise_distances, semiglobal_span
from .ingest import NormalizationPolicy, normalized_lines
from .model import PageAnnotation

LINE_SEPARATOR = "\n"


class EmptyCorpus(ValueError):
    pass


@dataclass(frozen=True)
class MetricValue:
    value: float
    counts: AlignmentCounts


def crr_value(counts: AlignmentCounts) -> float:
    n = counts.reference_length
    if n == 0:
        return 1.0 if counts.insertions == 0 else 0.0
    return 1.0 - counts.errors / n


def crr(counts: AlignmentCounts) -> MetricValue:
    """1 - (S + D + I) / (S + D + C); unbounded below."""
    return MetricValue(crr_value(counts), counts)


def page_text(page: PageAnnotation, policy: NormalizationPolicy = NormalizationPolicy()) -> str:
    """Normalized lines in reading order joined by newlines.

    Lines that normalize to the empty string are left out so that blank
    lines do not contribute separator characters.
    """
    return LINE_SEPARATOR.join(s for s in normalized_lines(page, policy) if s)


def page_crr(
    gt: PageAnnotation, pred: PageAnnotation, policy: NormalizationPolicy = NormalizationPolicy()
) -> MetricValue:
    return crr(align(page_text(gt, policy), page_text(pred, policy)))


# -- FCA -------------------------------------------------------------------


@dataclass(frozen=True)
class FcaParams:
    min_split_length: int = 2
    max_match_penalty: float = 0.75

    def __post_init__(self) -> None:
        if self.min_split_length < 1:
            raise ValueError("min_split_length must be >= 1")
        if not 0.0 < self.max_match_penalty <= 1.0:
            raise ValueError("max_match_penalty must be in (0, 1]")


@dataclass(frozen=True)
class FcaMatch:
    gt_id: str
    pred_id: str
    gt_segment: str
    pred_segment: str
    penalty: float
    counts: AlignmentCounts


@dataclass(frozen=True)
class FcaMatchSet:
    matches: tuple[FcaMatch, ...]
    unmatched_gt_chars: int
    unmatched_pred_chars: int
    params: FcaParams
    # spaces dropped at split points; they are separators, not content
    separator_gt_chars: int = 0
    separator_pred_chars: int = 0

    @property
    def counts(self) -> AlignmentCounts:
        total = AlignmentCounts()
        for m in self.matches:
            total = total + m.counts
        return total + AlignmentCounts(deletions=self.unmatched_gt_chars, insertions=self.unmatched_pred_chars)


@dataclass
class _Segment:
    key: tuple[str, str]  # (original line id, split path)
    text: str

    @property
    def label(self) -> str:
        line_id, path = self.key
        return f"{line_id}[{path}]" if path else line_id


@dataclass
class _Pools:
    gt: dict[tuple[str, str], _Segment] = field(default_factory=dict)
    pred: dict[tuple[str, str], _Segment] = field(default_factory=dict)
    heap: list = field(default_factory=list)

    def push_pairs(self, gts: Sequence[_Segment], preds: Sequence[_Segment]) -> None:
        if not gts or not preds:
            return
        dist = pairwise_distances([g.text for g in gts], [p.text for p in preds], semiglobal=True).tolist()
        # content before ids, so relabelling lines cannot change the outcome
        entries = [
            (d / max(len(g.text), len(p.text)), -len(g.text), abs(len(g.text) - len(p.text)), g.text, p.text, g.key, p.key)
            for g, row in zip(gts, dist)
            for p, d in zip(preds, row)
        ]
        if self.heap:
            for entry in entries:
                heapq.heappush(self.heap, entry)
        else:
            heapq.heapify(entries)
            self.heap = entries


def _split_remainder(text: str) -> tuple[str, int]:
    stripped = text.strip(" ")
    return stripped, len(text) - len(stripped)


def fca_match(gt_lines: Iterable[tuple[str, str]], pred_lines: Iterable[tuple[str, str]], params: FcaParams) -> FcaMatchSet:
    """Greedy order-free line matching with splits.

    Inputs are ``(line_id, normalized_text)`` pairs.  Repeatedly the pair
    with the lowest length-normalized semi-global distance is matched;
    unmatched ends of the longer line go back into its pool when they are
    at least ``min_split_length`` characters long.  Ties go to the longer
    ground-truth line, then the closer pair in length (so an exact copy
    beats a containing line), then the smaller texts, then the smaller ids.
    """
    pools = _Pools()
    for line_id, text in gt_lines:
        if text:
            seg = _Segment((line_id, ""), text)
            pools.gt[seg.key] = seg
    for line_id, text in pred_lines:
        if text:
            seg = _Segment((line_id, ""), text)
            pools.pred[seg.key] = seg
    pools.push_pairs(list(pools.gt.values()), list(pools.pred.values()))

    matches: list[FcaMatch] = []
    unmatched_gt = unmatched_pred = sep_gt = sep_pred = 0
    while pools.heap:
        penalty, *_, gkey, pkey = heapq.heappop(pools.heap)
        if gkey not in pools.gt or pkey not in pools.pred:
            continue
        if penalty > params.max_match_penalty:
            break
        g = pools.gt.pop(gkey)
        p = pools.pred.pop(pkey)
        gt_inner = len(g.text) <= len(p.text)
        inner, outer = (g, p) if gt_inner else (p, g)
        _, start, end = semiglobal_span(inner.text, outer.text)
        span = outer.text[start:end]
        gt_seg, pred_seg = (g.text, span) if gt_inner else (span, p.text)
        matches.append(FcaMatch(g.label, p.label, gt_seg, pred_seg, penalty, align(gt_seg, pred_seg)))

        fresh: list[_Segment] = []
        for tag, rest in (("a", outer.text[:start]), ("b", outer.text[end:])):
            if not rest:
                continue
            kept, dropped = _split_remainder(rest)
            if gt_inner:
                sep_pred += dropped
            else:
                sep_gt += dropped
            if len(kept) >= params.min_split_length:
                fresh.append(_Segment((outer.key[0], outer.key[1] + tag), kept))
            elif gt_inner:
                unmatched_pred += len(kept)
            else:
                unmatched_gt += len(kept)
        if fresh:
            target = pools.pred if gt_inner else pools.gt
            for seg in fresh:
                target[seg.key] = seg
            if gt_inner:
                pools.push_pairs(list(pools.gt.values()), fresh)
            else:
                pools.push_pairs(fresh, list(pools.pred.values()))

    unmatched_gt += sum(len(s.text) for s in pools.gt.values())
    unmatched_pred += sum(len(s.text) for s in pools.pred.values())
    return FcaMatchSet(tuple(matches), unmatched_gt, unmatched_pred, params, sep_gt, sep_pred)


def fca(
    gt: PageAnnotation,
    pred: PageAnnotation,
    policy: NormalizationPolicy = NormalizationPolicy(),
    params: FcaParams = FcaParams(),
) -> tuple[MetricValue, FcaMatchSet]:
    """Flexible Character Accuracy of ``pred`` against ``gt``, clamped to [0, 1]."""
    gt_lines = [(ln.id, t) for ln, t in zip(gt.ordered_lines(), normalized_lines(gt, policy))]
    pred_lines = [(ln.id, t) for ln, t in zip(pred.ordered_lines(), normalized_lines(pred, policy))]
    matchset = fca_match(gt_lines, pred_lines, params)
    counts = matchset.counts
    value = min(1.0, max(0.0, crr_value(counts)))
    return MetricValue(value, counts), matchset


# -- aggregation -----------------------------------------------------------


@dataclass(frozen=True)
class CorpusMetric:
    value: float  # gt-character-weighted mean
    unweighted: float
    pages: int
    total_weight: int


def aggregate(per_page: Sequence[tuple[str, MetricValue | float, int]]) -> CorpusMetric:
    """Character-count-weighted mean of per-page values (plus the plain mean).

    Sums are exact rationals, so identical page values aggregate to that
    value bit-for-bit.  With zero total weight the weighted mean falls back
    to the plain mean.
    """
    if not per_page:
        raise EmptyCorpus("cannot aggregate an empty list of pages")
    values = [Fraction(v.value if isinstance(v, MetricValue) else v) for _, v, _ in per_page]
    weights = [int(w) for _, _, w in per_page]
    if any(w < 0 for w in weights):
        raise ValueError("page weights must be non-negative")
    plain = sum(values, Fraction(0)) / len(values)
    total = sum(weights)
    weighted = sum((v * w for v, w in zip(values, weights)), Fraction(0)) / total if total else plain
    return CorpusMetric(float(weighted), float(plain), len(per_page), total)
