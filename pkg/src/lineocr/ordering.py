"""Reading-order strategies for predicted lines.

``order_blind`` sorts by geometry alone (rows of overlapping lines, top to
bottom, then left to right).  ``order_by_reference`` moves each predicted
line next to the position of its closest reference line when their edit
similarity reaches ``tau``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .align import pairwise_distances
from .ingest import NormalizationPolicy, normalize_text
from .model import MissingGeometry, PageAnnotation, line_centroid

AS_IS = "as_is"
BLIND = "blind_centroid"
REFERENCE = "reference_guided"

_ALIASES = {"as_is": AS_IS, "blind": BLIND, "blind_centroid": BLIND, "ref": REFERENCE, "reference_guided": REFERENCE}
_SHORT = {AS_IS: "as_is", BLIND: "B.O", REFERENCE: "ref"}


@dataclass(frozen=True)
class OrderingStrategy:
    kind: str = AS_IS
    tau: float = 0.90
    row_overlap_threshold: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _ALIASES.get(self.kind, self.kind))
        if self.kind not in (AS_IS, BLIND, REFERENCE):
            raise ValueError(f"unknown ordering strategy {self.kind!r}")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0, 1]")
        if not 0.0 < self.row_overlap_threshold <= 1.0:
            raise ValueError("row_overlap_threshold must be in (0, 1]")

    @property
    def label(self) -> str:
        return _SHORT[self.kind]

    def describe(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == REFERENCE:
            out["tau"] = self.tau
        if self.kind == BLIND:
            out["row_overlap_threshold"] = self.row_overlap_threshold
        return out


# -- blind ordering --------------------------------------------------------


def _find(parent: list[int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _same_row(a: tuple[float, float], b: tuple[float, float], threshold: float) -> bool:
    overlap = min(a[1], b[1]) - max(a[0], b[0])
    smaller = min(a[1] - a[0], b[1] - b[0])
    if smaller <= 0:
        return overlap >= 0
    return overlap >= threshold * smaller


def order_blind(page: PageAnnotation, row_overlap_threshold: float = 0.5) -> PageAnnotation:
    """Order lines row by row using only their polygons.

    Two lines share a row when their vertical extents overlap by at least
    ``row_overlap_threshold`` of the smaller extent; rows are the connected
    components of that relation.  Rows go top to bottom by mean centroid y,
    lines within a row left to right by centroid x.  Multi-column pages come
    out interleaved row by row.
    """
    lines = list(page.lines)
    missing = [ln.id for ln in lines if not ln.has_geometry]
    if missing:
        raise MissingGeometry(f"page {page.page_id!r}: lines without polygons: {', '.join(missing)}")
    extents = [ln.y_extent() for ln in lines]
    centroids = [line_centroid(ln) for ln in lines]
    parent = list(range(len(lines)))
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            if _same_row(extents[i], extents[j], row_overlap_threshold):
                parent[_find(parent, i)] = _find(parent, j)
    rows: dict[int, list[int]] = {}
    for i in range(len(lines)):
        rows.setdefault(_find(parent, i), []).append(i)

    def row_key(members: list[int]) -> tuple:
        ys = sum(centroids[i].y for i in members) / len(members)
        xs = sum(centroids[i].x for i in members) / len(members)
        return (ys, xs, min(lines[i].id for i in members))

    order: list[str] = []
    for members in sorted(rows.values(), key=row_key):
        members.sort(key=lambda i: (centroids[i].x, centroids[i].y, lines[i].id))
        order.extend(lines[i].id for i in members)
    return page.with_order(order)


# -- reference-guided ordering --------------------------------------------


@dataclass(frozen=True)
class TraceStep:
    reference_index: int
    pred_id: str | None
    similarity: float
    accepted: bool


@dataclass(frozen=True)
class ReorderTrace:
    steps: tuple[TraceStep, ...]

    @property
    def accepted_ids(self) -> list[str]:
        return [s.pred_id for s in self.steps if s.accepted and s.pred_id is not None]


def order_by_reference(
    reference: PageAnnotation,
    pred: PageAnnotation,
    tau: float = 0.90,
    policy: NormalizationPolicy = NormalizationPolicy(),
) -> tuple[PageAnnotation, ReorderTrace]:
    """Reorder ``pred`` to follow ``reference`` line by line.

    For each reference line in order, the closest not-yet-accepted predicted
    line (unit-cost edit distance on normalized text, ties to the earliest
    in the current list) is moved to the reference line's position when
    ``1 - D / max(len)`` reaches ``tau``.  Accepted lines are excluded from
    later scans.  Lines never accepted end up after all accepted ones, in
    their original relative order.
    """
    ref_lines = reference.ordered_lines()
    pred_lines = pred.ordered_lines()
    if not ref_lines or not pred_lines:
        return pred, ReorderTrace(())

    ref_text = [normalize_text(ln.text, policy) for ln in ref_lines]
    pred_text = [normalize_text(ln.text, policy) for ln in pred_lines]
    dist = pairwise_distances(ref_text, pred_text)

    current: list[int] = list(range(len(pred_lines)))  # indices into pred_lines
    accepted: set[int] = set()
    steps: list[TraceStep] = []
    for i in range(len(ref_lines)):
        candidates = [k for k in current if k not in accepted]
        if not candidates:
            steps.append(TraceStep(i, None, 0.0, False))
            continue
        row = dist[i]
        j = min(candidates, key=lambda k: (int(row[k]), current.index(k)))
        longest = max(len(ref_text[i]), len(pred_text[j]))
        similarity = 1.0 - int(row[j]) / longest if longest else 1.0
        ok = similarity >= tau
        steps.append(TraceStep(i, pred_lines[j].id, similarity, ok))
        if ok:
            current.remove(j)
            current.insert(min(i, len(current)), j)
            accepted.add(j)

    final = [k for k in current if k in accepted] + [k for k in current if k not in accepted]
    return pred.with_order([pred_lines[k].id for k in final]), ReorderTrace(tuple(steps))


def apply_strategy(
    strategy: OrderingStrategy,
    pred: PageAnnotation,
    reference: PageAnnotation | None = None,
    policy: NormalizationPolicy = NormalizationPolicy(),
) -> PageAnnotation:
    if strategy.kind == AS_IS:
        return pred
    if strategy.kind == BLIND:
        return order_blind(pred, strategy.row_overlap_threshold)
    if reference is None:
        raise ValueError("reference_guided ordering needs a reference page")
    return order_by_reference(reference, pred, strategy.tau, policy)[0]


__all__ = [
    "AS_IS",
    "BLIND",
    "OrderingStrategy",
    "REFERENCE",
    "ReorderTrace",
    "TraceStep",
    "apply_strategy",
    "order_blind",
    "order_by_reference",
]
