"""Domain types shared across the toolkit.

Coordinates are real-valued pixels, origin top-left, y increasing downward.
All types are frozen dataclasses; operations on them are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence


class MissingGeometry(ValueError):
    """Raised when an operation needs a polygon that a line does not carry."""


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)


@dataclass(frozen=True)
class TextLine:
    id: str
    text: str
    order_index: int
    polygon: tuple[Point2, ...] | None = None

    @property
    def has_geometry(self) -> bool:
        return self.polygon is not None and len(self.polygon) >= 3

    def y_extent(self) -> tuple[float, float]:
        if not self.has_geometry:
            raise MissingGeometry(f"line {self.id!r} has no polygon")
        ys = [p.y for p in self.polygon]
        return min(ys), max(ys)


@dataclass(frozen=True)
class PageAnnotation:
    page_id: str
    lines: tuple[TextLine, ...] = ()
    image_ref: str | None = None
    width: int | None = None
    height: int | None = None

    def ordered_lines(self) -> list[TextLine]:
        """Lines in reading order (by ``order_index``, ties by id)."""
        return sorted(self.lines, key=lambda ln: (ln.order_index, ln.id))

    def with_order(self, ids_in_order: Sequence[str]) -> "PageAnnotation":
        """Return a copy whose order_index follows ``ids_in_order``."""
        rank = {line_id: i for i, line_id in enumerate(ids_in_order)}
        if len(rank) != len(self.lines) or any(ln.id not in rank for ln in self.lines):
            raise ValueError("ids_in_order must be a permutation of the page's line ids")
        lines = tuple(replace(ln, order_index=rank[ln.id]) for ln in self.lines)
        return replace(self, lines=lines)

    @property
    def has_dimensions(self) -> bool:
        return self.width is not None and self.height is not None


@dataclass(frozen=True)
class Corpus:
    pages: tuple[PageAnnotation, ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for page in self.pages:
            if page.page_id in seen:
                raise ValueError(f"duplicate page_id {page.page_id!r} in corpus {self.name!r}")
            seen.add(page.page_id)

    def by_id(self) -> dict[str, PageAnnotation]:
        return {p.page_id: p for p in self.pages}

    def __len__(self) -> int:
        return len(self.pages)

    def __iter__(self):
        return iter(self.pages)


# -- validation ------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    line_id: str | None = None


DUPLICATE_ID = "DuplicateId"
DUPLICATE_ORDER_INDEX = "DuplicateOrderIndex"
NEGATIVE_ORDER_INDEX = "NegativeOrderIndex"
DEGENERATE_POLYGON = "DegeneratePolygon"
SELF_INTERSECTING_POLYGON = "SelfIntersectingPolygon"
OUT_OF_BOUNDS = "OutOfBounds"
NON_FINITE = "NonFiniteCoordinate"
MISSING_GEOMETRY = "MissingGeometry"
MISSING_DIMENSIONS = "MissingDimensions"
BAD_DIMENSIONS = "BadDimensions"


def _cross(o: Point2, a: Point2, b: Point2) -> float:
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def _on_segment(p: Point2, q: Point2, r: Point2) -> bool:
    return min(p.x, r.x) <= q.x <= max(p.x, r.x) and min(p.y, r.y) <= q.y <= max(p.y, r.y)


def _segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool:
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(q1, p1, q2):
        return True
    if d2 == 0 and _on_segment(q1, p2, q2):
        return True
    if d3 == 0 and _on_segment(p1, q1, p2):
        return True
    if d4 == 0 and _on_segment(p1, q2, p2):
        return True
    return False


def polygon_area(polygon: Sequence[Point2]) -> float:
    n = len(polygon)
    acc = 0.0
    for i in range(n):
        a, b = polygon[i], polygon[(i + 1) % n]
        acc += a.x * b.y - b.x * a.y
    return acc / 2.0


def is_simple_polygon(polygon: Sequence[Point2]) -> bool:
    n = len(polygon)
    if n < 3:
        return False
    edges = [(polygon[i], polygon[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            # adjacent edges share a vertex by construction
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(*edges[i], *edges[j]):
                return False
    return True


def _polygon_violations(line: TextLine, width: int | None, height: int | None) -> list[Violation]:
    poly = line.polygon
    assert poly is not None
    out: list[Violation] = []
    if any(not (math.isfinite(p.x) and math.isfinite(p.y)) for p in poly):
        return [Violation(NON_FINITE, "polygon has non-finite coordinates", line.id)]
    if len(poly) < 3 or polygon_area(poly) == 0.0:
        return [Violation(DEGENERATE_POLYGON, f"polygon with {len(poly)} vertices has zero area", line.id)]
    if not is_simple_polygon(poly):
        out.append(Violation(SELF_INTERSECTING_POLYGON, "polygon edges cross", line.id))
    if width is not None and height is not None:
        bad = [p for p in poly if p.x < 0 or p.y < 0 or p.x > width or p.y > height]
        if bad:
            out.append(
                Violation(
                    OUT_OF_BOUNDS,
                    f"{len(bad)} vertices outside the {width}x{height} page, first at ({bad[0].x}, {bad[0].y})",
                    line.id,
                )
            )
    return out


def validate_page(page: PageAnnotation, *, ground_truth: bool = False) -> list[Violation]:
    """Return every invariant violation of ``page``; empty iff it is valid.

    Ground-truth pages must carry dimensions and a polygon on every line.
    Prediction pages may omit geometry, but any polygon they do carry is
    still checked.
    """
    out: list[Violation] = []
    for name, value in (("width", page.width), ("height", page.height)):
        if value is not None and value <= 0:
            out.append(Violation(BAD_DIMENSIONS, f"{name} must be positive, got {value}"))
    if ground_truth and not page.has_dimensions:
        out.append(Violation(MISSING_DIMENSIONS, "ground-truth page needs width and height"))

    ids: set[str] = set()
    indices: set[int] = set()
    for line in page.lines:
        if line.id in ids:
            out.append(Violation(DUPLICATE_ID, f"line id {line.id!r} repeated", line.id))
        ids.add(line.id)
        if line.order_index < 0:
            out.append(Violation(NEGATIVE_ORDER_INDEX, f"order_index {line.order_index} < 0", line.id))
        if line.order_index in indices:
            out.append(
                Violation(DUPLICATE_ORDER_INDEX, f"order_index {line.order_index} repeated", line.id)
            )
        indices.add(line.order_index)
        if line.polygon is None:
            if ground_truth:
                out.append(Violation(MISSING_GEOMETRY, "ground-truth line needs a polygon", line.id))
            continue
        out.extend(_polygon_violations(line, page.width, page.height))
    return out


# -- geometry --------------------------------------------------------------


def line_centroid(line: TextLine) -> Point2:
    """Mean of the polygon's vertices (vertex centroid, not area centroid)."""
    if not line.has_geometry:
        raise MissingGeometry(f"line {line.id!r} needs a polygon with >= 3 vertices")
    n = len(line.polygon)
    return Point2(sum(p.x for p in line.polygon) / n, sum(p.y for p in line.polygon) / n)


def box_polygon(x0: float, y0: float, x1: float, y1: float) -> tuple[Point2, ...]:
    """Axis-aligned box as a clockwise 4-vertex polygon."""
    return (Point2(x0, y0), Point2(x1, y0), Point2(x1, y1), Point2(x0, y1))


def make_page(
    page_id: str,
    texts: Iterable[str],
    *,
    polygons: Sequence[Sequence[Point2]] | None = None,
    width: int | None = None,
    height: int | None = None,
    image_ref: str | None = None,
) -> PageAnnotation:
    """Convenience constructor: lines get ids ``l0, l1, ...`` in the given order."""
    texts = list(texts)
    lines = []
    for i, text in enumerate(texts):
        poly = tuple(polygons[i]) if polygons is not None else None
        lines.append(TextLine(id=f"l{i}", text=text, order_index=i, polygon=poly))
    return PageAnnotation(page_id=page_id, lines=tuple(lines), image_ref=image_ref, width=width, height=height)


__all__ = [
    "Corpus",
    "MissingGeometry",
    "PageAnnotation",
    "Point2",
    "TextLine",
    "Violation",
    "box_polygon",
    "line_centroid",
    "make_page",
    "validate_page",
]
