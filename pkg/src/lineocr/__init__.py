"""Page- and line-level OCR evaluation toolkit.

CRR and Flexible Character Accuracy metrics, reading-order strategies,
synthetic line-image generation and an engine benchmark harness.
"""

from .align import AlignmentCounts, align, edit_distance
from .ingest import (
    Charset,
    NormalizationPolicy,
    ParseError,
    ValidationError,
    builtin_charset,
    load_corpus,
    normalize_text,
    save_corpus,
)
from .metrics import FcaMatchSet, FcaParams, MetricValue, aggregate, crr, fca, page_crr
from .model import Corpus, MissingGeometry, PageAnnotation, Point2, TextLine, line_centroid, validate_page
from .ordering import OrderingStrategy, order_blind, order_by_reference

__version__ = "0.1.0"

__all__ = [
    "AlignmentCounts",
    "Charset",
    "Corpus",
    "FcaMatchSet",
    "FcaParams",
    "MetricValue",
    "MissingGeometry",
    "NormalizationPolicy",
    "OrderingStrategy",
    "PageAnnotation",
    "ParseError",
    "Point2",
    "TextLine",
    "ValidationError",
    "aggregate",
    "align",
    "builtin_charset",
    "crr",
    "edit_distance",
    "fca",
    "line_centroid",
    "load_corpus",
    "normalize_text",
    "order_blind",
    "order_by_reference",
    "page_crr",
    "save_corpus",
    "validate_page",
]
