"""Corpus statistics: character frequencies and words per line."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass

from .ingest import NormalizationPolicy, normalize_text
from .model import Corpus


@dataclass(frozen=True)
class Histogram:
    bins: tuple[tuple[object, int], ...]

    @property
    def total(self) -> int:
        return sum(count for _, count in self.bins)

    def as_dict(self) -> dict:
        return dict(self.bins)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["label", "count"])
        for label, count in self.bins:
            writer.writerow([label, count])
        return buf.getvalue()

    def render_bars(self, width: int = 40, top: int | None = None) -> str:
        """Plain-text horizontal bar chart, one bin per row."""
        bins = self.bins[:top] if top else self.bins
        if not bins:
            return "(empty)\n"
        peak = max(count for _, count in bins)
        labels = [_display(label) for label, _ in bins]
        pad = max(len(s) for s in labels)
        rows = []
        for label, (_, count) in zip(labels, bins):
            bar = "#" * (round(width * count / peak) if peak else 0)
            rows.append(f"{label:>{pad}} | {bar} {count}")
        return "\n".join(rows) + "\n"


def _display(label: object) -> str:
    if label == " ":
        return "<space>"
    return str(label)


def char_frequency(corpus: Corpus, policy: NormalizationPolicy = NormalizationPolicy()) -> Histogram:
    counts: Counter[str] = Counter()
    for page in corpus.pages:
        for line in page.lines:
            counts.update(normalize_text(line.text, policy))
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], ord(kv[0])))
    return Histogram(tuple(ordered))


def words_per_line(corpus: Corpus, policy: NormalizationPolicy = NormalizationPolicy()) -> Histogram:
    # a word is a maximal run of non-space characters
    counts: Counter[int] = Counter()
    for page in corpus.pages:
        for line in page.lines:
            text = normalize_text(line.text, policy)
            counts[len([w for w in text.split(" ") if w])] += 1
    return Histogram(tuple(sorted(counts.items())))
