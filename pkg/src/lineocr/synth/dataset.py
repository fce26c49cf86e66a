"""Writing rendered specs to disk with a TSV manifest."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from PIL import Image

from .atlas import GlyphSource, MissingGlyph
from .render import SynthSpec, TextTooLong, render_line

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.tsv"
FAILURES_NAME = "failures.tsv"


@dataclass(frozen=True)
class ManifestRow:
    image_path: str
    text: str
    spec_digest: str


@dataclass(frozen=True)
class Failure:
    index: int
    spec_digest: str
    error: str


@dataclass(frozen=True)
class Manifest:
    rows: tuple[ManifestRow, ...]
    failures: tuple[Failure, ...] = ()


def _render_one(args: tuple[int, SynthSpec, GlyphSource, Path]) -> ManifestRow | Failure:
    index, spec, glyphs, out_dir = args
    try:
        pixels = render_line(spec, glyphs)
    except (MissingGlyph, TextTooLong) as exc:
        return Failure(index, spec.digest, f"{type(exc).__name__}: {exc}")
    rel = f"images/{index:06d}.png"
    Image.fromarray(pixels, mode="L").save(out_dir / rel)
    return ManifestRow(rel, spec.text, spec.digest)


def generate_dataset(
    specs: Sequence[SynthSpec], glyphs: GlyphSource, out_dir: str | Path, workers: int = 1
) -> Manifest:
    """Render every spec to ``out_dir/images`` and write ``manifest.tsv``.

    Specs that cannot be rendered are skipped and listed in
    ``failures.tsv``; output does not depend on ``workers``.
    """
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    jobs = [(i, spec, glyphs, out) for i, spec in enumerate(specs)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_render_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_render_one(job) for job in jobs]

    rows = tuple(r for r in results if isinstance(r, ManifestRow))
    failures = tuple(r for r in results if isinstance(r, Failure))
    with open(out / MANIFEST_NAME, "w", encoding="utf-8", newline="") as fh:
        # labels are validated tab- and newline-free, so no quoting
        for row in rows:
            fh.write(f"{row.image_path}\t{row.text}\t{row.spec_digest}\n")
    failures_path = out / FAILURES_NAME
    if failures:
        with open(failures_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            writer.writerow(["index", "spec_digest", "error"])
            for f in failures:
                writer.writerow([f.index, f.spec_digest, f.error])
        log.warning("%d of %d specs failed; see %s", len(failures), len(specs), failures_path)
    elif failures_path.exists():
        failures_path.unlink()
    return Manifest(rows, failures)


def read_manifest(path: str | Path) -> list[ManifestRow]:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            image_path, text, digest = line.rstrip("\n").split("\t")
            rows.append(ManifestRow(image_path, text, digest))
    return rows
