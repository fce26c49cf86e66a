"""Pre-rasterized glyph atlases.

An atlas is a directory with ``atlas.json`` and ``atlas.png``.  The PNG is
an 8-bit grayscale sheet where pixel value 255 is full ink coverage; the
JSON maps each code point (as a decimal string) to its cell on the sheet::

    {"name": "dejavu-sans-mono-24", "line_height": 28, "baseline": 22,
     "fallback": 63,
     "glyphs": {"65": {"rect": [x, y, w, h], "advance": 14}, ...}}

Every cell is ``line_height`` pixels tall, so glyphs share a baseline when
laid side by side.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image, ImageDraw, ImageFont


class MissingGlyph(KeyError):
    pass


@dataclass(frozen=True)
class Glyph:
    bitmap: np.ndarray  # float32 coverage in [0, 1], shape (line_height, w)
    advance: int


@dataclass(frozen=True)
class GlyphSource:
    name: str
    line_height: int
    glyphs: dict[str, Glyph]
    fallback: str | None = None
    digest: str = ""

    def __post_init__(self) -> None:
        if self.fallback is not None and self.fallback not in self.glyphs:
            raise ValueError(f"fallback {self.fallback!r} has no glyph in atlas {self.name!r}")
        for ch, g in self.glyphs.items():
            if g.advance <= 0:
                raise ValueError(f"glyph {ch!r} has non-positive advance {g.advance}")
            if g.bitmap.shape[0] != self.line_height:
                raise ValueError(f"glyph {ch!r} cell height {g.bitmap.shape[0]} != line height {self.line_height}")

    @property
    def id(self) -> str:
        return f"{self.name}@{self.digest[:12]}" if self.digest else self.name

    def glyph(self, ch: str) -> Glyph:
        g = self.glyphs.get(ch)
        if g is not None:
            return g
        if self.fallback is not None:
            return self.glyphs[self.fallback]
        raise MissingGlyph(f"no glyph for {ch!r} (U+{ord(ch):04X}) in atlas {self.name!r} and no fallback")

    def covers(self, text: str) -> bool:
        return self.fallback is not None or all(ch in self.glyphs for ch in text)


def load_atlas(path: str | Path) -> GlyphSource:
    path = Path(path)
    meta_bytes = (path / "atlas.json").read_bytes()
    png_bytes = (path / "atlas.png").read_bytes()
    meta = json.loads(meta_bytes)
    with Image.open(path / "atlas.png") as im:
        sheet = np.asarray(im.convert("L"), dtype=np.float32) / 255.0
    height = int(meta["line_height"])
    glyphs = {}
    for key, item in meta["glyphs"].items():
        x, y, w, h = item["rect"]
        if h != height:
            raise ValueError(f"{path}: glyph {key} cell height {h} != line_height {height}")
        glyphs[chr(int(key))] = Glyph(np.ascontiguousarray(sheet[y : y + h, x : x + w]), int(item["advance"]))
    fallback = meta.get("fallback")
    digest = hashlib.sha256(meta_bytes + png_bytes).hexdigest()
    return GlyphSource(
        name=meta["name"],
        line_height=height,
        glyphs=glyphs,
        fallback=chr(fallback) if fallback is not None else None,
        digest=digest,
    )


def default_atlas_path() -> Path:
    return Path(str(resources.files("lineocr") / "data" / "atlas_dejavu_sans_mono_24"))


def default_atlas() -> GlyphSource:
    return load_atlas(default_atlas_path())


def build_atlas(
    font_path: str | Path,
    size: int,
    chars: Iterable[str],
    out_dir: str | Path,
    *,
    name: str | None = None,
    fallback: str | None = "?",
    columns: int = 16,
) -> Path:
    """Rasterize ``chars`` from a TrueType font into an atlas directory."""
    font = ImageFont.truetype(str(font_path), size)
    ascent, descent = font.getmetrics()
    height = ascent + descent
    chars = list(dict.fromkeys(chars))
    if fallback is not None and fallback not in chars:
        chars.append(fallback)

    cells = []
    for ch in chars:
        advance = max(1, math.ceil(font.getlength(ch)))
        left, _, right, _ = font.getbbox(ch, anchor="ls")
        width = max(advance, math.ceil(right), 1)
        cell = Image.new("L", (width, height), 0)
        ImageDraw.Draw(cell).text((max(0, -left), ascent), ch, fill=255, font=font, anchor="ls")
        cells.append((ch, cell, advance))

    cell_w = max(c.width for _, c, _ in cells)
    rows = math.ceil(len(cells) / columns)
    sheet = Image.new("L", (cell_w * columns, height * rows), 0)
    glyphs = {}
    for k, (ch, cell, advance) in enumerate(cells):
        x, y = (k % columns) * cell_w, (k // columns) * height
        sheet.paste(cell, (x, y))
        glyphs[str(ord(ch))] = {"rect": [x, y, cell.width, height], "advance": advance}

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "name": name or f"{Path(font_path).stem.lower()}-{size}",
        "line_height": height,
        "baseline": ascent,
        "fallback": ord(fallback) if fallback is not None else None,
        "glyphs": glyphs,
    }
    (out / "atlas.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    sheet.save(out / "atlas.png", optimize=False)
    return out
