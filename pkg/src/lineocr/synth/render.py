"""Deterministic rendering of one distorted text-line image.

Pipeline (fixed order): typeset -> background -> skew/shear -> blur ->
noise/morphology -> margins -> resize to the target height and pad/crop to
the target width.  Intensities are floats in [0, 1] (1 = white paper) until
the final 8-bit quantization.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from PIL import Image
from scipy import ndimage

from .atlas import GlyphSource

NOISE_KINDS = ("none", "gaussian", "salt_pepper", "dilate", "erode")
BACKGROUNDS = ("white", "solid_color", "ruled_lines", "quasicrystal", "reversed_blurred_text")

TARGET_HEIGHT = 32
TARGET_WIDTH = 400
MAX_TYPESET_WIDTH = 8192

QUASICRYSTAL_WAVES = 7
GEOMETRY_PAD = 2  # px around the transformed box so edge glyphs never touch the border
INK_LEVEL = 0.0


class TextTooLong(ValueError):
    pass


def _check(name: str, value: float, lo: float, hi: float) -> None:
    if not (lo <= value <= hi):
        raise ValueError(f"{name}={value} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class DistortionParams:
    blur_sigma: float = 0.0
    skew_deg: float = 0.0
    shear_deg: float = 0.0
    noise: str = "none"
    # gaussian: sigma in [0, 0.1]; salt_pepper: p in [0, 0.05]; dilate/erode: radius 1 or 2
    noise_amount: float = 0.0
    background: str = "white"
    margins: tuple[int, int, int, int] = (0, 0, 0, 0)  # top, right, bottom, left
    extra_char_spacing_px: int = 0

    def __post_init__(self) -> None:
        _check("blur_sigma", self.blur_sigma, 0.0, 3.0)
        _check("skew_deg", self.skew_deg, -10.0, 10.0)
        _check("shear_deg", self.shear_deg, -10.0, 10.0)
        if self.noise not in NOISE_KINDS:
            raise ValueError(f"unknown noise {self.noise!r}")
        if self.noise == "gaussian":
            _check("gaussian sigma", self.noise_amount, 0.0, 0.1)
        elif self.noise == "salt_pepper":
            _check("salt_pepper p", self.noise_amount, 0.0, 0.05)
        elif self.noise in ("dilate", "erode") and self.noise_amount not in (1, 2):
            raise ValueError(f"{self.noise} radius must be 1 or 2, got {self.noise_amount}")
        if self.background not in BACKGROUNDS:
            raise ValueError(f"unknown background {self.background!r}")
        if len(self.margins) != 4:
            raise ValueError("margins are (top, right, bottom, left)")
        for m in self.margins:
            _check("margin_px", m, 0, 20)
        _check("extra_char_spacing_px", self.extra_char_spacing_px, 0, 8)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["margins"] = list(self.margins)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DistortionParams":
        d = dict(d)
        d["margins"] = tuple(d.get("margins", (0, 0, 0, 0)))
        return cls(**d)


@dataclass(frozen=True)
class SynthSpec:
    text: str
    glyph_source: str
    params: DistortionParams = field(default_factory=DistortionParams)
    seed: int = 0
    height: int = TARGET_HEIGHT
    width: int = TARGET_WIDTH

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("spec text is empty")
        if any(ch in self.text for ch in "\t\r\n"):
            raise ValueError("spec text must be a single line without tabs")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "glyph_source": self.glyph_source,
            "params": self.params.to_dict(),
            "seed": self.seed,
            "size": [self.height, self.width],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        h, w = d.get("size", (TARGET_HEIGHT, TARGET_WIDTH))
        return cls(d["text"], d["glyph_source"], DistortionParams.from_dict(d["params"]), int(d["seed"]), h, w)

    @property
    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def spec_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


# -- stages ----------------------------------------------------------------


def typeset(text: str, glyphs: GlyphSource, spacing: int = 0, max_width: int = MAX_TYPESET_WIDTH) -> np.ndarray:
    """Ink coverage of ``text`` laid left to right on one baseline."""
    placed = []
    x = 0
    right = 0
    for k, ch in enumerate(text):
        g = glyphs.glyph(ch)
        placed.append((x, g.bitmap))
        right = max(right, x + g.bitmap.shape[1])
        x += g.advance + (spacing if k < len(text) - 1 else 0)
    width = max(x, right, 1)
    if width > max_width:
        raise TextTooLong(f"typeset width {width}px exceeds cap {max_width}px")
    cov = np.zeros((glyphs.line_height, width), dtype=np.float32)
    for x0, bmp in placed:
        region = cov[:, x0 : x0 + bmp.shape[1]]
        np.maximum(region, bmp, out=region)
    return cov


def _geometry_matrix(skew_deg: float, shear_deg: float) -> np.ndarray:
    """Forward map in (x, y) image coordinates about the origin.

    Positive skew turns the line counter-clockwise as displayed (y points
    down); positive shear leans the tops of glyphs to the right.
    """
    t = math.radians(skew_deg)
    rot = np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]])
    shear = np.array([[1.0, -math.tan(math.radians(shear_deg))], [0.0, 1.0]])
    return shear @ rot


def _canvas_for(h: int, w: int, forward: np.ndarray) -> tuple[int, int]:
    corners = np.array([[-w / 2, -h / 2], [w / 2, -h / 2], [w / 2, h / 2], [-w / 2, h / 2]])
    moved = corners @ forward.T
    span = moved.max(axis=0) - moved.min(axis=0)
    return max(h, math.ceil(span[1] - 1e-9)), max(w, math.ceil(span[0] - 1e-9))


def _background(kind: str, h: int, w: int, rng: np.random.Generator, text: str, glyphs: GlyphSource) -> np.ndarray:
    if kind == "white":
        return np.ones((h, w), dtype=np.float32)
    if kind == "solid_color":
        return np.full((h, w), rng.uniform(0.7, 0.95), dtype=np.float32)
    if kind == "ruled_lines":
        bg = np.ones((h, w), dtype=np.float32)
        pitch = int(rng.integers(6, 13))
        offset = int(rng.integers(0, pitch))
        bg[offset::pitch, :] = rng.uniform(0.55, 0.8)
        return bg
    if kind == "quasicrystal":
        freq = rng.uniform(0.15, 0.35)
        phases = rng.uniform(0.0, 2 * math.pi, size=QUASICRYSTAL_WAVES)
        yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
        acc = np.zeros((h, w))
        for k in range(QUASICRYSTAL_WAVES):
            a = k * math.pi / QUASICRYSTAL_WAVES
            acc += np.cos(freq * (xx * math.cos(a) + yy * math.sin(a)) + phases[k])
        v = np.clip((acc / QUASICRYSTAL_WAVES + 1.0) / 2.0, 0.0, 1.0)
        return (0.6 + 0.4 * v).astype(np.float32)
    if kind == "reversed_blurred_text":
        cov = typeset(text[::-1], glyphs, max_width=1 << 30)
        reps_y = math.ceil(h / cov.shape[0]) + 1
        reps_x = math.ceil(w / cov.shape[1]) + 1
        tiled = np.tile(cov, (reps_y, reps_x))
        oy = int(rng.integers(0, cov.shape[0]))
        ox = int(rng.integers(0, cov.shape[1]))
        tiled = tiled[oy : oy + h, ox : ox + w]
        tiled = ndimage.gaussian_filter(tiled, 2.0, mode="wrap")
        return (1.0 - 0.3 * tiled).astype(np.float32)
    raise ValueError(f"unknown background {kind!r}")


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(3 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2 * sigma * sigma))
    return k / k.sum()


def blur(img: np.ndarray, sigma: float) -> np.ndarray:
    if sigma < 1e-3:  # kernel is a unit impulse at this scale
        return img
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(img.astype(np.float64), k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return out.astype(np.float32)


def apply_noise(img: np.ndarray, kind: str, amount: float, rng: np.random.Generator) -> np.ndarray:
    if kind == "none":
        return img
    if kind == "gaussian":
        return np.clip(img + rng.normal(0.0, amount, size=img.shape), 0.0, 1.0).astype(np.float32)
    if kind == "salt_pepper":
        # every selected pixel flips: light ones go black, dark ones go white
        out = img.copy()
        hit = rng.random(img.shape) < amount
        out[hit] = np.where(img[hit] >= 0.5, 0.0, 1.0)
        return out
    size = 2 * int(amount) + 1
    if kind == "dilate":  # thicken dark strokes
        return ndimage.grey_erosion(img, size=(size, size), mode="nearest")
    if kind == "erode":
        return ndimage.grey_dilation(img, size=(size, size), mode="nearest")
    raise ValueError(f"unknown noise {kind!r}")


def fit_to_size(img: np.ndarray, height: int, width: int, fill: float) -> np.ndarray:
    """Resize to ``height`` keeping aspect, then right-pad or center-crop to ``width``."""
    h, w = img.shape
    new_w = max(1, round(w * height / h))
    if (h, w) != (height, new_w):
        img = np.asarray(Image.fromarray(img.astype(np.float32), mode="F").resize((new_w, height), Image.BILINEAR))
    if new_w < width:
        out = np.full((height, width), fill, dtype=np.float32)
        out[:, :new_w] = img
        return out
    start = (new_w - width) // 2
    return np.ascontiguousarray(img[:, start : start + width], dtype=np.float32)


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def render_stages(spec: SynthSpec, glyphs: GlyphSource, max_typeset_width: int = MAX_TYPESET_WIDTH) -> dict[str, np.ndarray]:
    """Every intermediate image of the pipeline, keyed by stage name."""
    p = spec.params
    rng = spec_rng(spec.seed)
    stages: dict[str, np.ndarray] = {}

    cov = typeset(spec.text, glyphs, p.extra_char_spacing_px, max_typeset_width)
    stages["typeset"] = cov

    forward = _geometry_matrix(p.skew_deg, p.shear_deg)
    h, w = _canvas_for(*cov.shape, forward)
    if p.skew_deg or p.shear_deg:
        h, w = h + 2 * GEOMETRY_PAD, w + 2 * GEOMETRY_PAD
    top, left = (h - cov.shape[0]) // 2, (w - cov.shape[1]) // 2
    canvas_cov = np.zeros((h, w), dtype=np.float32)
    canvas_cov[top : top + cov.shape[0], left : left + cov.shape[1]] = cov
    bg = _background(p.background, h, w, rng, spec.text, glyphs)
    fill = float(bg.mean())
    img = bg * (1.0 - canvas_cov) + INK_LEVEL * canvas_cov
    stages["background"] = img

    if p.skew_deg or p.shear_deg:
        inverse = np.linalg.inv(forward)
        centre = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
        # scipy works in (row, col) = (y, x)
        inv_rc = inverse[::-1, ::-1]
        offset = centre - inv_rc @ centre
        img = ndimage.affine_transform(img, inv_rc, offset=offset, order=1, mode="nearest").astype(np.float32)
    stages["geometry"] = img

    img = blur(img, p.blur_sigma)
    stages["blur"] = img

    img = apply_noise(img, p.noise, p.noise_amount, rng)
    stages["noise"] = img

    t, r, b, l = p.margins
    if any(p.margins):
        img = np.pad(img, ((t, b), (l, r)), mode="constant", constant_values=fill)
    stages["margins"] = img

    stages["final"] = fit_to_size(img, spec.height, spec.width, fill)
    return stages


def render_line(spec: SynthSpec, glyphs: GlyphSource, max_typeset_width: int = MAX_TYPESET_WIDTH) -> np.ndarray:
    """8-bit grayscale image of shape ``(spec.height, spec.width)``."""
    return to_uint8(render_stages(spec, glyphs, max_typeset_width)["final"])


def ink_angle_deg(img: np.ndarray, threshold: float = 0.5) -> float:
    """Orientation of the ink's principal axis, counter-clockwise as displayed.

    ``img`` is either uint8 or float in [0, 1]; pixels darker than
    ``threshold`` count as ink.
    """
    a = img.astype(np.float64)
    if img.dtype == np.uint8:
        a /= 255.0
    ys, xs = np.nonzero(a < threshold)
    if len(xs) < 2:
        raise ValueError("not enough ink to fit an axis")
    x = xs - xs.mean()
    y = ys - ys.mean()
    cov = np.array([[np.mean(x * x), np.mean(x * y)], [np.mean(x * y), np.mean(y * y)]])
    vals, vecs = np.linalg.eigh(cov)
    vx, vy = vecs[:, np.argmax(vals)]
    angle = -math.degrees(math.atan2(vy, vx))
    if angle > 90:
        angle -= 180
    elif angle <= -90:
        angle += 180
    return angle
