"""Seeded sampling of synthesis recipes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .render import BACKGROUNDS, NOISE_KINDS, DistortionParams, SynthSpec, spec_rng


class EmptyCorpus(ValueError):
    pass


@dataclass(frozen=True)
class DistortionRanges:
    blur_sigma: tuple[float, float] = (0.0, 3.0)
    skew_deg: tuple[float, float] = (-10.0, 10.0)
    shear_deg: tuple[float, float] = (-10.0, 10.0)
    noise_kinds: tuple[str, ...] = NOISE_KINDS
    gaussian_sigma: tuple[float, float] = (0.0, 0.1)
    salt_pepper_p: tuple[float, float] = (0.0, 0.05)
    morph_radius: tuple[int, int] = (1, 2)
    backgrounds: tuple[str, ...] = BACKGROUNDS
    margin_px: tuple[int, int] = (0, 20)
    extra_char_spacing_px: tuple[int, int] = (0, 8)

    def __post_init__(self) -> None:
        for name in ("blur_sigma", "skew_deg", "shear_deg", "gaussian_sigma", "salt_pepper_p",
                     "morph_radius", "margin_px", "extra_char_spacing_px"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: lower bound {lo} above upper bound {hi}")
        if not self.noise_kinds or not self.backgrounds:
            raise ValueError("noise_kinds and backgrounds must be non-empty")
        # out-of-range bounds surface here rather than at sampling time
        DistortionParams(blur_sigma=self.blur_sigma[1], skew_deg=self.skew_deg[0], shear_deg=self.shear_deg[0])
        DistortionParams(skew_deg=self.skew_deg[1], shear_deg=self.shear_deg[1], blur_sigma=self.blur_sigma[0])
        DistortionParams(margins=(self.margin_px[1],) * 4, extra_char_spacing_px=self.extra_char_spacing_px[1])
        DistortionParams(margins=(self.margin_px[0],) * 4, extra_char_spacing_px=self.extra_char_spacing_px[0])


def _sample_params(rng, ranges: DistortionRanges) -> DistortionParams:
    noise = ranges.noise_kinds[int(rng.integers(len(ranges.noise_kinds)))]
    amount: float = 0.0
    if noise == "gaussian":
        amount = float(rng.uniform(*ranges.gaussian_sigma))
    elif noise == "salt_pepper":
        amount = float(rng.uniform(*ranges.salt_pepper_p))
    elif noise in ("dilate", "erode"):
        lo, hi = ranges.morph_radius
        amount = int(rng.integers(lo, hi + 1))
    mlo, mhi = ranges.margin_px
    slo, shi = ranges.extra_char_spacing_px
    return DistortionParams(
        blur_sigma=float(rng.uniform(*ranges.blur_sigma)),
        skew_deg=float(rng.uniform(*ranges.skew_deg)),
        shear_deg=float(rng.uniform(*ranges.shear_deg)),
        noise=noise,
        noise_amount=amount,
        background=ranges.backgrounds[int(rng.integers(len(ranges.backgrounds)))],
        margins=tuple(int(m) for m in rng.integers(mlo, mhi + 1, size=4)),
        extra_char_spacing_px=int(rng.integers(slo, shi + 1)),
    )


def sample_spec(
    corpus_lines: Sequence[str], index: int, seed: int, glyph_source: str, ranges: DistortionRanges = DistortionRanges()
) -> SynthSpec:
    rng = spec_rng(seed, index)
    text = corpus_lines[int(rng.integers(len(corpus_lines)))]
    params = _sample_params(rng, ranges)
    return SynthSpec(text, glyph_source, params, seed=int(rng.integers(0, 2**63)))


def sample_specs(
    corpus_lines: Sequence[str],
    n: int,
    seed: int,
    glyph_source: str,
    ranges: DistortionRanges = DistortionRanges(),
) -> list[SynthSpec]:
    """``n`` recipes; recipe ``i`` depends only on ``(seed, i)`` and the inputs.

    Corpus lines are whitespace-collapsed and blank ones skipped before
    sampling, since a label must fit on one manifest row.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return []
    lines = [" ".join(s.split()) for s in corpus_lines if s.strip()]
    if not lines:
        raise EmptyCorpus("no non-empty corpus lines to sample from")
    return [sample_spec(lines, i, seed, glyph_source, ranges) for i in range(n)]
