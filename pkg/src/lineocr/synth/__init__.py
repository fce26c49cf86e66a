"""Synthetic text-line images for training and testing recognizers."""

from .atlas import Glyph, GlyphSource, MissingGlyph, build_atlas, default_atlas, default_atlas_path, load_atlas
from .dataset import Manifest, ManifestRow, generate_dataset, read_manifest
from .render import DistortionParams, SynthSpec, TextTooLong, ink_angle_deg, render_line, render_stages
from .sampling import DistortionRanges, EmptyCorpus, sample_specs

__all__ = [
    "DistortionParams",
    "DistortionRanges",
    "EmptyCorpus",
    "Glyph",
    "GlyphSource",
    "Manifest",
    "ManifestRow",
    "MissingGlyph",
    "SynthSpec",
    "TextTooLong",
    "build_atlas",
    "default_atlas",
    "default_atlas_path",
    "generate_dataset",
    "ink_angle_deg",
    "load_atlas",
    "read_manifest",
    "render_line",
    "render_stages",
    "sample_specs",
]
