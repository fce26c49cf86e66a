"""Command-line entry point: ``lineocr {eval,run,synth,atlas,stats,validate}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data validation
error, 3 partial failures (outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .bench import (
    AdapterConfigError,
    UnknownPage,
    emit_report,
    evaluate,
    load_engine_config,
    load_timings,
    merge_reports,
    run_engine,
    save_timings,
    to_markdown,
)
from .bench.report import FORMATS, SUFFIX
from .ingest import (
    GROUND_TRUTH,
    PREDICTION,
    NormalizationPolicy,
    ParseError,
    UnknownCharset,
    ValidationError,
    builtin_charset,
    load_corpus,
    load_page,
    page_files,
    resolve_charset,
    save_page,
)
from .metrics import FcaParams
from .model import Corpus, MissingGeometry, PageAnnotation
from .ordering import OrderingStrategy
from .stats import char_frequency, words_per_line

log = logging.getLogger("lineocr")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_PARTIAL = 0, 1, 2, 3
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2, which we reserve for data errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _policy(args) -> NormalizationPolicy:
    return NormalizationPolicy(
        case_fold=not args.no_case_fold,
        unicode_form="none" if args.no_nfc else "NFC",
        charset=resolve_charset(args.charset),
        collapse_whitespace=not args.keep_whitespace,
    )


def _add_policy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--charset", default="english95_space",
                   help="builtin charset name, path to a charset file, or 'none' (default: english95_space)")
    p.add_argument("--no-case-fold", action="store_true", help="score case-sensitively")
    p.add_argument("--no-nfc", action="store_true", help="skip Unicode NFC normalization")
    p.add_argument("--keep-whitespace", action="store_true", help="do not collapse whitespace runs")


def _named_path(value: str) -> tuple[str | None, Path]:
    if "=" in value:
        name, path = value.split("=", 1)
        return name, Path(path)
    return None, Path(value)


def _strategies(args) -> list[OrderingStrategy]:
    return [OrderingStrategy(kind, tau=args.tau, row_overlap_threshold=args.row_overlap) for kind in args.order or ["as_is"]]


def _write_reports(report, args) -> None:
    sys.stdout.write(to_markdown(report))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for fmt in args.format or FORMATS:
            for written in emit_report(report, fmt, out / f"report{SUFFIX[fmt]}"):
                log.info("wrote %s", written)


# -- eval ------------------------------------------------------------------


def cmd_eval(args) -> int:
    policy = _policy(args)
    params = FcaParams(args.min_split, args.max_penalty)
    gt = load_corpus(args.gt, GROUND_TRUTH)
    reference = load_corpus(args.ref_dir, PREDICTION, name=Path(args.ref_dir).name) if args.ref_dir else None

    runs = []  # (name, detector, predictions, timings, failed page ids)
    for value in args.pred or []:
        name, path = _named_path(value)
        runs.append((name or path.name, "", load_corpus(path, PREDICTION, name=name or path.name), None, ()))
    if args.timings:
        if len(runs) != 1:
            raise UsageError("--timings needs exactly one --pred")
        name, detector, preds, _, failed = runs[0]
        runs[0] = (name, detector, preds, load_timings(args.timings), failed)
    partial = False
    if args.engines:
        image_root = Path(args.image_dir) if args.image_dir else Path(args.gt)
        for adapter in load_engine_config(args.engines):
            result = run_engine(adapter, gt, image_root=image_root, workers=args.workers)
            partial |= bool(result.failures)
            runs.append((adapter.name, adapter.detector, result.predictions, result.timings,
                         tuple(f.page_id for f in result.failures)))
    if not runs:
        raise UsageError("give at least one --pred directory or an --engines config")

    reports = []
    for name, detector, preds, timings, failed in runs:
        for strategy in _strategies(args):
            reports.append(
                evaluate(gt, preds, policy, strategy, params, timings, reference=reference, engine=name,
                         detector=detector, exclude_stages=args.exclude_stage or (), failed_pages=failed,
                         workers=args.workers or 1)
            )
    _write_reports(merge_reports(reports), args)
    return EXIT_PARTIAL if partial else EXIT_OK


# -- run -------------------------------------------------------------------


def _pages_for_images(image_dir: Path) -> Corpus:
    images = sorted(p for p in image_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    return Corpus(tuple(PageAnnotation(page_id=p.stem, image_ref=str(p.resolve())) for p in images), image_dir.name)


def cmd_run(args) -> int:
    adapters = load_engine_config(args.config)
    image_dir = Path(args.image_dir)
    pages = load_corpus(args.gt, GROUND_TRUTH) if args.gt else _pages_for_images(image_dir)
    out = Path(args.out)
    partial = False
    for adapter in adapters:
        result = run_engine(adapter, pages, image_root=image_dir, workers=args.workers)
        target = out / adapter.name
        target.mkdir(parents=True, exist_ok=True)
        for page in result.predictions.pages:
            save_page(page, target / f"{page.page_id}.json")
        # kept beside the page directory so it still loads as a corpus
        save_timings(result.timings, out / f"{adapter.name}.timings.json")
        failures = [{"page_id": f.page_id, "reason": f.reason} for f in result.failures]
        (out / f"{adapter.name}.failures.json").write_text(json.dumps(failures, indent=2) + "\n", encoding="utf-8")
        partial |= bool(failures)
        print(f"{adapter.name}: {len(pages) - len(failures)}/{len(pages)} pages -> {target}")
    return EXIT_PARTIAL if partial else EXIT_OK


# -- synth -----------------------------------------------------------------


def cmd_synth(args) -> int:
    from .synth import DistortionRanges, default_atlas, generate_dataset, load_atlas, sample_specs

    glyphs = load_atlas(args.atlas) if args.atlas else default_atlas()
    lines = Path(args.corpus).read_text(encoding="utf-8").splitlines()
    ranges = DistortionRanges()
    if args.ranges:
        raw = json.loads(Path(args.ranges).read_text(encoding="utf-8"))
        known = {f.name for f in fields(DistortionRanges)}
        unknown = set(raw) - known
        if unknown:
            raise UsageError(f"unknown range fields: {', '.join(sorted(unknown))}")
        ranges = DistortionRanges(**{k: tuple(v) for k, v in raw.items()})
    specs = sample_specs(lines, args.n, args.seed, glyphs.id, ranges)
    manifest = generate_dataset(specs, glyphs, args.out, workers=args.workers or 1)
    print(f"wrote {len(manifest.rows)} images to {args.out} ({len(manifest.failures)} failed)")
    return EXIT_PARTIAL if manifest.failures else EXIT_OK


def cmd_atlas(args) -> int:
    from .synth import build_atlas

    charset = builtin_charset(args.charset) if args.charset != "none" else None
    chars = charset.members if charset else [chr(c) for c in range(0x20, 0x7F)]
    out = build_atlas(args.font, args.size, chars, args.out, name=args.name)
    print(f"atlas written to {out}")
    return EXIT_OK


# -- stats / validate ------------------------------------------------------


def cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus, args.kind)
    policy = _policy(args)
    hists = {"char_frequency": char_frequency(corpus, policy), "words_per_line": words_per_line(corpus, policy)}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, hist in hists.items():
            (out / f"{name}.csv").write_text(hist.to_csv(), encoding="utf-8")
    for name, hist in hists.items():
        print(f"# {name} (total {hist.total})")
        sys.stdout.write(hist.render_bars(top=args.top) if args.bars else hist.to_csv())
    return EXIT_OK


def cmd_validate(args) -> int:
    bad = 0
    files = page_files(args.path)
    for path in files:
        try:
            load_page(path, args.kind)
        except (ParseError, ValidationError) as exc:
            bad += 1
            print(exc)
    print(f"{len(files) - bad}/{len(files)} files valid")
    return EXIT_DATA if bad else EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lineocr", description="OCR evaluation toolkit: CRR and FCA metrics, reading order, synthetic lines, engine benchmarks.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("gt", help="ground-truth page directory")
    p.add_argument("--pred", action="append", metavar="[NAME=]DIR", help="prediction directory (repeatable)")
    p.add_argument("--engines", metavar="CONFIG", help="engine config (JSON/TOML) to run on the ground-truth images")
    p.add_argument("--image-dir", help="root for relative image_ref paths (default: the gt directory)")
    p.add_argument("--timings", help="timings.json for the single --pred run")
    p.add_argument("--order", action="append", choices=["as_is", "blind", "ref"], help="ordering strategy (repeatable)")
    p.add_argument("--tau", type=float, default=0.9, help="similarity threshold for --order ref")
    p.add_argument("--ref-dir", help="reference corpus for --order ref (default: ground truth)")
    p.add_argument("--row-overlap", type=float, default=0.5, help="row overlap fraction for --order blind")
    p.add_argument("--min-split", type=int, default=2, help="FCA minimum split length")
    p.add_argument("--max-penalty", type=float, default=0.75, help="FCA maximum match penalty")
    p.add_argument("--exclude-stage", action="append", help="timing stage to leave out of seconds/page")
    p.add_argument("--format", action="append", choices=FORMATS, help="report format(s) written to --out")
    p.add_argument("--out", help="directory for report files")
    p.add_argument("--workers", type=int, default=None)
    _add_policy_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="run engines over page images and save predictions")
    p.add_argument("config", help="engine config (JSON/TOML)")
    p.add_argument("image_dir")
    p.add_argument("--gt", help="ground-truth directory defining the pages (default: every image)")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("synth", help="generate distorted synthetic line images")
    p.add_argument("--corpus", required=True, help="text file, one line of text per row")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--atlas", help="glyph atlas directory (default: bundled DejaVu Sans Mono)")
    p.add_argument("--ranges", help="JSON file overriding distortion ranges")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("atlas", help="rasterize a TrueType font into a glyph atlas")
    p.add_argument("font")
    p.add_argument("--size", type=int, default=24)
    p.add_argument("--out", required=True)
    p.add_argument("--name")
    p.add_argument("--charset", default="english95_space")
    p.set_defaults(func=cmd_atlas)

    p = sub.add_parser("stats", help="character and words-per-line histograms")
    p.add_argument("corpus")
    p.add_argument("--kind", choices=[GROUND_TRUTH, PREDICTION], default=PREDICTION)
    p.add_argument("--out", help="directory for CSV files")
    p.add_argument("--bars", action="store_true", help="print bar charts instead of CSV")
    p.add_argument("--top", type=int, default=None, help="only the N largest bins in bar charts")
    _add_policy_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("validate", help="check page files against the format and invariants")
    p.add_argument("path")
    p.add_argument("--kind", choices=[GROUND_TRUTH, PREDICTION], default=GROUND_TRUTH)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParseError, ValidationError, UnknownPage, MissingGeometry) as exc:
        print(f"lineocr: invalid data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UsageError, AdapterConfigError, UnknownCharset, FileNotFoundError, ValueError) as exc:
        print(f"lineocr: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

if __name__ == "__main__":
    sys.exit(main())
