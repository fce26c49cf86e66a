"""Acceptance criteria, each at its stated tolerance and time limit.

Every test prints exactly one ``PASS``/``FAIL`` line (``SKIP`` for the
criterion that is explicitly out of reach without trained models).
"""

import json
import random
import string
import time
from contextlib import contextmanager

import numpy as np
import pytest

from harness import engine_entry, write_engines, write_gt
from lineocr.align import AlignmentCounts, align
from lineocr.bench import evaluate, to_json
from lineocr.cli import main
from lineocr.metrics import crr_value, fca, page_crr
from lineocr.model import Corpus, make_page
from lineocr.ordering import order_by_reference
from lineocr.stats import char_frequency, words_per_line
from lineocr.synth import DistortionParams, SynthSpec, default_atlas, render_line, sample_specs
from lineocr.synth.render import ink_angle_deg, render_stages
from oracles import search_counts

pytestmark = pytest.mark.acceptance


@contextmanager
def criterion(capsys, name: str, limit_s: float | None = None):
    """Run a criterion body, then print one verdict line and re-raise failures."""
    start = time.perf_counter()
    failure = None
    try:
        yield
    except AssertionError as exc:
        failure = exc
    elapsed = time.perf_counter() - start
    if failure is None and limit_s is not None and elapsed >= limit_s:
        failure = AssertionError(f"took {elapsed:.2f}s, limit {limit_s}s")
    budget = f" (limit {limit_s:g}s)" if limit_s is not None else ""
    verdict = "PASS" if failure is None else "FAIL"
    with capsys.disabled():
        print(f"\n[acceptance] {verdict} {name}: {elapsed:.2f}s{budget}" + (f" -- {failure}" if failure else ""))
    if failure is not None:
        raise failure


def _words(rng, n=1500):
    return ["".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(2, 9))) for _ in range(n)]


def _line(rng, words, length=60):
    s = ""
    while len(s) < length:
        s += rng.choice(words) + " "
    return s[:length].strip()


def _corrupt(rng, s, edits):
    chars = list(s)
    for _ in range(edits):
        k = rng.randrange(len(chars))
        op = rng.random()
        if op < 0.6:
            chars[k] = rng.choice(string.ascii_lowercase)
        elif op < 0.8 and len(chars) > 1:
            del chars[k]
        else:
            chars.insert(k, rng.choice(string.ascii_lowercase))
    return "".join(chars)


def test_headline_numbers_not_reproducible(capsys):
    with capsys.disabled():
        print("\n[acceptance] SKIP headline table numbers: need trained recognizers and the original page set")
    pytest.skip("headline figures need trained models and the original dataset; replaced by the property suites")


def test_crr_formula_suite(capsys):
    with criterion(capsys, "CRR formula suite (300 random pairs vs script-search oracle)", 10):
        rng = random.Random(2024)
        for _ in range(300):
            a = "".join(rng.choice("abc") for _ in range(rng.randint(0, 12)))
            b = "".join(rng.choice("abc") for _ in range(rng.randint(0, 12)))
            counts = align(a, b)
            assert counts.as_tuple() == search_counts(a, b), (a, b)
            s, d, i, c = counts.as_tuple()
            if s + d + c:
                assert abs(crr_value(counts) - (1 - (s + d + i) / (s + d + c))) <= 1e-12
        assert crr_value(align("", "")) == 1.0
        assert crr_value(align("", "abc")) == 0.0
        assert crr_value(align("a", "aaaa")) == -2.0
        assert crr_value(AlignmentCounts(1, 0, 0, 2)) == pytest.approx(0.6667, abs=1e-4)


def test_fca_order_invariance(capsys):
    with criterion(capsys, "FCA bit-identical under 10 permutations x 100 pages, CRR moves", 30):
        rng = random.Random(97)
        words = _words(rng)
        nontrivial = crr_changed = 0
        for p in range(100):
            gt_lines = [_line(rng, words, rng.randint(20, 70)) for _ in range(rng.randint(5, 40))]
            pred_lines = [_corrupt(rng, s, rng.randint(0, 3)) for s in gt_lines]
            gt = make_page(f"g{p}", gt_lines)
            base_pred = make_page(f"p{p}", pred_lines)
            base_fca = fca(gt, base_pred)[0].value
            base_crr = page_crr(gt, base_pred).value
            for _ in range(10):
                shuffled = pred_lines[:]
                rng.shuffle(shuffled)
                pred = make_page(f"p{p}", shuffled)  # fresh ids: nothing ties the lines to their old slots
                assert fca(gt, pred)[0].value == base_fca
                if shuffled != pred_lines:
                    nontrivial += 1
                    crr_changed += page_crr(gt, pred).value != base_crr
        assert crr_changed >= 0.95 * nontrivial, (crr_changed, nontrivial)


def test_reference_ordering_restoration(capsys):
    with criterion(capsys, "reference-guided reorder restores CRR 1.0; beats as-is with 10% bad lines", 20):
        rng = random.Random(5)
        words = _words(rng)
        improved = 0
        for p in range(50):
            lines = [_line(rng, words, rng.randint(30, 70)) for _ in range(rng.randint(10, 40))]
            gt = make_page(f"g{p}", lines)
            ids = [ln.id for ln in gt.lines]
            rng.shuffle(ids)
            permuted = gt.with_order(ids)
            restored, _ = order_by_reference(gt, permuted, tau=0.9)
            assert page_crr(gt, restored).value == 1.0

            corrupted_ids = set(rng.sample(ids, max(1, len(ids) // 10)))
            noisy_lines = []
            for ln in permuted.lines:
                text = ln.text
                if ln.id in corrupted_ids:
                    while 1 - align(ln.text, text).errors / max(len(ln.text), len(text)) >= 0.9:
                        text = _corrupt(rng, text, max(2, len(text) // 5))
                noisy_lines.append(ln.__class__(ln.id, text, ln.order_index))
            noisy = permuted.__class__(permuted.page_id, tuple(noisy_lines))
            restored, trace = order_by_reference(gt, noisy, tau=0.9)
            assert set(trace.accepted_ids) == set(ids) - corrupted_ids
            improved += page_crr(gt, restored).value > page_crr(gt, noisy).value
        assert improved >= 45, improved


def test_fca_split_tolerance(capsys):
    with criterion(capsys, "FCA split/merge tolerance (exact)"):
        assert fca(make_page("g", ["hello world"]), make_page("p", ["hello", "world"]))[0].value == 1.0
        assert fca(make_page("g", ["hello", "world"]), make_page("p", ["hello world"]))[0].value == 1.0


def test_synthgen_determinism_and_bounds(capsys):
    with criterion(capsys, "synthgen: 1000 specs bit-identical, 32x400, skew +-0.5 deg, salt-pepper +-20%", 60):
        glyphs = default_atlas()
        corpus = ["Lorem ipsum dolor sit amet", "consectetur adipiscing elit", "sed do eiusmod tempor",
                  "incididunt ut labore et dolore magna aliqua", "It’s 42% off: (a+b)=c?"]
        specs = sample_specs(corpus, 1000, 11, glyphs.id)
        assert specs == sample_specs(corpus, 1000, 11, glyphs.id)
        first = [render_line(s, glyphs) for s in specs]
        again = [render_line(s, glyphs) for s in sample_specs(corpus, 1000, 11, glyphs.id)]
        assert all(a.shape == (32, 400) and a.dtype == np.uint8 for a in first)
        assert all(np.array_equal(a, b) for a, b in zip(first, again))

        tilted = render_stages(SynthSpec("o" * 30, glyphs.id, DistortionParams(skew_deg=10.0)), glyphs)
        assert abs(ink_angle_deg(tilted["geometry"]) - 10.0) <= 0.5

        p = 0.03
        flipped = total = 0
        for k in range(40):
            spec = SynthSpec(corpus[k % len(corpus)], glyphs.id,
                             DistortionParams(noise="salt_pepper", noise_amount=p, blur_sigma=0.8), seed=k)
            st = render_stages(spec, glyphs)
            flipped += int((st["noise"] != st["blur"]).sum())
            total += st["noise"].size
        assert total >= 100_000
        assert abs(flipped / total - p) <= 0.2 * p, flipped / total


def test_closed_loop_through_cli(tmp_path, capsys):
    with criterion(capsys, "closed loop via CLI: copy engine 1.0/1.0; shuffling engine FCA 1.0, CRR<1 as-is, 1.0 guided", 30):
        rng = random.Random(3)
        words = _words(rng, 300)
        pages = {f"page{k:02d}": [_line(rng, words, rng.randint(15, 50)) for _ in range(rng.randint(3, 12))]
                 for k in range(8)}
        gt_dir = tmp_path / "gt"
        write_gt(gt_dir, pages)
        cfg = write_engines(tmp_path / "engines.json", engine_entry("copy", "copy_text.py"),
                            engine_entry("rotate", "rotate_lines.py"))
        out = tmp_path / "report"
        with capsys.disabled():
            code = main(["eval", str(gt_dir), "--engines", str(cfg), "--order", "as_is", "--order", "ref",
                         "--format", "json", "--out", str(out)])
        assert code == 0
        rows = {(r["engine"], r["strategy"]): r for r in json.loads((out / "report.json").read_text())["corpus"]}
        for strategy in ("as_is", "G.O"):
            assert rows["copy", strategy]["crr"] == 1.0 and rows["copy", strategy]["fca"] == 1.0
            assert rows["rotate", strategy]["fca"] == 1.0
        assert rows["rotate", "as_is"]["crr"] < 1.0
        assert rows["rotate", "G.O"]["crr"] == 1.0


def _throughput_corpus():
    rng = random.Random(0)
    words = _words(rng, 2000)
    gts, preds = [], []
    for p in range(251):
        lines = [_line(rng, words) for _ in range(40)]
        gts.append(make_page(f"p{p:03d}", lines))
        noisy = [_corrupt(rng, s, 3) for s in lines]
        rng.shuffle(noisy)  # worst case for page CRR: no long diagonal to band around
        preds.append(make_page(f"p{p:03d}", noisy))
    return Corpus(tuple(gts)), Corpus(tuple(preds))


def test_throughput(capsys):
    gt, pred = _throughput_corpus()
    # load compiled kernels before timing
    evaluate(Corpus(gt.pages[:1]), Corpus(pred.pages[:1]))
    with criterion(capsys, "throughput: 251 pages x 40 lines x 60 chars, both metrics, single thread", 10):
        serial = evaluate(gt, pred, workers=1)
    with criterion(capsys, "parallel evaluation report identical to serial"):
        assert to_json(evaluate(gt, pred, workers=4)) == to_json(serial)


def test_statistics_fixture(capsys):
    with criterion(capsys, "statistics on a 3-line fixture match hand counts"):
        corpus = Corpus((make_page("a", ["We will", "watch  over"]), make_page("b", ["his Children"])))
        assert char_frequency(corpus).as_dict() == {
            "w": 3, "e": 3, "l": 3, " ": 3, "i": 3, "a": 1, "t": 1, "c": 2, "h": 3,
            "o": 1, "v": 1, "r": 2, "s": 1, "d": 1, "n": 1,
        }
        assert char_frequency(corpus).total == 29
        assert words_per_line(corpus).bins == ((2, 3),)
