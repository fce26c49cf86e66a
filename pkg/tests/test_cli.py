import json
import subprocess
import sys

import pytest

from harness import engine_entry, write_engines, write_gt
from lineocr.cli import main
from lineocr.ingest import load_corpus, save_corpus
from lineocr.model import Corpus

PAGES = {"p0": ["first line of the page", "second line"], "p1": ["one more", "and the last one"]}


@pytest.fixture
def gt_dir(tmp_path):
    write_gt(tmp_path / "gt", PAGES)
    return tmp_path / "gt"


def test_help_runs_as_module():
    out = subprocess.run([sys.executable, "-m", "lineocr.cli", "--help"], capture_output=True, text=True, check=True)
    assert "eval" in out.stdout and "synth" in out.stdout


def test_eval_writes_all_formats(gt_dir, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["eval", str(gt_dir), "--pred", f"copy={gt_dir}", "--order", "as_is", "--order", "blind",
                 "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "| copy | 100.00 | 100.00 |" in stdout and "copy + B.O" in stdout
    assert sorted(p.name for p in out.iterdir()) == ["report.corpus.csv", "report.csv", "report.json", "report.md"]
    doc = json.loads((out / "report.json").read_text())
    assert [r["strategy"] for r in doc["corpus"]] == ["as_is", "B.O"]


def test_eval_is_byte_deterministic(gt_dir, tmp_path):
    for name in ("a", "b"):
        assert main(["eval", str(gt_dir), "--pred", str(gt_dir), "--out", str(tmp_path / name), "--format", "json"]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_eval_with_engines_reports_partial_failure(gt_dir, tmp_path, capsys):
    (gt_dir / "p1.img").write_text("SLOW\n")
    cfg = write_engines(tmp_path / "engines.json", engine_entry("slow", "slow_on_marker.py", timeout=1))
    assert main(["eval", str(gt_dir), "--engines", str(cfg)]) == 3
    assert "1 page(s) scored as empty" in capsys.readouterr().out


def test_run_saves_predictions(gt_dir, tmp_path):
    cfg = write_engines(tmp_path / "engines.json", engine_entry("copy", "copy_text.py"))
    assert main(["run", str(cfg), str(gt_dir), "--gt", str(gt_dir), "--out", str(tmp_path / "runs")]) == 0
    preds = load_corpus(tmp_path / "runs" / "copy")
    assert len(preds) == 2
    assert json.loads((tmp_path / "runs" / "copy.failures.json").read_text()) == []
    assert main(["eval", str(gt_dir), "--pred", str(tmp_path / "runs" / "copy"),
                 "--timings", str(tmp_path / "runs" / "copy.timings.json")]) == 0


def test_exit_codes(gt_dir, tmp_path, capsys):
    assert main(["eval", str(gt_dir)]) == 1  # no predictions given
    with pytest.raises(SystemExit) as err:
        main(["eval", str(gt_dir), "--order", "sideways"])
    assert err.value.code == 1
    assert main(["eval", str(gt_dir), "--pred", str(gt_dir), "--charset", "klingon"]) == 1
    assert main(["eval", str(tmp_path / "nowhere"), "--pred", str(gt_dir)]) == 1

    (gt_dir / "broken.json").write_text("{not json")
    assert main(["validate", str(gt_dir)]) == 2
    assert main(["eval", str(gt_dir), "--pred", str(gt_dir)]) == 2
    assert "broken.json:1" in capsys.readouterr().err


def test_unknown_prediction_page_is_data_error(gt_dir, tmp_path):
    extra = tmp_path / "pred"
    corpus = load_corpus(gt_dir)
    save_corpus(Corpus(corpus.pages + (corpus.pages[0].__class__("zz"),)), extra)
    assert main(["eval", str(gt_dir), "--pred", str(extra)]) == 2


def test_blind_order_on_text_predictions_is_data_error(gt_dir, tmp_path):
    pred = tmp_path / "pred"
    pred.mkdir()
    (pred / "p0.txt").write_text("second line\nfirst line of the page\n")
    assert main(["eval", str(gt_dir), "--pred", str(pred), "--order", "ref"]) == 0
    assert main(["eval", str(gt_dir), "--pred", str(pred), "--order", "blind"]) == 2


def test_validate_ok(gt_dir, capsys):
    assert main(["validate", str(gt_dir)]) == 0
    assert "2/2 files valid" in capsys.readouterr().out


def test_stats(gt_dir, tmp_path, capsys):
    assert main(["stats", str(gt_dir), "--out", str(tmp_path / "s")]) == 0
    text = (tmp_path / "s" / "words_per_line.csv").read_text()
    assert text == "label,count\n2,2\n4,1\n5,1\n"
    assert main(["stats", str(gt_dir), "--bars", "--top", "3"]) == 0
    assert "<space>" in capsys.readouterr().out


def test_synth(tmp_path, capsys):
    corpus = tmp_path / "lines.txt"
    corpus.write_text("hello world\nsecond sample line\n")
    assert main(["synth", "--corpus", str(corpus), "--n", "4", "--seed", "3", "--out", str(tmp_path / "ds")]) == 0
    assert len((tmp_path / "ds" / "manifest.tsv").read_text().splitlines()) == 4
    ranges = tmp_path / "ranges.json"
    ranges.write_text(json.dumps({"skew_deg": [0, 0], "noise_kinds": ["none"]}))
    assert main(["synth", "--corpus", str(corpus), "--n", "2", "--out", str(tmp_path / "ds2"),
                 "--ranges", str(ranges)]) == 0
    ranges.write_text(json.dumps({"wobble": [0, 1]}))
    assert main(["synth", "--corpus", str(corpus), "--n", "2", "--out", str(tmp_path / "ds3"),
                 "--ranges", str(ranges)]) == 1


def test_atlas_build(tmp_path):
    font = "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf"
    pytest.importorskip("PIL")
    from pathlib import Path

    if not Path(font).exists():
        pytest.skip("DejaVu font not installed")
    assert main(["atlas", font, "--size", "16", "--out", str(tmp_path / "atlas"), "--name", "dv16"]) == 0
    from lineocr.synth import load_atlas

    atlas = load_atlas(tmp_path / "atlas")
    assert atlas.name == "dv16" and "’" in atlas.glyphs
