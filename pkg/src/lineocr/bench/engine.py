"""Running external OCR engines through a subprocess contract.

An engine is a command template with an ``{input_image}`` and an
``{output_file}`` placeholder.  The command must write the page's text to
the output file, either as plain text (one line per text line) or as a
JSON page file when the output suffix is ``.json``.
"""

from __future__ import annotations

import json
import logging
import os
import shlex
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..ingest import PREDICTION, ParseError, ValidationError, load_page
from ..model import Corpus, PageAnnotation

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

INPUT = "{input_image}"
OUTPUT = "{output_file}"
STAGE_LABELS = ("detection+recognition", "recognition_only")


class AdapterConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineAdapter:
    name: str
    command_template: str
    timeout: float = 120.0
    stage_label: str = "detection+recognition"
    output_suffix: str = ".txt"
    detector: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise AdapterConfigError("engine needs a name")
        for placeholder in (INPUT, OUTPUT):
            count = self.command_template.count(placeholder)
            if count != 1:
                raise AdapterConfigError(
                    f"engine {self.name!r}: template must contain {placeholder} exactly once (found {count})"
                )
        if self.stage_label not in STAGE_LABELS:
            raise AdapterConfigError(f"engine {self.name!r}: stage must be one of {', '.join(STAGE_LABELS)}")
        if self.output_suffix not in (".txt", ".json"):
            raise AdapterConfigError(f"engine {self.name!r}: output_suffix must be .txt or .json")
        if self.timeout <= 0:
            raise AdapterConfigError(f"engine {self.name!r}: timeout must be positive")
        try:
            shlex.split(self.command_template)
        except ValueError as exc:
            raise AdapterConfigError(f"engine {self.name!r}: cannot parse command: {exc}") from exc

    def argv(self, input_image: str | os.PathLike, output_file: str | os.PathLike) -> list[str]:
        """Tokenize the template first, then fill placeholders, so paths never need quoting."""
        return [
            tok.replace(INPUT, str(input_image)).replace(OUTPUT, str(output_file))
            for tok in shlex.split(self.command_template)
        ]


def adapter_from_dict(raw: dict) -> EngineAdapter:
    known = {"name", "command", "timeout", "stage", "output_suffix", "detector"}
    unknown = set(raw) - known
    if unknown:
        raise AdapterConfigError(f"unknown engine fields: {', '.join(sorted(unknown))}")
    if "name" not in raw or "command" not in raw:
        raise AdapterConfigError("engine entries need 'name' and 'command'")
    return EngineAdapter(
        name=str(raw["name"]),
        command_template=str(raw["command"]),
        timeout=float(raw.get("timeout", 120.0)),
        stage_label=str(raw.get("stage", "detection+recognition")),
        output_suffix=str(raw.get("output_suffix", ".txt")),
        detector=str(raw.get("detector", "")),
    )


def load_engine_config(path: str | Path) -> list[EngineAdapter]:
    """Engines from a JSON or TOML file holding an ``engines`` list."""
    path = Path(path)
    try:
        if path.suffix == ".toml":
            raw = tomllib.loads(path.read_text(encoding="utf-8"))
        else:
            raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise AdapterConfigError(f"{path}: {exc}") from exc
    entries = raw.get("engines") if isinstance(raw, dict) else raw
    if not isinstance(entries, list) or not entries:
        raise AdapterConfigError(f"{path}: expected a non-empty 'engines' list")
    adapters = [adapter_from_dict(e) for e in entries]
    names = [a.name for a in adapters]
    if len(set(names)) != len(names):
        raise AdapterConfigError(f"{path}: engine names must be unique")
    return adapters


@dataclass(frozen=True)
class TimingRecord:
    page_id: str
    stage_seconds: dict[str, float] = field(default_factory=dict)
    excluded_stages: tuple[str, ...] = ()

    @property
    def seconds(self) -> float:
        return sum(t for stage, t in self.stage_seconds.items() if stage not in self.excluded_stages)

    def excluding(self, stages: Sequence[str]) -> "TimingRecord":
        merged = tuple(sorted(set(self.excluded_stages) | set(stages)))
        return TimingRecord(self.page_id, dict(self.stage_seconds), merged)

    def to_dict(self) -> dict:
        return {"page_id": self.page_id, "stage_seconds": self.stage_seconds, "excluded_stages": list(self.excluded_stages)}

    @classmethod
    def from_dict(cls, d: dict) -> "TimingRecord":
        return cls(d["page_id"], {k: float(v) for k, v in d["stage_seconds"].items()}, tuple(d.get("excluded_stages", ())))


@dataclass(frozen=True)
class EngineFailure:
    page_id: str
    engine: str
    reason: str


@dataclass(frozen=True)
class EngineRun:
    engine: EngineAdapter
    predictions: Corpus
    timings: tuple[TimingRecord, ...]
    failures: tuple[EngineFailure, ...]


def _run_page(adapter: EngineAdapter, page: PageAnnotation, image_root: Path | None, workdir: Path):
    empty = PageAnnotation(page_id=page.page_id)
    if not page.image_ref:
        return empty, None, EngineFailure(page.page_id, adapter.name, "page has no image_ref")
    image = Path(page.image_ref)
    if not image.is_absolute() and image_root is not None:
        image = image_root / image
    output = workdir / f"{page.page_id}{adapter.output_suffix}"
    argv = adapter.argv(image, output)
    start = time.perf_counter()
    try:
        proc = subprocess.run(argv, capture_output=True, timeout=adapter.timeout, check=False)
    except subprocess.TimeoutExpired:
        return empty, None, EngineFailure(page.page_id, adapter.name, f"timed out after {adapter.timeout}s")
    except OSError as exc:
        return empty, None, EngineFailure(page.page_id, adapter.name, f"could not start: {exc}")
    elapsed = time.perf_counter() - start
    timing = TimingRecord(page.page_id, {adapter.stage_label: elapsed})
    if proc.returncode != 0:
        tail = proc.stderr.decode("utf-8", "replace").strip().splitlines()[-1:] or [""]
        return empty, timing, EngineFailure(page.page_id, adapter.name, f"exit {proc.returncode}: {tail[0]}")
    if not output.exists():
        return empty, timing, EngineFailure(page.page_id, adapter.name, "engine wrote no output file")
    try:
        pred = load_page(output, PREDICTION)
    except (ParseError, ValidationError) as exc:
        return empty, timing, EngineFailure(page.page_id, adapter.name, f"unreadable output: {exc}")
    # the engine's own page_id is ignored; the page is whichever we asked for
    return PageAnnotation(page_id=page.page_id, lines=pred.lines, image_ref=page.image_ref), timing, None


def run_engine(
    adapter: EngineAdapter,
    pages: Corpus,
    *,
    image_root: str | Path | None = None,
    workers: int | None = None,
    workdir: str | Path | None = None,
) -> EngineRun:
    """Run ``adapter`` on every page; per-page failures are recorded, never raised."""
    root = Path(image_root) if image_root is not None else None
    workers = workers or os.cpu_count() or 1
    with tempfile.TemporaryDirectory(prefix=f"lineocr-{adapter.name}-") as tmp:
        work = Path(workdir) if workdir is not None else Path(tmp)
        work.mkdir(parents=True, exist_ok=True)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda p: _run_page(adapter, p, root, work), pages.pages))
    preds = tuple(r[0] for r in results)
    timings = tuple(r[1] for r in results if r[1] is not None)
    failures = tuple(r[2] for r in results if r[2] is not None)
    for f in failures:
        log.warning("%s failed on %s: %s", f.engine, f.page_id, f.reason)
    return EngineRun(adapter, Corpus(preds, name=adapter.name), timings, failures)


def save_timings(timings: Sequence[TimingRecord], path: str | Path) -> None:
    Path(path).write_text(json.dumps([t.to_dict() for t in timings], indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_timings(path: str | Path) -> list[TimingRecord]:
    return [TimingRecord.from_dict(d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]
