"""Engine adapters, evaluation and report emission."""

from .engine import (
    AdapterConfigError,
    EngineAdapter,
    EngineFailure,
    EngineRun,
    TimingRecord,
    load_engine_config,
    load_timings,
    run_engine,
    save_timings,
)
from .evaluate import CorpusRow, EvalReport, PageRow, UnknownPage, evaluate, merge_reports, recompute_corpus
from .report import emit_report, from_json, to_json, to_markdown

__all__ = [
    "AdapterConfigError",
    "CorpusRow",
    "EngineAdapter",
    "EngineFailure",
    "EngineRun",
    "EvalReport",
    "PageRow",
    "TimingRecord",
    "UnknownPage",
    "emit_report",
    "evaluate",
    "from_json",
    "load_engine_config",
    "load_timings",
    "merge_reports",
    "recompute_corpus",
    "run_engine",
    "save_timings",
    "to_json",
    "to_markdown",
]
