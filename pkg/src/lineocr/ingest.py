"""Reading and writing page files, and text normalization.

Page file (UTF-8 JSON, one page per file)::

    {"page_id": "p1", "image_ref": "p1.png", "width": 1000, "height": 1400,
     "lines": [{"id": "l0", "order_index": 0, "text": "...",
                "polygon": [[x, y], ...]}]}

A corpus is a directory of such files.  Predictions may also be plain
``.txt`` files, one physical line per text line, without geometry.
"""

from __future__ import annotations

import json
import logging
import string
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .model import Corpus, PageAnnotation, Point2, TextLine, Violation, validate_page

log = logging.getLogger(__name__)

GROUND_TRUTH = "ground_truth"
PREDICTION = "prediction"


class ParseError(ValueError):
    def __init__(self, path: str | Path, message: str, line: int | None = None):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class ValidationError(ValueError):
    def __init__(self, path: str | Path, violations: list[Violation]):
        self.path = str(path)
        self.violations = violations
        listing = "; ".join(
            f"{v.kind}({v.line_id}): {v.message}" if v.line_id else f"{v.kind}: {v.message}" for v in violations
        )
        super().__init__(f"{self.path}: {len(violations)} violation(s): {listing}")


class UnknownCharset(KeyError):
    pass


# -- charsets --------------------------------------------------------------


@dataclass(frozen=True)
class Charset:
    name: str
    members: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.members)) != len(self.members):
            raise ValueError(f"charset {self.name!r} has duplicate members")
        if any(len(ch) != 1 for ch in self.members):
            raise ValueError(f"charset {self.name!r} members must be single code points")
        object.__setattr__(self, "_lookup", frozenset(self.members))

    def __contains__(self, ch: object) -> bool:
        return ch in self._lookup  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.members)

    def with_space(self, name: str | None = None) -> "Charset":
        if " " in self:
            return self
        return Charset(name or f"{self.name}_space", self.members + (" ",))


# 94 visible ASCII characters plus the typographic apostrophe (U+2019).
_ENGLISH95 = tuple(string.digits + string.ascii_lowercase + string.ascii_uppercase + string.punctuation) + ("’",)

_BUILTIN = {
    "english95": lambda: Charset("english95", _ENGLISH95),
    "english95_space": lambda: Charset("english95_space", _ENGLISH95 + (" ",)),
}


def builtin_charset(name: str) -> Charset:
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise UnknownCharset(f"unknown charset {name!r}; known: {', '.join(sorted(_BUILTIN))}") from None


def load_charset(path: str | Path) -> Charset:
    """Read a charset override.

    ``.json`` files hold ``{"name": ..., "members": "..." | [...]}``; any
    other file is read as text and every distinct non-newline character in
    it becomes a member, in first-seen order.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.msg, exc.lineno) from exc
        members = raw.get("members")
        if members is None:
            raise ParseError(path, "missing required field 'members'")
        return Charset(raw.get("name", path.stem), tuple(members))
    return Charset(path.stem, tuple(dict.fromkeys(ch for ch in text if ch not in "\r\n")))


def resolve_charset(spec: str | None) -> Charset | None:
    """Builtin name, path to an override file, or ``None``/``"none"``."""
    if spec is None or spec == "none":
        return None
    if spec in _BUILTIN:
        return builtin_charset(spec)
    if Path(spec).exists():
        return load_charset(spec)
    raise UnknownCharset(f"{spec!r} is neither a builtin charset nor a readable file")


# -- normalization ---------------------------------------------------------


@dataclass(frozen=True)
class NormalizationPolicy:
    case_fold: bool = True
    unicode_form: str = "NFC"
    charset: Charset | None = None
    collapse_whitespace: bool = True

    def __post_init__(self) -> None:
        if self.unicode_form not in ("NFC", "none"):
            raise ValueError(f"unicode_form must be 'NFC' or 'none', got {self.unicode_form!r}")

    def describe(self) -> dict[str, Any]:
        return {
            "case_fold": self.case_fold,
            "unicode_form": self.unicode_form,
            "charset": self.charset.name if self.charset else "none",
            "charset_members": "".join(self.charset.members) if self.charset else None,
            "collapse_whitespace": self.collapse_whitespace,
        }


def normalize_text(s: str, policy: NormalizationPolicy = NormalizationPolicy()) -> str:
    """Unicode normalization, case folding, charset filtering, whitespace collapsing, in that order."""
    nfc = policy.unicode_form == "NFC"
    if nfc:
        s = unicodedata.normalize("NFC", s)
    if policy.case_fold:
        s = s.casefold()
        # folding can emit decomposed sequences (e.g. U+0130)
        if nfc:
            s = unicodedata.normalize("NFC", s)
    if policy.charset is not None:
        s = "".join(ch for ch in s if ch in policy.charset)
    if policy.collapse_whitespace:
        s = " ".join(s.split())
    return s


# -- page files ------------------------------------------------------------


def _require(obj: dict, key: str, kind: type | tuple[type, ...], path: Path, where: str) -> Any:
    if key not in obj:
        raise ParseError(path, f"{where}: missing required field {key!r}")
    value = obj[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ParseError(path, f"{where}: field {key!r} has type {type(value).__name__}", _line_of(path, key))
    return value


def _line_of(path: Path, key: str) -> int | None:
    # best-effort line context for a field-level error
    try:
        for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            if f'"{key}"' in line:
                return n
    except OSError:
        pass
    return None


def _optional_int(obj: dict, key: str, path: Path) -> int | None:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, int) or isinstance(value, bool):
        raise ParseError(path, f"field {key!r} must be an integer", _line_of(path, key))
    return value


def page_from_dict(raw: Any, path: Path, default_id: str) -> PageAnnotation:
    if not isinstance(raw, dict):
        raise ParseError(path, "top-level value must be an object", 1)
    lines_raw = _require(raw, "lines", list, path, "page")
    lines = []
    for k, item in enumerate(lines_raw):
        where = f"lines[{k}]"
        if not isinstance(item, dict):
            raise ParseError(path, f"{where}: must be an object")
        line_id = _require(item, "id", str, path, where)
        order_index = _require(item, "order_index", int, path, where)
        text = _require(item, "text", str, path, where)
        polygon = None
        if item.get("polygon") is not None:
            pts = item["polygon"]
            if not isinstance(pts, list) or not all(
                isinstance(p, list) and len(p) == 2 and all(isinstance(c, (int, float)) for c in p) for p in pts
            ):
                raise ParseError(path, f"{where}: polygon must be a list of [x, y] pairs", _line_of(path, "polygon"))
            polygon = tuple(Point2(float(x), float(y)) for x, y in pts)
        lines.append(TextLine(id=line_id, text=text, order_index=order_index, polygon=polygon))
    page_id = raw.get("page_id", default_id)
    if not isinstance(page_id, str):
        raise ParseError(path, "field 'page_id' must be a string", _line_of(path, "page_id"))
    image_ref = raw.get("image_ref")
    if image_ref is not None and not isinstance(image_ref, str):
        raise ParseError(path, "field 'image_ref' must be a string", _line_of(path, "image_ref"))
    return PageAnnotation(
        page_id=page_id,
        lines=tuple(lines),
        image_ref=image_ref,
        width=_optional_int(raw, "width", path),
        height=_optional_int(raw, "height", path),
    )


def page_to_dict(page: PageAnnotation) -> dict[str, Any]:
    out: dict[str, Any] = {"page_id": page.page_id}
    if page.image_ref is not None:
        out["image_ref"] = page.image_ref
    if page.width is not None:
        out["width"] = page.width
    if page.height is not None:
        out["height"] = page.height
    lines = []
    for line in page.ordered_lines():
        item: dict[str, Any] = {"id": line.id, "order_index": line.order_index, "text": line.text}
        if line.polygon is not None:
            item["polygon"] = [[p.x, p.y] for p in line.polygon]
        lines.append(item)
    out["lines"] = lines
    return out


def page_from_text(text: str, page_id: str) -> PageAnnotation:
    lines = tuple(
        TextLine(id=f"l{n}", text=content, order_index=n) for n, content in enumerate(text.splitlines())
    )
    return PageAnnotation(page_id=page_id, lines=lines)


def load_page(path: str | Path, kind: str = PREDICTION) -> PageAnnotation:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(path, f"not valid UTF-8: {exc.reason}") from exc
    if path.suffix == ".txt":
        if kind == GROUND_TRUTH:
            raise ParseError(path, "plain-text pages carry no geometry and cannot be ground truth")
        page = page_from_text(text, path.stem)
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.msg, exc.lineno) from exc
        page = page_from_dict(raw, path, path.stem)
    violations = validate_page(page, ground_truth=kind == GROUND_TRUTH)
    if violations:
        raise ValidationError(path, violations)
    return page


def page_files(path: str | Path) -> list[Path]:
    path = Path(path)
    if path.is_file():
        return [path]
    return sorted(p for p in path.iterdir() if p.is_file() and p.suffix in (".json", ".txt"))


def load_corpus(path: str | Path, kind: str = PREDICTION, name: str | None = None) -> Corpus:
    if kind not in (GROUND_TRUTH, PREDICTION):
        raise ValueError(f"kind must be {GROUND_TRUTH!r} or {PREDICTION!r}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    pages = [load_page(p, kind) for p in page_files(path)]
    log.debug("loaded %d %s pages from %s", len(pages), kind, path)
    try:
        return Corpus(pages=tuple(pages), name=name or path.stem)
    except ValueError as exc:
        raise ParseError(path, str(exc)) from exc


def save_page(page: PageAnnotation, path: str | Path) -> None:
    Path(path).write_text(json.dumps(page_to_dict(page), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def save_corpus(corpus: Corpus, path: str | Path) -> list[Path]:
    out_dir = Path(path)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for page in corpus.pages:
        target = out_dir / f"{page.page_id}.json"
        save_page(page, target)
        written.append(target)
    return written


def normalized_lines(page: PageAnnotation, policy: NormalizationPolicy) -> list[str]:
    """Normalized text of each line in reading order (empty lines kept)."""
    return [normalize_text(line.text, policy) for line in page.ordered_lines()]


def iter_lines(corpus: Corpus) -> Iterable[TextLine]:
    for page in corpus.pages:
        yield from page.ordered_lines()


__all__ = [
    "Charset",
    "GROUND_TRUTH",
    "NormalizationPolicy",
    "PREDICTION",
    "ParseError",
    "UnknownCharset",
    "ValidationError",
    "builtin_charset",
    "load_charset",
    "load_corpus",
    "load_page",
    "normalize_text",
    "resolve_charset",
    "save_corpus",
    "save_page",
]
