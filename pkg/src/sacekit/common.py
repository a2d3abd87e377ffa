from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import ArtifactParseError


@dataclass(frozen=True, order=True)
class Violation:
    """A structural problem found by one of the model checkers.

    Attributes:
        code: Stable identifier such as ``GSN001`` or ``ROD002``.
        locus: Where the problem sits (node id, feature path, cell).
        message: Human readable explanation.
    """

    code: str
    locus: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} {self.locus} {self.message}"


def has_content(path: Path | None) -> bool:
    """True for a non-empty regular file; empty scaffold stubs count as absent."""
    return path is not None and path.is_file() and path.stat().st_size > 0


def read_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ArtifactParseError(path, f"not UTF-8 ({exc.reason})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactParseError(path, f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def write_text_if_changed(path: Path, text: str) -> bool:
    """Write ``text`` unless the file already holds exactly that content."""
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists() and path.read_text(encoding="utf-8") == text:
        return False
    path.write_text(text, encoding="utf-8")
    return True


def file_checksum(path: Path) -> str:
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return f"sha256:{digest}"


def expect(cond: bool, path: object, detail: str) -> None:
    if not cond:
        raise ArtifactParseError(path, detail)
