"""Bundled example project and its single-fault mutations."""

from __future__ import annotations

import json
import shutil
from importlib import resources
from pathlib import Path
from typing import Any

from .common import dump_json
from .workflow import enumerate_project, refresh_all

EXAMPLES = {"office-robot": "office_robot"}
FIXTURE_TIMESTAMP = "2022-07-29T00:00:00+00:00"


def _data() -> Path:
    return Path(str(resources.files("sacekit") / "data"))


def example_dir(name: str = "office-robot") -> Path:
    if name not in EXAMPLES:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(sorted(EXAMPLES))}")
    return _data() / EXAMPLES[name]


def mutation_names() -> list[str]:
    return sorted(p.stem for p in (_data() / "mutations").glob("*.json"))


def load_mutation(name: str) -> dict:
    return json.loads((_data() / "mutations" / f"{name}.json").read_text(encoding="utf-8"))


def _apply(root: Path, op: dict[str, Any]) -> None:
    target = root / op["file"]
    if op["op"] == "delete":
        target.unlink()
        return
    doc = json.loads(target.read_text(encoding="utf-8"))
    *head, last = op["path"]
    node = doc
    for key in head:
        node = node[key]
    if op["op"] == "set":
        node[last] = op["value"]
    elif op["op"] == "remove":
        del node[last]
    else:
        raise ValueError(f"unknown mutation op {op['op']!r}")
    target.write_text(dump_json(doc), encoding="utf-8")


def materialize_fixture(dest: Path, mutation: str | None = None, *, example: str = "office-robot",
                        validated_at: str = FIXTURE_TIMESTAMP) -> Path:
    """Copy the example into ``dest``, apply a mutation, enumerate and validate everything present."""
    dest = Path(dest)
    if dest.exists() and any(dest.iterdir()):
        raise FileExistsError(f"{dest} is not empty")
    shutil.copytree(example_dir(example), dest, dirs_exist_ok=True)
    if mutation is not None:
        for op in load_mutation(mutation)["operations"]:
            _apply(dest, op)
    enumerate_project(dest)
    refresh_all(dest, validated_at=validated_at)
    return dest
