"""Deterministic output emission: config hashing, CSV and JSON writers."""
from __future__ import annotations

import datetime
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "config_hash",
    "header_lines",
    "write_csv",
    "write_json",
    "read_embedded_hash",
]


def config_hash(canonical_text: str) -> str:
    return hashlib.sha256(canonical_text.encode("utf-8")).hexdigest()[:16]


def header_lines(cfg_hash: str, deterministic: bool) -> list:
    lines = [f"config_hash={cfg_hash}"]
    if not deterministic:
        lines.append(f"generated={datetime.datetime.now().isoformat()}")
    return lines


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence],
              headers: Sequence[str] = ()) -> None:
    with open(path, "w") as fh:
        for line in headers:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_json(path: Path, payload: dict, cfg_hash: str, deterministic: bool) -> None:
    payload = dict(payload)
    payload["config_hash"] = cfg_hash
    if not deterministic:
        payload["generated"] = datetime.datetime.now().isoformat()
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_embedded_hash(path: Path) -> str:
    """Extract the config hash embedded in a CSV comment header or JSON field."""
    text = path.read_text()
    if path.suffix == ".json":
        return json.loads(text).get("config_hash", "")
    for line in text.splitlines():
        if line.startswith("# config_hash="):
            return line.split("=", 1)[1].strip()
        if not line.startswith("#"):
            break
    return ""
