"""Self-describing artifact files: JSONL and CSV with a schema header line.

Every dataset the pipeline writes starts with one header line naming its
schema and version, so stage outputs can be inspected and re-run
individually. Readers skip the header transparently.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from .model import canonical_json


def write_jsonl(path: str | Path, schema: str, rows: Iterable[dict[str, Any]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(canonical_json({"schema": schema, "version": 1}) + b"\n")
        for row in rows:
            fh.write(canonical_json(row) + b"\n")


def read_jsonl(path: str | Path) -> Iterator[dict[str, Any]]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            if isinstance(data, dict) and str(data.get("schema", "")).startswith("ctikit."):
                continue
            yield data


def format_float(value: float) -> str:
    """Stable shortest-repr float formatting for CSV cells."""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def write_csv(
    path: str | Path, schema: str, header: list[str], rows: Iterable[Iterable[Any]]
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema: {schema} v1\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(lines)
    rows = list(reader)
    if not rows:
        return [], []
    return rows[0], rows[1:]


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
