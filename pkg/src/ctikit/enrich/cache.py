"""On-disk verdict cache keyed by digest(service, ioc value).

A cache hit returns the stored bytes untouched, so repeated runs emit
byte-identical verdicts. Writes go through a temp file and rename.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Optional

from .verdict import ServiceId, Verdict


def verdict_digest(service: ServiceId, ioc_value: str) -> str:
    return hashlib.sha256(f"{service.value}:{ioc_value}".encode("utf-8")).hexdigest()


class VerdictCache:
    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)

    def path_for(self, service: ServiceId, ioc_value: str) -> Path:
        return self.directory / service.value / f"{verdict_digest(service, ioc_value)}.json"

    def get_bytes(self, service: ServiceId, ioc_value: str) -> Optional[bytes]:
        path = self.path_for(service, ioc_value)
        if not path.is_file():
            return None
        return path.read_bytes()

    def get(self, service: ServiceId, ioc_value: str) -> Optional[Verdict]:
        raw = self.get_bytes(service, ioc_value)
        if raw is None:
            return None
        return Verdict.from_dict(json.loads(raw.decode("utf-8")))

    def put(self, verdict: Verdict) -> None:
        path = self.path_for(verdict.service, verdict.ioc_value)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps(verdict.to_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(payload)
        os.replace(tmp, path)
