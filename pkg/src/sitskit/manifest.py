"""Run manifests: enough recorded state to replay a command bit-identically."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    seed: int | None = None
    wall_time_s: float = 0.0
    version: str = ""
    threads: int | None = None
    created_utc: str = ""

    def stamp(self) -> "RunManifest":
        self.created_utc = datetime.now(timezone.utc).isoformat()
        return self


def write_manifest(manifest: RunManifest, path: str | os.PathLike) -> None:
    """Serialize as JSON via an adjacent temp file and an atomic rename."""
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(asdict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def read_manifest(path: str | os.PathLike) -> RunManifest:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return RunManifest(**data)
