"""Run manifests and atomic file output for the CLI."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass, field


def atomic_write(path: str, text: str) -> None:
    """Write-then-rename so partial output never lands at `path`."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".specedge-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """What a CLI run consumed and produced; one per invocation."""

    command: str
    inputs: dict
    seed: int | None
    params: dict = field(default_factory=dict)
    started: float = field(default_factory=time.time)
    outputs: list = field(default_factory=list)

    def record_output(self, path: str) -> None:
        self.outputs.append(path)

    def write(self, path: str, tool_version: str) -> None:
        body = {
            "command": self.command,
            "inputs": self.inputs,
            "seed": self.seed,
            "params": self.params,
            "tool_version": tool_version,
            "wall_time_s": round(time.time() - self.started, 3),
            "outputs": self.outputs,
        }
        atomic_write(path, json.dumps(body, indent=2) + "\n")
