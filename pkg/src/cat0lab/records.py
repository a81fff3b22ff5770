"""Run records: JSON payload plus provenance for every CLI invocation."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__


def jsonable(obj):
    """Recursively convert numpy scalars, Fractions, complex numbers and tuples."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def content_version() -> str:
    """Hash of the package sources, in the manner of a git tree of blob hashes."""
    root = Path(__file__).parent
    h = hashlib.sha1()
    for path in sorted(root.rglob("*.py")):
        data = path.read_bytes()
        blob = hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()
        h.update(f"{path.relative_to(root).as_posix()} {blob}\n".encode())
    return h.hexdigest()[:12]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunRecord:
    subcommand: str
    config_hash: str
    payload: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    passed: bool = True
    version: str = __version__
    content_version: str = field(default_factory=content_version)
    started: str = field(default_factory=_now)
    finished: str | None = None

    def finish(self):
        self.finished = _now()
        return self

    def to_dict(self) -> dict:
        return jsonable({
            "subcommand": self.subcommand, "config_hash": self.config_hash,
            "version": self.version, "content_version": self.content_version,
            "started": self.started, "finished": self.finished, "passed": self.passed,
            "warnings": self.warnings, "payload": self.payload,
        })

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{self.subcommand}.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path
