"""Check records, tensor dumps and their deterministic JSON / text rendering.

JSON output has sorted keys, no insignificant whitespace variation, and every
float printed with 17 significant digits (``format(v, ".17g")``), so equal
reports are byte-identical.  Non-finite floats are emitted as ``null``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CheckRecord:
    id: str
    anchor: str
    residual: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class TensorDump:
    id: str
    labels: tuple[str, ...]
    values: np.ndarray  # shape (P,) + tensor shape

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "index_labels": list(self.labels),
            "shape": list(self.values.shape[1:]),
            "values": np.asarray(self.values, dtype=float).tolist(),
        }


@dataclass
class Report:
    scenario: str
    command: str
    seed: int
    x: np.ndarray
    y: np.ndarray
    checks: list[CheckRecord] = field(default_factory=list)
    tensors: list[TensorDump] = field(default_factory=list)
    options: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "command": self.command,
            "options": dict(self.options),
            "seed": self.seed,
            "points": {"x": np.asarray(self.x, float).tolist(), "y": np.asarray(self.y, float).tolist()},
            "checks": [c.as_dict() for c in self.checks],
            "tensors": [t.as_dict() for t in self.tensors],
            "summary": {
                "total": len(self.checks),
                "failed": sum(not c.passed for c in self.checks),
                "pass": self.passed,
            },
        }


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return "null"
        return format(v, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ",".join(f"{json.dumps(str(k), ensure_ascii=False)}:{_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def to_json(report: Report) -> str:
    return _encode(report.as_dict()) + "\n"


def to_text(report: Report) -> str:
    lines = [
        f"scenario: {report.scenario}   command: {report.command}   seed: {report.seed}   "
        f"points: {len(report.x)}",
    ]
    if report.options:
        lines.append("options: " + ", ".join(f"{k}={v}" for k, v in sorted(report.options.items())))
    if report.checks:
        wid = max(len(c.id) for c in report.checks)
        lines.append(f"{'status':6}  {'check':{wid}}  {'residual':>10}  {'tolerance':>10}  anchor")
        for c in report.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{status:6}  {c.id:{wid}}  {c.residual:10.3e}  {c.tolerance:10.3e}  {c.anchor}")
    else:
        lines.append("(no checks)")
    for t in report.tensors:
        lines.append(f"tensor {t.id} [{','.join(t.labels)}] shape {tuple(t.values.shape[1:])}, "
                     f"max |entry| {float(np.max(np.abs(t.values), initial=0.0)):.6g}")
    failed = sum(not c.passed for c in report.checks)
    lines.append(f"{len(report.checks) - failed}/{len(report.checks)} checks passed")
    return "\n".join(lines) + "\n"


def emit(report: Report, fmt: str = "json") -> bytes:
    if fmt == "json":
        return to_json(report).encode("utf-8")
    if fmt == "text":
        return to_text(report).encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")
