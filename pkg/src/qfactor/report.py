"""Check records and the structured report file."""
from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

__all__ = ["CheckReport", "timed", "write_report", "read_report", "REPORT_SCHEMA"]

REPORT_SCHEMA = "qfactor-report/1"
RECORD_KEYS = ("name", "params", "residual", "tolerance", "margin", "passed", "notes")


def _jsonable(v: Any) -> Any:
    if isinstance(v, complex):
        return v.real if v.imag == 0 else {"re": v.real, "im": v.imag}
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(v[k]) for k in sorted(v)}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):  # numpy scalar
        return _jsonable(v.item())
    return v


@dataclass
class CheckReport:
    name: str
    params: dict
    residual: float
    tolerance: float
    margin: str = ""
    notes: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tolerance)

    def __bool__(self) -> bool:
        return self.passed

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: residual={self.residual:.3e} tol={self.tolerance:.1e}"

    def record(self) -> dict:
        raw = {
            "name": self.name,
            "params": self.params,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "margin": self.margin,
            "passed": self.passed,
            "notes": self.notes,
        }
        return {k: _jsonable(raw[k]) for k in RECORD_KEYS}

    @classmethod
    def from_record(cls, rec: dict) -> "CheckReport":
        res = rec["residual"]
        return cls(name=rec["name"], params=rec["params"],
                   residual=float(res) if not isinstance(res, str) else float(res),
                   tolerance=float(rec["tolerance"]), margin=rec.get("margin", ""),
                   notes=rec.get("notes", {}))


@contextmanager
def timed():
    """Yields a one-element list that receives the elapsed wall time."""
    box = [0.0]
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = time.perf_counter() - t0


def write_report(reports: Iterable[CheckReport], path: str | Path, config: dict | None = None) -> Path:
    """Deterministic JSON report; wall times go to a ``.timing.json`` sidecar."""
    reports = list(reports)
    path = Path(path)
    doc = {
        "schema": REPORT_SCHEMA,
        "config": _jsonable(config or {}),
        "summary": {"checks": len(reports), "failed": sum(not r.passed for r in reports)},
        "checks": [r.record() for r in reports],
    }
    path.write_text(json.dumps(doc, indent=1) + "\n")
    timing = {"wall_time": [[r.name, r.wall_time] for r in reports]}
    path.with_suffix(".timing.json").write_text(json.dumps(timing, indent=1) + "\n")
    return path


def read_report(path: str | Path) -> tuple[dict, list[CheckReport]]:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != REPORT_SCHEMA:
        raise ValueError(f"unknown report schema {doc.get('schema')!r}")
    return doc["config"], [CheckReport.from_record(r) for r in doc["checks"]]
