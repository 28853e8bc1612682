"""Suite configuration and report types, and their JSON / CSV forms."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

VERDICTS = ("pass", "fail", "inconclusive")


@dataclass
class SuiteConfig:
    """Everything a suite run depends on.  Seeds are always explicit."""

    suite: str
    model: dict = field(default_factory=lambda: {"type": "heisenberg", "n": 1})
    params: dict | str = "auto"
    samples: int = 20
    seed: int = 0
    tol: float = 1e-3
    taus: list = field(default_factory=list)
    times: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.samples, int) or self.samples < 1:
            raise ValueError(f"samples must be a positive integer, got {self.samples!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")
        if not self.tol >= 0:
            raise ValueError("tolerance must be nonnegative")
        for k, mode in self.constants.items():
            if isinstance(mode, str) and mode not in ("traced", "fitted"):
                raise ValueError(f"constant mode for {k} must be traced, fitted or a number")

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Case:
    inputs: dict
    lhs: float
    rhs: float
    residual: float
    stderr: float | None
    verdict: str

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"bad verdict {self.verdict!r}")


@dataclass
class SuiteReport:
    suite: str
    config: dict
    cases: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def summary(self) -> dict:
        return {v: sum(c.verdict == v for c in self.cases) for v in VERDICTS}

    @property
    def exit_code(self) -> int:
        s = self.summary
        if s["fail"]:
            return 1
        if s["inconclusive"]:
            return 2
        return 0

    def to_dict(self) -> dict:
        # wall time is left out so reports are byte-identical across runs
        return {
            "suite": self.suite,
            "config": _encode(self.config),
            "cases": [_encode(asdict(c)) for c in self.cases],
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteReport":
        cases = [Case(**_decode(c)) for c in d["cases"]]
        return cls(d["suite"], _decode(d["config"]), cases)


def _encode(obj):
    # strict JSON has no infinities; they travel as strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _encode(obj.item())
    return obj


def _decode(obj):
    if isinstance(obj, str) and obj in ("inf", "-inf", "nan"):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def to_json(report: SuiteReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=False, allow_nan=False) + "\n"


def parse_json(text: str) -> SuiteReport:
    return SuiteReport.from_dict(json.loads(text))


def _flatten(prefix: str, obj, out: dict):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, (list, tuple)):
        out[prefix] = json.dumps(_encode(obj))
    else:
        out[prefix] = _encode(obj)


def to_csv(report: SuiteReport) -> str:
    rows = []
    for c in report.cases:
        row = {}
        _flatten("inputs", c.inputs, row)
        for k in ("lhs", "rhs", "residual", "stderr", "verdict"):
            row[k] = _encode(getattr(c, k))
        rows.append(row)
    header = []
    for r in rows:
        for k in r:
            if k not in header:
                header.append(k)
    if not header:
        header = ["lhs", "rhs", "residual", "stderr", "verdict"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def emit_report(report: SuiteReport, fmt: str = "json", path: str | Path | None = None) -> str:
    """Serialize ``report``; write it to ``path`` when given.  Returns the text."""
    if fmt == "json":
        text = to_json(report)
    elif fmt == "csv":
        text = to_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text
