"""Config-driven verification suites and their reports."""

from __future__ import annotations

import json
import time
from importlib import resources
from pathlib import Path

from .report import Case, SuiteConfig, SuiteReport, emit_report, parse_json, to_csv, to_json
from .suites import SUITES


def default_config(suite: str) -> SuiteConfig:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    text = resources.files(__package__).joinpath("configs", f"{suite}.json").read_text()
    return SuiteConfig.from_dict(json.loads(text))


def load_config(path: str | Path) -> SuiteConfig:
    return SuiteConfig.from_dict(json.loads(Path(path).read_text()))


def run_suite(config: SuiteConfig) -> SuiteReport:
    if config.suite not in SUITES:
        raise ValueError(f"unknown suite {config.suite!r}")
    fn, _ = SUITES[config.suite]
    t0 = time.perf_counter()
    cases = fn(config)
    return SuiteReport(config.suite, config.to_dict(), cases, time.perf_counter() - t0)


__all__ = ["Case", "SuiteConfig", "SuiteReport", "SUITES", "default_config", "emit_report", "load_config",
           "parse_json", "run_suite", "to_csv", "to_json"]
