"""Check records and canonical JSON emission."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

TOOL_VERSION = "0.1.0"


@dataclass
class CheckResult:
    """Outcome of one exact check.

    ``flagged`` marks a reported-but-tolerated deviation; a flagged check still
    counts as passed.
    """

    name: str
    passed: bool
    flagged: bool = False
    witness: Any = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"name": self.name, "pass": bool(self.passed), "flag": bool(self.flagged)}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.detail:
            out["detail"] = self.detail
        return out


def all_passed(checks) -> bool:
    return all(c.passed for c in checks)


def rational_str(q: Fraction | int) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q`` (or an integer / decimal literal) into an exact Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError, AttributeError):
        raise ValueError(f"not a rational number: {text!r}") from None


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, CheckResult):
        return to_jsonable(obj.to_json())
    if isinstance(obj, Fraction):
        return rational_str(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def emit_report(results: dict) -> str:
    """Canonical JSON: sorted keys, rationals as "p/q", fixed layout, trailing newline."""
    doc = to_jsonable(results)
    doc.setdefault("checks", [])
    doc.setdefault("tool_version", TOOL_VERSION)
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=True, allow_nan=False) + "\n"
