from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

REPORT_SCHEMA = "report-v1"


@dataclass(frozen=True)
class Check:
    """One comparison inside a suite.

    For equalities ``abs_err = |lhs - rhs|``.  For inequalities
    (``lhs <= rhs`` expected) ``abs_err`` is the violation ``max(0, lhs - rhs)``.
    """

    label: str
    lhs: float
    rhs: float
    abs_err: float
    tol: float
    passed: bool
    note: str = ""

    @classmethod
    def equal(cls, label, lhs, rhs, tol, note="") -> "Check":
        lhs, rhs = _real(lhs), _real(rhs)
        err = abs(lhs - rhs)
        return cls(label, lhs, rhs, err, tol, bool(err <= tol), note)

    @classmethod
    def at_most(cls, label, lhs, rhs, tol, note="") -> "Check":
        lhs, rhs = float(lhs), float(rhs)
        err = max(0.0, lhs - rhs)
        return cls(label, lhs, rhs, err, tol, bool(err <= tol), note)

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_err": self.abs_err,
            "tol": self.tol,
            "pass": self.passed,
            "note": self.note,
        }


def _real(v):
    # complex values are compared by modulus of the difference by the caller;
    # a report stores the real part and notes the imaginary part if present
    if isinstance(v, complex):
        v = complex(v)
        return v.real if v.imag == 0 else v
    return float(v)


@dataclass
class VerificationReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, checks: Iterable[Check]) -> None:
        self.checks.extend(checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "suite": self.suite,
            "overall_pass": self.overall_pass,
            "checks": [_jsonable(c.as_dict()) for c in self.checks],
            "info": _jsonable(self.info),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "label", "lhs", "rhs", "abs_err", "tol", "pass", "note"])
        for c in self.checks:
            w.writerow([self.suite, c.label, repr(c.lhs), repr(c.rhs), repr(c.abs_err),
                        repr(c.tol), int(c.passed), c.note])
        return buf.getvalue()

    def table(self) -> str:
        """Fixed-width human-readable summary."""
        lines = [f"== {self.suite}: {'PASS' if self.overall_pass else 'FAIL'} "
                 f"({sum(c.passed for c in self.checks)}/{len(self.checks)})"]
        for c in self.checks:
            lines.append(
                f"  {'ok ' if c.passed else 'BAD'} {c.label:<42s} "
                f"lhs={_fmt(c.lhs)} rhs={_fmt(c.rhs)} err={c.abs_err:.2e} tol={c.tol:.1e}"
                + (f"  [{c.note}]" if c.note else "")
            )
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, complex):
        return f"{v.real:.10g}{v.imag:+.3g}j"
    return f"{v:.12g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj
