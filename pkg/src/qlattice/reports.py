"""Structured check results."""

import math
import sys
from dataclasses import dataclass, field
from typing import Optional

FLOAT_MAX = sys.float_info.max


def complex_json(z):
    z = complex(z)
    return {"re": _finite(z.real), "im": _finite(z.imag)}


def _finite(v):
    if math.isfinite(v):
        return v
    return FLOAT_MAX if v > 0 else -FLOAT_MAX


@dataclass
class CheckReport:
    """One residual test.  ``passed`` is derived: max_residual < tolerance."""

    check_id: str
    family: str
    params: dict
    max_residual: float
    tolerance: float
    n: Optional[int] = None
    m: Optional[int] = None
    notes: list = field(default_factory=list)
    passed: bool = field(init=False)

    def __post_init__(self):
        r = float(self.max_residual)
        if not math.isfinite(r):
            self.notes.append("non-finite residual")
            r = FLOAT_MAX
        self.max_residual = abs(r)
        self.passed = self.max_residual < self.tolerance

    def sort_key(self):
        return (
            self.check_id,
            self.family,
            -1 if self.n is None else self.n,
            -1 if self.m is None else self.m,
            repr(sorted(self.to_dict()["params"].items(), key=lambda kv: kv[0])),
        )

    def to_dict(self):
        params = {}
        for key, v in self.params.items():
            params[key] = complex_json(v) if isinstance(v, complex) else v
        return {
            "check_id": self.check_id,
            "family": self.family,
            "params": params,
            "n": self.n,
            "m": self.m,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "notes": list(self.notes),
        }


def failed_report(check_id, family, params, tolerance, exc, n=None, m=None):
    """Report for a check that raised instead of producing a residual."""
    return CheckReport(
        check_id, family, params, FLOAT_MAX, tolerance, n=n, m=m,
        notes=[f"error: {type(exc).__name__}: {exc}"],
    )
