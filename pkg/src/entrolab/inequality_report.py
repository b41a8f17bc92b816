"""The InequalityReport record: one verified claim, machine-checkable."""
from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of one inequality/identity check.

    margin is rhs - lhs for <=-claims, lhs - rhs for >=-claims, and
    -|lhs - rhs| for equality claims, so that in every case
    pass <=> margin >= -tolerance.  Informational reports are recorded but
    never fail a suite.
    """

    name: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    passed: bool
    inputs_digest: str
    informational: bool = False

    def __post_init__(self) -> None:
        if self.passed != (self.margin >= -self.tolerance):
            raise ValueError("pass flag inconsistent with margin/tolerance")

    def to_json(self) -> str:
        return json.dumps({
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "informational": self.informational,
            "inputs_digest": self.inputs_digest,
        }, sort_keys=True)


def make_report(name: str, lhs: float, rhs: float, tolerance: float,
                kind: str, inputs_digest: str,
                informational: bool = False) -> InequalityReport:
    """Build a report for a <= ('le'), >= ('ge'), or equality ('eq') claim."""
    if kind == "le":
        margin = rhs - lhs
    elif kind == "ge":
        margin = lhs - rhs
    elif kind == "eq":
        margin = -abs(lhs - rhs)
    else:
        raise ValueError(f"unknown claim kind {kind!r}")
    return InequalityReport(name=name, lhs=float(lhs), rhs=float(rhs),
                            margin=float(margin), tolerance=float(tolerance),
                            passed=bool(margin >= -tolerance),
                            inputs_digest=inputs_digest,
                            informational=informational)
