"""Check reports, witnesses, and the canonical serialization they share.

Reports are plain data: a verdict, the witnesses that justify it, counters,
and the echoed sampling scheme.  Serialization uses ``repr``-roundtrip floats
and sorted keys so a fixed scenario + seed + version produces byte-identical
output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = [
    "HOLDS",
    "VIOLATED",
    "INCONCLUSIVE",
    "Witness",
    "CheckReport",
    "canonical_json",
]

HOLDS = "HOLDS_ON_SAMPLES"
VIOLATED = "VIOLATED"
INCONCLUSIVE = "INCONCLUSIVE"

MAX_WITNESSES = 25


@dataclass(frozen=True)
class Witness:
    """One sample that violates (or fails to decide) a checked inequality.

    ``first``/``second`` are the raw sampled pair (before the point maps),
    ``param`` the grid parameter, so the gap can be re-derived in isolation.
    """

    index: int
    first: tuple
    second: tuple
    param: float
    lhs: float
    rhs: float
    gap: float
    label: str = ""

    def to_dict(self):
        return {
            "index": self.index,
            "first": list(self.first),
            "second": list(self.second),
            "param": self.param,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        return cls(
            index=int(d["index"]),
            first=tuple(d["first"]),
            second=tuple(d["second"]),
            param=d["param"],
            lhs=d["lhs"],
            rhs=d["rhs"],
            gap=d["gap"],
            label=d.get("label", ""),
        )


@dataclass
class CheckReport:
    op: str
    verdict: str
    witnesses: list = field(default_factory=list)
    n_evaluated: int = 0
    n_skipped: int = 0
    n_inconclusive: int = 0
    max_gap: float | None = None
    tol: float = 0.0
    scheme: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    notes: tuple = ()
    theorem_harness: bool = False
    falsification: bool = False

    def to_dict(self):
        return {
            "op": self.op,
            "verdict": self.verdict,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "n_evaluated": self.n_evaluated,
            "n_skipped": self.n_skipped,
            "n_inconclusive": self.n_inconclusive,
            "max_gap": self.max_gap,
            "tol": self.tol,
            "scheme": self.scheme,
            "details": self.details,
            "notes": list(self.notes),
            "theorem_harness": self.theorem_harness,
            "falsification": self.falsification,
        }


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, fixed separators, repr-exact floats."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


class _Collector:
    """Accumulates per-sample outcomes into a CheckReport.

    Violation witnesses are kept in sample order up to ``MAX_WITNESSES``;
    the largest-gap witness is always retained.
    """

    def __init__(self, op: str, tol: float, scheme_echo: dict, theorem: bool = False):
        self.op = op
        self.tol = tol
        self.scheme_echo = scheme_echo
        self.theorem = theorem
        self.violations: list[Witness] = []
        self.inconclusives: list[Witness] = []
        self.n_evaluated = 0
        self.n_skipped = 0
        self.n_inconclusive = 0
        self.max_gap: float | None = None
        self.details: dict = {}
        self.notes: list[str] = []

    def record(self, witness: Witness, violated: bool | None = None):
        """violated=None means: decide by gap > tol."""
        self.n_evaluated += 1
        gap = witness.gap
        if self.max_gap is None or gap > self.max_gap:
            self.max_gap = gap
        is_violation = (gap > self.tol) if violated is None else violated
        if is_violation:
            if len(self.violations) < MAX_WITNESSES:
                self.violations.append(witness)
            elif gap > max(w.gap for w in self.violations):
                # keep the worst offender visible
                self.violations[-1] = witness
        return is_violation

    def record_inconclusive(self, witness: Witness):
        self.n_inconclusive += 1
        if len(self.inconclusives) < MAX_WITNESSES:
            self.inconclusives.append(witness)

    def skip(self):
        self.n_skipped += 1

    def note(self, text: str):
        self.notes.append(text)

    def finish(self, vacuous_note: str = "no samples satisfied the scheme (vacuous)") -> CheckReport:
        if self.violations:
            verdict = VIOLATED
            witnesses = self.violations
        elif self.inconclusives:
            verdict = INCONCLUSIVE
            witnesses = self.inconclusives
        else:
            verdict = HOLDS
            witnesses = []
            if self.n_evaluated == 0:
                self.notes.append(vacuous_note)
        return CheckReport(
            op=self.op,
            verdict=verdict,
            witnesses=witnesses,
            n_evaluated=self.n_evaluated,
            n_skipped=self.n_skipped,
            n_inconclusive=self.n_inconclusive,
            max_gap=self.max_gap,
            tol=self.tol,
            scheme=self.scheme_echo,
            details=self.details,
            notes=tuple(self.notes),
            theorem_harness=self.theorem,
        )
