"""Verification reports: named residual rows with tolerances and verdicts."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckRow:
    check: str
    tag: str
    residual: float
    tolerance: float
    sample: int = -1
    closed_form: float | None = None
    numeric: float | None = None
    informational: bool = False

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual < self.tolerance

    @property
    def verdict(self) -> str:
        if self.informational:
            return "info"
        return "pass" if self.passed else "FAIL"

    def record(self) -> dict:
        return {
            "check": self.check,
            "tag": self.tag,
            "sample": self.sample,
            "closed_form": _num(self.closed_form),
            "numeric": _num(self.numeric),
            "residual": _num(self.residual),
            "tolerance": _num(self.tolerance),
            "verdict": self.verdict,
        }


def _num(v):
    if v is None:
        return None
    v = float(v)
    if not math.isfinite(v):
        return repr(v)
    return v


@dataclass
class VerificationReport:
    """Ordered collection of check rows.

    The overall verdict passes iff every non-informational row passes.
    """

    name: str
    seed: int | None = None
    rows: list[CheckRow] = field(default_factory=list)
    orders: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def add(
        self,
        check: str,
        tag: str,
        residual: float,
        tolerance: float,
        sample: int = -1,
        closed_form: float | None = None,
        numeric: float | None = None,
        informational: bool = False,
    ) -> CheckRow:
        row = CheckRow(
            check=check,
            tag=tag,
            residual=float(residual),
            tolerance=float(tolerance),
            sample=int(sample),
            closed_form=None if closed_form is None else float(closed_form),
            numeric=None if numeric is None else float(numeric),
            informational=informational,
        )
        self.rows.append(row)
        return row

    def compare(
        self,
        check: str,
        tag: str,
        numeric: float,
        closed_form: float,
        tolerance: float,
        scale: float = 1.0,
        sample: int = -1,
        informational: bool = False,
    ) -> CheckRow:
        """Row with relative residual ``|numeric - closed| / max(|closed|, scale)``."""
        residual = abs(numeric - closed_form) / max(abs(closed_form), scale)
        return self.add(check, tag, residual, tolerance, sample, closed_form, numeric, informational)

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        self.rows.extend(other.rows)
        self.orders.update(other.orders)
        self.notes.extend(other.notes)
        return self

    @property
    def counted(self) -> list[CheckRow]:
        return [r for r in self.rows if not r.informational]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.counted)

    @property
    def n_pass(self) -> int:
        return sum(r.passed for r in self.counted)

    @property
    def n_fail(self) -> int:
        return sum(not r.passed for r in self.counted)

    @property
    def max_residual(self) -> float:
        vals = [r.residual for r in self.counted if math.isfinite(r.residual)]
        return max(vals) if vals else 0.0

    def rows_for(self, check: str) -> list[CheckRow]:
        return [r for r in self.rows if r.check == check]

    def worst(self, check: str) -> float:
        rows = self.rows_for(check)
        if not rows:
            raise KeyError(check)
        return max(r.residual for r in rows)

    def sorted_rows(self) -> list[CheckRow]:
        return sorted(self.rows, key=lambda r: (r.check, r.sample))

    def failures(self) -> list[CheckRow]:
        return [r for r in self.counted if not r.passed]

    def to_jsonl(self) -> str:
        header = {
            "report": self.name,
            "seed": self.seed,
            "rows": len(self.rows),
            "pass": self.n_pass,
            "fail": self.n_fail,
            "max_residual": _num(self.max_residual),
            "verdict": "pass" if self.passed else "FAIL",
            "orders": {k: _num(v) for k, v in sorted(self.orders.items())},
        }
        lines = [json.dumps(header, sort_keys=True)]
        lines += [json.dumps(r.record(), sort_keys=True) for r in self.sorted_rows()]
        return "\n".join(lines) + "\n"

    def summary_text(self) -> str:
        head = (
            f"report {self.name}  seed={self.seed}  rows={len(self.rows)}  "
            f"pass={self.n_pass}  fail={self.n_fail}  max_residual={self.max_residual:.3e}  "
            f"verdict={'pass' if self.passed else 'FAIL'}"
        )
        lines = [head, f"{'check':<40} {'sample':>6} {'residual':>12} {'tolerance':>10} verdict"]
        for r in self.sorted_rows():
            lines.append(f"{r.check:<40} {r.sample:>6d} {r.residual:>12.3e} {r.tolerance:>10.1e} {r.verdict}")
        for k, v in sorted(self.orders.items()):
            lines.append(f"order {k:<34} {v:>8.3f}")
        lines.extend(self.notes)
        return "\n".join(lines) + "\n"
