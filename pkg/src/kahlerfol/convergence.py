"""Observed convergence orders from paired reports at steps ``h`` and ``h/ratio``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import constants as C
from .report import VerificationReport


@dataclass(frozen=True)
class OrderRow:
    check: str
    sample: int
    coarse: float
    fine: float
    order: float
    status: str  # "order", "exact" (round-off at both steps), "constant" (step-independent) or "skipped"

    def ok(self, lo: float = C.CONVERGENCE_ORDER_RANGE[0], hi: float = C.CONVERGENCE_ORDER_RANGE[1]) -> bool:
        return self.status != "order" or (lo <= self.order <= hi)


def row_orders(coarse: VerificationReport, fine: VerificationReport, ratio: float = 2.0,
               noise_floor: float = C.CONVERGENCE_NOISE_FLOOR) -> list[OrderRow]:
    """Pair rows by (check, sample); informational and indicator rows are skipped.

    Rows whose residual is identical at both steps do not depend on the FD
    step (closed-form or separately discretized checks) and are marked constant.
    """
    fine_rows = {(r.check, r.sample): r for r in fine.rows}
    out = []
    for r in coarse.sorted_rows():
        key = (r.check, r.sample)
        if key not in fine_rows:
            raise KeyError(f"row {key} missing from the fine report")
        q = fine_rows[key]
        a, b = float(r.residual), float(q.residual)
        if r.informational or r.tolerance >= C.INDICATOR_TOL:
            out.append(OrderRow(r.check, r.sample, a, b, float("nan"), "skipped"))
        elif a == b:
            out.append(OrderRow(r.check, r.sample, a, b, float("nan"), "constant"))
        elif a <= noise_floor and b <= noise_floor:
            out.append(OrderRow(r.check, r.sample, a, b, float("nan"), "exact"))
        else:
            order = float(np.log(a / b) / np.log(ratio)) if a > 0 and b > 0 else float("inf")
            out.append(OrderRow(r.check, r.sample, a, b, order, "order"))
    return out


def orders_by_check(rows: list[OrderRow]) -> dict[str, float]:
    """Per check, the measured order furthest from 2 (``nan`` when every row is exact or skipped)."""
    out: dict[str, float] = {}
    for r in rows:
        if r.status != "order":
            out.setdefault(r.check, float("nan"))
            continue
        prev = out.get(r.check, float("nan"))
        if np.isnan(prev) or abs(r.order - 2.0) > abs(prev - 2.0):
            out[r.check] = r.order
    return out


def convergence_table(rows: list[OrderRow]) -> str:
    lines = [f"{'check':34s} {'sample':>6s} {'coarse':>12s} {'fine':>12s} {'order':>7s}  status"]
    for r in rows:
        o = "-" if r.status != "order" else f"{r.order:7.3f}"
        lines.append(f"{r.check:34s} {r.sample:6d} {r.coarse:12.4e} {r.fine:12.4e} {o:>7s}  {r.status}")
    return "\n".join(lines) + "\n"
