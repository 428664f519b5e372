import math

import pytest

from kahlerfol.convergence import convergence_table, orders_by_check, row_orders
from kahlerfol.report import VerificationReport


def _pair(rows):
    a, b = VerificationReport("coarse"), VerificationReport("fine")
    for check, ra, rb, kw in rows:
        a.add(check, check, ra, 1e-4, **kw)
        b.add(check, check, rb, 1e-4, **kw)
    return a, b


class TestRowOrders:
    def test_statuses(self):
        a, b = _pair([
            ("second", 4e-6, 1e-6, {}),
            ("first", 4e-6, 2e-6, {}),
            ("exact", 3e-11, 5e-11, {}),
            ("const", 1e-7, 1e-7, {}),
            ("info", 1.0, 0.1, {"informational": True}),
        ])
        rows = {r.check: r for r in row_orders(a, b)}
        assert rows["second"].status == "order" and rows["second"].order == pytest.approx(2.0)
        assert rows["first"].order == pytest.approx(1.0) and not rows["first"].ok()
        assert rows["exact"].status == "exact" and rows["exact"].ok()
        assert rows["const"].status == "constant"
        assert rows["info"].status == "skipped"

    def test_indicator_rows_skipped(self):
        a, b = VerificationReport("a"), VerificationReport("b")
        a.add("flag", "flag", 1.0, 0.5)
        b.add("flag", "flag", 0.0, 0.5)
        assert row_orders(a, b)[0].status == "skipped"

    def test_missing_row(self):
        a, b = _pair([("x", 1e-6, 1e-7, {})])
        a.add("y", "y", 1e-6, 1e-4)
        with pytest.raises(KeyError):
            row_orders(a, b)

    def test_orders_by_check_and_table(self):
        a, b = _pair([("x", 4e-6, 1e-6, {}), ("y", 1e-11, 1e-11, {})])
        rows = row_orders(a, b)
        orders = orders_by_check(rows)
        assert orders["x"] == pytest.approx(2.0) and math.isnan(orders["y"])
        assert "constant" in convergence_table(rows)
