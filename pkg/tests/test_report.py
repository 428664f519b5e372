import json
import math

import pytest

from kahlerfol.report import VerificationReport


@pytest.fixture
def rep():
    r = VerificationReport("demo", seed=3)
    r.add("b.check", "b = 0", 1e-9, 1e-6, sample=1)
    r.add("a.check", "a = 0", 1e-3, 1e-6, sample=0)
    r.add("c.info", "diagnostic", 5.0, 1e-6, informational=True)
    return r


class TestVerificationReport:
    def test_verdicts(self, rep):
        assert not rep.passed
        assert rep.n_pass == 1 and rep.n_fail == 1
        assert rep.max_residual == pytest.approx(1e-3)  # informational rows excluded
        assert [r.check for r in rep.failures()] == ["a.check"]
        assert rep.rows_for("c.info")[0].verdict == "info"

    def test_nonfinite_fails(self):
        r = VerificationReport("x")
        assert not r.add("x", "x", float("nan"), 1.0).passed
        assert not r.add("y", "y", float("inf"), 1.0).passed

    def test_compare_relative(self):
        r = VerificationReport("x")
        row = r.compare("k", "k = 2", 2.002, 2.0, 1e-2)
        assert row.residual == pytest.approx(1e-3)
        assert r.compare("z", "z = 0", 1e-4, 0.0, 1e-3).residual == pytest.approx(1e-4)

    def test_jsonl_sorted_and_stable(self, rep):
        lines = rep.to_jsonl().splitlines()
        head = json.loads(lines[0])
        assert head["verdict"] == "FAIL" and head["seed"] == 3 and head["rows"] == 3
        assert [json.loads(l)["check"] for l in lines[1:]] == ["a.check", "b.check", "c.info"]
        assert rep.to_jsonl() == rep.to_jsonl()

    def test_jsonl_nonfinite(self):
        r = VerificationReport("x")
        r.add("x", "x", math.inf, 1.0)
        assert json.loads(r.to_jsonl().splitlines()[1])["residual"] == "inf"

    def test_extend_and_worst(self, rep):
        other = VerificationReport("o")
        other.add("b.check", "b = 0", 2e-9, 1e-6, sample=2)
        rep.extend(other)
        assert rep.worst("b.check") == pytest.approx(2e-9)
        with pytest.raises(KeyError):
            rep.worst("missing")

    def test_summary_text(self, rep):
        text = rep.summary_text()
        assert "verdict=FAIL" in text and "a.check" in text
