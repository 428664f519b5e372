import textwrap

import pytest

from kahlerfol.scenario import (
    SUITES,
    ScenarioError,
    build_bundle,
    bundled_scenarios,
    load_scenario,
    parse_scenario,
    run_scenario,
)
from kahlerfol.bundles import CircleBundleMetric, WarpedBundleMetric

MINIMAL = textwrap.dedent("""\
    [scenario]
    name = mini
    suites = kahler
    samples = 2
    seed = 1

    [base]
    family = fubini-study
    m = 1
    """)


def _err(text):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(textwrap.dedent(text), "bad.scn")
    return exc.value


class TestParse:
    def test_defaults(self):
        scn = parse_scenario(MINIMAL, "mini.scn")
        assert scn.name == "mini" and scn.suites == ("kahler",) and scn.samples == 2
        assert scn.profile.family == "quadratic" and scn.bundle.kind == "warped"
        assert scn.tol("kahler") == 1e-5

    def test_all_expands_per_kind(self):
        scn = parse_scenario(MINIMAL.replace("suites = kahler", "suites = all"))
        assert scn.suites == SUITES
        text = MINIMAL.replace("suites = kahler", "suites = all") + "[bundle]\nkind = circle\n"
        assert parse_scenario(text).suites == ("submersion",)

    def test_unknown_field_reports_line(self):
        e = _err(MINIMAL + "colour = blue\n")
        assert e.key == "base.colour" and e.line == 10
        assert str(e).startswith("bad.scn:10: [base.colour]")

    def test_unknown_section(self):
        e = _err(MINIMAL + "[extras]\nx = 1\n")
        assert e.key == "extras" and e.line == 10

    def test_unknown_suite(self):
        e = _err(MINIMAL.replace("suites = kahler", "suites = kahler, magic"))
        assert e.key == "scenario.suites" and e.line == 3 and "magic" in str(e)

    def test_suite_not_for_kind(self):
        e = _err(MINIMAL.replace("kahler", "potential") + "[bundle]\nkind = product\n")
        assert "does not apply" in str(e)

    @pytest.mark.parametrize("section,line", [
        ("[profile]\ns = -2\n", "profile.s"),
        ("[profile]\ntau_min = 2\ntau_max = 1\n", "profile.tau_max"),
        ("[numeric]\nfd_step = zero\n", "numeric.fd_step"),
        ("[numeric]\nrichardson = maybe\n", "numeric.richardson"),
        ("[base]\n", None),
    ])
    def test_value_errors(self, section, line):
        if line is None:
            e = _err(MINIMAL.replace("family = fubini-study", "family = product"))
            assert e.key == "base.factors"
        else:
            e = _err(MINIMAL + section)
            assert e.key == line

    def test_tolerance_override(self):
        scn = parse_scenario(MINIMAL + "[tolerances]\nkahler = 1e-3\n")
        assert scn.tol("kahler") == 1e-3
        assert _err(MINIMAL + "[tolerances]\nwobble = 1\n").key == "tolerances.wobble"

    def test_syntax_error(self):
        e = _err("[scenario]\nname\n")
        assert e.line == 2

    def test_missing_scenario_section(self):
        assert "missing" in str(_err("[base]\nm = 1\n"))


class TestBundled:
    def test_all_bundled_parse(self):
        names = bundled_scenarios()
        assert {"fs2-quadratic", "circle-flat", "circle-fs2", "fs2-perturbed", "ricci-count", "fs2-jacobi"} <= set(names)
        for name in names:
            load_scenario(name)

    def test_load_by_path(self, tmp_path):
        p = tmp_path / "mini.scn"
        p.write_text(MINIMAL)
        assert load_scenario(str(p)).name == "mini"
        with pytest.raises(ScenarioError):
            load_scenario(str(tmp_path / "nope.scn"))

    def test_build(self):
        assert isinstance(build_bundle(load_scenario("circle-flat")), CircleBundleMetric)
        wb = build_bundle(load_scenario("fs2-perturbed"))
        assert isinstance(wb, WarpedBundleMetric) and wb.profile.f_scale == 1.05
        assert build_bundle(load_scenario("product-sphere")).s == 0.0

    def test_with_parameter(self):
        scn = load_scenario("circle-flat")
        assert scn.with_parameter("s", 4.0).bundle.s == 4.0
        fd = scn.with_parameter("fd_step", 1e-3).numeric
        assert fd.convergence and fd.fd_step == 1e-3
        with pytest.raises(ScenarioError):
            scn.with_parameter("colour", 1)


class TestRun:
    def test_circle_flat(self):
        rep = run_scenario(load_scenario("circle-flat"))
        assert rep.passed, rep.failures()
        assert rep.rows_for("base.spd") and rep.rows_for("circle.lambda")  # base rows always included

    def test_deterministic(self):
        scn = parse_scenario(MINIMAL)
        assert run_scenario(scn).to_jsonl() == run_scenario(scn).to_jsonl()

    def test_perturbed_fails(self):
        rep = run_scenario(load_scenario("fs2-perturbed").with_parameter("sample_count", 2))
        assert not rep.passed
        failing = {r.check for r in rep.failures()}
        assert {"kahler.nabla_J", "kahler.f_relation", "profile.f_kahler"} <= failing
        assert not any(c.startswith("homothetic.") for c in failing)

    def test_surface_base_warning(self):
        rep = run_scenario(parse_scenario(MINIMAL))
        assert any(n.startswith("warning") for n in rep.notes)

    def test_suite_error_row(self, monkeypatch):
        import kahlerfol.scenario as S

        def boom(*a, **k):
            raise ArithmeticError("synthetic")
        monkeypatch.setattr(S, "verify_kahler", boom)
        rep = run_scenario(parse_scenario(MINIMAL))
        assert rep.rows_for("kahler.error") and not rep.passed
