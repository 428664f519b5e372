import csv
import io

import numpy as np
import pytest

from conftest import MID_DR, MID_F, MID_Q, MID_R, MID_TAU, QUADRATIC_L
from kahlerfol import constants as C
from kahlerfol.profile import QProfile, quadratic_q, quartic_q, realize, round_sphere_profile, validate


class TestQProfile:
    def test_quadratic_residuals(self, qprofile):
        assert qprofile.is_valid()
        assert qprofile.Q(MID_TAU) == pytest.approx(MID_Q, abs=1e-15)
        assert qprofile.dQ(1.0) == pytest.approx(2.0) and qprofile.dQ(2.0) == pytest.approx(-2.0)

    def test_quartic_slopes_unchanged(self):
        q = quartic_q(1.0, 2.0, 2.0, 0.5)
        assert q.is_valid()
        assert q.Q(MID_TAU) == pytest.approx(MID_Q + 0.5 * 0.25**2)

    def test_reduced(self, qprofile):
        assert qprofile.reduced()(1.3) == pytest.approx(2.0)

    def test_invalid(self, qprofile):
        with pytest.raises(ValueError):
            quadratic_q(2.0, 1.0, 2.0)
        with pytest.raises(ValueError):
            quadratic_q(1.0, 2.0, -2.0)
        with pytest.raises(ValueError):
            QProfile(1.0, 2.0, 2.0, qprofile.Q + 0.1).reduced()


class TestRealizedProfile:
    def test_validate_passes(self, profile):
        rep = validate(profile)
        assert rep.passed, rep.failures()

    def test_boundary_rows(self, profile):
        rep = validate(profile)
        for check in ("profile.f_zero_start", "profile.f_zero_end", "profile.df_start", "profile.df_end",
                      "profile.rr_start", "profile.rr_end"):
            assert rep.worst(check) < C.TOL_PROFILE_BOUNDARY
        assert C.TOL_PROFILE_BOUNDARY == 1e-8

    def test_length(self, profile):
        assert profile.L == pytest.approx(QUADRATIC_L, abs=1e-10)

    def test_length_independent_of_grid(self, qprofile):
        assert realize(qprofile, 512).L == pytest.approx(realize(qprofile, 2048).L, abs=1e-12)

    def test_midpoint_values(self, profile):
        t = float(profile.t_of_tau(MID_TAU))
        assert float(profile.r(t)) == pytest.approx(MID_R, rel=1e-10)
        assert float(profile.dr(t)) == pytest.approx(MID_DR, rel=1e-10)
        assert float(profile.f(t)) == pytest.approx(MID_F, rel=1e-10)
        assert abs(float(profile.df(t))) < 1e-10
        assert t == pytest.approx(0.5 * profile.L, rel=1e-10)  # symmetric Q

    def test_tau_is_half_r_squared(self, profile):
        t = np.linspace(0.1, profile.L - 0.1, 7)
        assert np.allclose(profile.tau(t), 0.5 * profile.r(t) ** 2, rtol=1e-13)

    def test_perturbation_breaks_kahler_relation(self, profile):
        rep = validate(profile.perturbed(1.05))
        assert not rep.passed
        assert rep.worst("profile.f_kahler") == pytest.approx(0.05, rel=1e-6)
        assert rep.worst("profile.roundtrip_Q") < C.TOL_PROFILE_ROUNDTRIP  # r is unchanged

    def test_quartic_validates(self):
        rep = validate(realize(quartic_q(1.0, 2.0, 2.0, 0.5)))
        assert rep.passed, rep.failures()
        assert rep.rows_for("profile.length")[0].informational

    def test_round_sphere(self):
        p = round_sphere_profile(1.5)
        assert p.L == pytest.approx(1.5 * np.pi)
        assert float(p.f(0.3)) == pytest.approx(1.5 * np.sin(0.2))
        assert float(p.r(0.3)) == 1.0 and p.s == 0.0


class TestProfileCsv:
    def test_columns(self, profile):
        rows = list(csv.reader(io.StringIO(profile.to_csv())))
        assert rows[0] == ["t", "r", "dr", "f", "df", "tau", "Q"]
        assert len(rows) - 1 == profile.n_grid
        data = np.array(rows[1:], dtype=float)
        assert np.allclose(data[:, 5], 0.5 * data[:, 1] ** 2)

    def test_custom_grid(self, profile):
        rows = list(csv.reader(io.StringIO(profile.to_csv([0.0, profile.L]))))
        assert len(rows) == 3 and float(rows[1][3]) == pytest.approx(0.0, abs=1e-8)
