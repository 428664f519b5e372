import numpy as np
import pytest

from conftest import MID_K_JH_U
from kahlerfol import constants as C
from kahlerfol.bases import fubini_study
from kahlerfol.bundles import circle_bundle, warped_bundle
from kahlerfol.potential import cluster
from kahlerfol.submersion import (
    circle_closed_forms,
    ricci_eigenvalues,
    verify_circle_bundle_curvature,
    verify_ricci_count,
    verify_rho_vv_at,
    verify_warped_curvature,
    warped_closed_forms,
)

CIRCLE_CHECKS = ("circle.lambda", "circle.xi_norm", "circle.xi_killing", "circle.dtheta", "circle.K_E_xi",
                 "circle.K_E_F", "circle.K_E_Fperp", "circle.rho_EE", "circle.R_X_xi_Y_xi", "circle.R_X_Y_Z_xi",
                 "circle.rho_xi_X", "circle.A_tensor", "circle.A_antisym")


class TestCircleClosedForms:
    def test_flat_values(self, circle_flat):
        cf = circle_closed_forms(circle_flat)
        assert cf == pytest.approx({"lambda": 4.0, "K_E_xi": 1.0, "rho_shift": -2.0, "R_xi_coeff": -1.0})

    def test_scaling_in_s(self):
        base = fubini_study(1)
        lam = [circle_closed_forms(circle_bundle(base, 0.7, 1.3, s))["lambda"] for s in (1.0, 2.0, 4.0)]
        assert lam[1] / lam[0] == pytest.approx(4.0) and lam[2] / lam[1] == pytest.approx(4.0)


class TestCircleCurvature:
    @pytest.mark.parametrize("name", ["circle_flat", "circle_fs"])
    def test_suite_passes(self, request, name):
        cb = request.getfixturevalue(name)
        rep = verify_circle_bundle_curvature(cb, cb.sample(np.random.default_rng(0), 5))
        assert rep.passed, rep.failures()
        for check in CIRCLE_CHECKS:
            assert rep.rows_for(check), check
        assert rep.max_residual < 1e-6

    def test_surface_base_skips_fperp(self):
        cb = circle_bundle(fubini_study(1), 1.0, 1.0, 2.0)
        rep = verify_circle_bundle_curvature(cb, cb.sample(np.random.default_rng(1), 3))
        assert rep.passed, rep.failures()
        assert not rep.rows_for("circle.K_E_Fperp")

    def test_vertical_eigenvalue_numeric(self, circle_fs):
        rep = verify_circle_bundle_curvature(circle_fs, circle_fs.sample(np.random.default_rng(2), 2))
        lam = circle_closed_forms(circle_fs)["lambda"]
        assert [r.closed_form for r in rep.rows_for("circle.lambda")] == pytest.approx([lam, lam])
        assert [r.numeric for r in rep.rows_for("circle.lambda")] == pytest.approx([lam, lam], rel=1e-6)


class TestWarpedCurvature:
    def test_suite_passes(self, wb, samples):
        rep = verify_warped_curvature(wb, samples[:6])
        assert rep.passed, rep.failures()

    def test_perturbed_metric_rows(self, wb_perturbed, samples):
        # the closed forms are written for general (r, f) and hold off the Kähler profile too
        rep = verify_warped_curvature(wb_perturbed, samples[:4])
        assert rep.passed, rep.failures()

    def test_midpoint_k_jh_u(self, wb, midpoint):
        cf = warped_closed_forms(wb, midpoint[0])
        assert float(cf["K_JH_U"]) == pytest.approx(MID_K_JH_U, abs=1e-10)
        assert float(cf["K_JH_U"]) == pytest.approx(0.0555556, abs=5e-8)
        rep = verify_warped_curvature(wb, midpoint[None, :])
        row = rep.rows_for("warped.K_JH_U")[0]
        assert row.numeric == pytest.approx(MID_K_JH_U, abs=1e-6)

    def test_rho_vv_displayed_vs_corrected(self, wb, midpoint, samples):
        num, corrected, displayed = verify_rho_vv_at(wb, midpoint)
        assert num == pytest.approx(corrected, abs=1e-6)
        assert num == pytest.approx(displayed, abs=1e-6)  # f' = 0 at the midpoint
        x = wb.at_t(midpoint, 0.25 * wb.L)
        num, corrected, displayed = verify_rho_vv_at(wb, x)
        assert num == pytest.approx(corrected, abs=1e-6)
        assert abs(num - displayed) > 1e-2

    def test_displayed_row_informational(self, wb, samples):
        rep = verify_warped_curvature(wb, samples[:3])
        assert all(r.informational for r in rep.rows_for("warped.rho_VV_displayed"))
        assert not any(r.informational for r in rep.rows_for("warped.rho_VV"))


class TestRicciCount:
    def test_product_base_three_eigenvalues(self, fs11_fs12, profile):
        wbp = warped_bundle(fs11_fs12, profile)
        X = wbp.sample(np.random.default_rng(3), 10)
        rep = verify_ricci_count(wbp, X)
        assert rep.passed, rep.failures()
        assert {r.numeric for r in rep.rows} == {3.0}

    def test_einstein_base_two_eigenvalues(self, wb, samples):
        for x in samples[:3]:
            assert len(cluster(ricci_eigenvalues(wb.metric, x), C.EIGEN_CLUSTER_GAP)) == 2
