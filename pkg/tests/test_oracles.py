"""Independent symbolic and quadrature oracles for the frozen reference values in conftest."""

import numpy as np
import pytest
import sympy as sp
from scipy.integrate import quad

from conftest import (
    MID_DR,
    MID_F,
    MID_K_JH_U,
    MID_M,
    MID_Q,
    MID_Q_DM,
    MID_R,
    MID_TAU,
    MID_VERTICAL_LAMBDA,
    QUADRATIC_L,
)
from kahlerfol.profile import identity_chain_at, quartic_q, realize
from kahlerfol.tensor import christoffel

tau = sp.symbols("tau", positive=True)
S = sp.Integer(2)
Q_SYM = S * (tau - 1) * (2 - tau) / (2 - 1)


def _mid(expr):
    return expr.subs(tau, sp.Rational(3, 2))


class TestQuadraticProfileOracle:
    def test_q_values(self):
        assert _mid(Q_SYM) == sp.Rational(1, 2)
        assert float(_mid(Q_SYM)) == MID_Q
        assert _mid(sp.diff(Q_SYM, tau)) == 0

    def test_profile_values(self):
        r = sp.sqrt(2 * tau)
        dr = sp.sqrt(Q_SYM) / r
        f = 2 * sp.sqrt(Q_SYM) / S
        df = sp.diff(Q_SYM, tau) / S
        assert float(_mid(r)) == pytest.approx(MID_R, rel=1e-15)
        assert float(_mid(dr)) == pytest.approx(MID_DR, rel=1e-15)
        assert float(_mid(dr)) == pytest.approx(0.4082483, abs=5e-8)
        assert float(_mid(f)) == pytest.approx(MID_F, rel=1e-15)
        assert float(_mid(f)) == pytest.approx(0.7071068, abs=5e-8)
        assert _mid(df) == 0

    def test_identity_chain(self):
        M = Q_SYM / (2 * tau)
        Lam = sp.diff(Q_SYM, tau) / 2
        lhs = sp.simplify(Q_SYM * sp.diff(M, tau))
        rhs = sp.simplify(2 * M * (Lam - M))
        assert _mid(M) == sp.Rational(1, 6)
        assert float(_mid(M)) == pytest.approx(MID_M, rel=1e-15)
        assert _mid(lhs) == _mid(rhs) == sp.Rational(-1, 18)
        assert float(_mid(lhs)) == pytest.approx(MID_Q_DM, rel=1e-15)
        assert sp.simplify(lhs - rhs) == 0  # holds for every tau

    def test_vertical_eigenvalue(self):
        n = 3
        M = Q_SYM / (2 * tau)
        Lam = sp.diff(Q_SYM, tau) / 2
        lam = (2 * (n - 1) * M * (M - Lam) - Q_SYM * sp.diff(Lam, tau)) / Q_SYM
        assert _mid(lam) == sp.Rational(20, 9)
        assert float(_mid(lam)) == pytest.approx(MID_VERTICAL_LAMBDA, rel=1e-15)

    def test_sectional_jh_u(self):
        r2, f2 = _mid(2 * tau), _mid((2 * sp.sqrt(Q_SYM) / S) ** 2)
        K = S**2 * f2 / (4 * r2**2) - 0  # f' = 0 at the midpoint
        assert K == sp.Rational(1, 18)
        assert float(K) == pytest.approx(MID_K_JH_U, rel=1e-15)
        assert float(K) == pytest.approx(0.0555556, abs=5e-8)

    def test_package_chain_matches_oracle(self, qprofile):
        ch = identity_chain_at(qprofile, MID_TAU, 2)
        assert ch.M == pytest.approx(MID_M, abs=1e-15)
        assert ch.Lambda == pytest.approx(0.0, abs=1e-15)
        assert ch.Q_dM == pytest.approx(MID_Q_DM, abs=1e-10)
        assert ch.two_M_Lambda_minus_M == pytest.approx(MID_Q_DM, abs=1e-10)
        assert ch.lam == pytest.approx(MID_VERTICAL_LAMBDA, rel=1e-12)


class TestLengthOracle:
    def test_quadratic_length_quad(self, profile):
        # int_1^2 dtau / sqrt(2 (tau - 1)(2 - tau)) with algebraic endpoint weights
        val, err = quad(lambda t: 1.0 / np.sqrt(2.0), 1.0, 2.0, weight="alg", wvar=(-0.5, -0.5))
        assert val == pytest.approx(QUADRATIC_L, abs=1e-12)
        assert val == pytest.approx(2.2214415, abs=5e-8)
        assert profile.L == pytest.approx(val, abs=1e-8)

    def test_quartic_length_quad(self):
        q = quartic_q(1.0, 2.0, 2.0, 0.5)
        reduced = q.reduced()
        val, _ = quad(lambda t: 1.0 / np.sqrt(reduced(t)), 1.0, 2.0, weight="alg", wvar=(-0.5, -0.5))
        assert realize(q).L == pytest.approx(val, rel=1e-9)


class TestChristoffelOracle:
    def test_gamma_t_psipsi(self, wb, profile):
        t, psi = sp.symbols("t psi")
        fs = sp.Function("f")(t)
        g = sp.diag(1, fs**2)
        ginv = g.inv()
        coords = (t, psi)
        # Gamma^t_{psi psi} from the Levi-Civita formula
        gam = sum(ginv[0, l] * (sp.diff(g[l, 1], psi) + sp.diff(g[l, 1], psi) - sp.diff(g[1, 1], coords[l])) / 2
                  for l in range(2))
        assert sp.simplify(gam + fs * sp.diff(fs, t)) == 0
        # numeric value on the warped chart at two levels, including one with f' != 0
        for frac in (0.3, 0.5):
            t0 = frac * wb.L
            x = np.array([t0, 0.1, 0.2, -0.1, 0.3, 0.05])
            G = np.asarray(christoffel(wb.metric, x))
            expected = -float(profile.f(t0) * profile.df(t0))
            assert G[0, 1, 1] == pytest.approx(expected, abs=1e-9)


class TestFubiniStudyOracle:
    def test_fs1_gaussian_curvature(self):
        x, y = sp.symbols("x y", real=True)
        phi = -sp.log(1 + x**2 + y**2)  # h = e^{2 phi} (dx^2 + dy^2)
        K = sp.simplify(-sp.exp(-2 * phi) * (sp.diff(phi, x, 2) + sp.diff(phi, y, 2)))
        assert K == 4

    def test_fs_einstein_constant_formula(self, fs2):
        from kahlerfol.bases import einstein_constant_numeric, fubini_study

        rng = np.random.default_rng(4)
        for base, expected in ((fubini_study(1), 4.0), (fs2, 6.0), (fubini_study(2, 0.7), 6.0 / 0.7)):
            c = einstein_constant_numeric(base, base.sample(rng, 10))
            assert base.einstein_constant == pytest.approx(expected, rel=1e-15)
            assert np.allclose(c, expected, rtol=1e-6)
