"""O'Neill closed forms for the circle bundle and the warped bundle, checked against numeric curvature.

Closed forms on the circle bundle ``g = a^2 theta^2 + b^2 p*h`` (``E, F`` horizontal):

* ``rho(xi/a, xi/a) = s^2 a^2 m / 2 b^4``
* ``K(E, xi) = s^2 a^2 / 4 b^4``
* ``K(E, F) = K_0(E_*, F_*)/b^2 - 3 s^2 a^2 g(E, J~F)^2 / (4 b^4 |E ^ F|^2)``
* ``rho(E, E) = rho_0(b E_*, b E_*)/b^2 - s^2 a^2 / 2 b^4`` for unit ``E``
* ``R(X, xi, Y, xi) = -(s^2 a^4 / 4 b^2) h(X_*, Y_*)``
* ``A_E F = -(s/2) Omega_N(E_*, F_*) xi``

On the warped bundle every level ``t = t0`` is the circle bundle with
``a = f(t0)``, ``b = r(t0)``; ``rho^`` denotes its Ricci tensor.
"""

from __future__ import annotations

import numpy as np

from . import constants as C
from .bases import BaseManifold
from .bundles import CircleBundleMetric, WarpedBundleMetric, total_complex_structure
from .potential import cluster
from .report import VerificationReport
from .tensor import (
    DEFAULT_FD,
    CurvatureData,
    FDConfig,
    covariant_derivative_array,
    curvature_at,
    exterior_derivative_array,
    lie_derivative_metric_array,
    sectional_from,
    wedge_norm_sq,
)


def _base_curvature(base: BaseManifold, x, fd: FDConfig):
    return curvature_at(base.metric, np.asarray(x, dtype=float), fd)


def _single(curv, i) -> CurvatureData:
    return CurvatureData(G=curv.G[i], Gam=curv.Gam[i], Rup=curv.Rup[i], Riem=curv.Riem[i], Ric=curv.Ric[i],
                         scalar=curv.scalar[i])


def circle_closed_forms(cb: CircleBundleMetric) -> dict[str, float]:
    a, b, s, m = cb.a, cb.b, cb.s, cb.m
    return {
        "lambda": s**2 * a**2 * m / (2 * b**4),
        "K_E_xi": s**2 * a**2 / (4 * b**4),
        "rho_shift": -(s**2) * a**2 / (2 * b**4),
        "R_xi_coeff": -(s**2) * a**4 / (4 * b**2),
    }


def verify_circle_bundle_curvature(cb: CircleBundleMetric, samples, fd: FDConfig = DEFAULT_FD,
                                   tol: float = C.TOL_CURVATURE_REL, seed: int = 0,
                                   rep: VerificationReport | None = None) -> VerificationReport:
    rep = VerificationReport(name="circle") if rep is None else rep
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    rng = np.random.default_rng(seed)
    g = cb.metric
    a, b, s = cb.a, cb.b, cb.s
    cf = circle_closed_forms(cb)
    curv = curvature_at(g, X, fd)
    bcurv = _base_curvature(cb.base, X[:, 1:], fd)
    Lxi = lie_derivative_metric_array(g, cb.xi, X, fd)
    dth = exterior_derivative_array(cb.theta, X, fd)
    Om = cb.base.omega(X[:, 1:])
    dB = cb.base.dim
    Jt = cb.J_horizontal(X)

    for i in range(X.shape[0]):
        x = X[i]
        G = curv.G[i]
        Ric = curv.Ric[i]
        Riem = curv.Riem[i]
        hb = bcurv.G[i]
        xi = cb.xi(x)
        rho0_eig = np.abs(np.linalg.eigvals(np.linalg.solve(hb, bcurv.Ric[i]))).max()
        Kscale = max(cf["lambda"] + rho0_eig / b**2, 1e-12)

        rep.compare("circle.lambda", "rho(xi/a, xi/a) = s^2 a^2 m / 2b^4", xi @ Ric @ xi / a**2, cf["lambda"], tol,
                    scale=Kscale, sample=i)
        rep.compare("circle.xi_norm", "g(xi, xi) = a^2", xi @ G @ xi, a**2, C.TOL_BASE, sample=i)
        rep.add("circle.xi_killing", "L_xi g = 0", np.abs(Lxi[i]).max(), C.TOL_KILLING, i)
        dmodel = np.zeros_like(dth[i])
        dmodel[1:, 1:] = s * Om[i]
        rep.add("circle.dtheta", "d theta = s p*Omega_N", np.abs(dth[i] - dmodel).max() / max(abs(s), 1.0), C.TOL_BASE, i)

        # random horizontal vectors
        w1, w2, w3 = rng.standard_normal((3, dB))
        E = cb.lift(x, w1)
        F = cb.lift(x, w2)
        Y3 = cb.lift(x, w3)
        Eu = E / np.sqrt(E @ G @ E)
        rep.compare("circle.K_E_xi", "K(E, xi) = s^2 a^2 / 4b^4", sectional_from(_single(curv, i), Eu, xi),
                    cf["K_E_xi"], tol, scale=Kscale, sample=i)
        K0 = sectional_from(_single(bcurv, i), w1, w2)
        wedge = wedge_norm_sq(G, E, F)
        gEJF = E @ G @ (Jt[i] @ F)
        K_EF = K0 / b**2 - 3 * s**2 * a**2 * gEJF**2 / (4 * b**4 * wedge)
        rep.compare("circle.K_E_F", "K(E,F) = K0/b^2 - 3 s^2 a^2 g(E,JF)^2 / 4b^4|E^F|^2",
                    sectional_from(_single(curv, i), E, F), K_EF, tol, scale=Kscale, sample=i)
        # E perpendicular to J F: K reduces to the base term (needs a horizontal space of dim >= 4)
        if cb.m > 1:
            JE = Jt[i] @ E
            Fp = F - (F @ G @ JE) / (JE @ G @ JE) * JE
            rep.compare("circle.K_E_Fperp", "K(E,F) = K0/b^2 when g(E, JF) = 0",
                        sectional_from(_single(curv, i), E, Fp),
                        sectional_from(_single(bcurv, i), cb.project(E), cb.project(Fp)) / b**2, tol,
                        scale=Kscale, sample=i)
        Es = cb.project(Eu)
        rho0 = bcurv.Ric[i]
        rep.compare("circle.rho_EE", "rho(E,E) = rho_0(bE_*, bE_*)/b^2 - s^2 a^2 / 2b^4", Eu @ Ric @ Eu,
                    (b * Es) @ rho0 @ (b * Es) / b**2 + cf["rho_shift"], tol, scale=Kscale, sample=i)
        RXxiYxi = np.einsum("ijkl,i,j,k,l->", Riem, E, xi, F, xi)
        closed = cf["R_xi_coeff"] * (w1 @ hb @ w2)
        rep.compare("circle.R_X_xi_Y_xi", "R(X,xi,Y,xi) = -(s^2 a^4 / 4b^2) h(X_*,Y_*)", RXxiYxi, closed, tol,
                    scale=Kscale * a**2 * np.sqrt((E @ G @ E) * (F @ G @ F)), sample=i)
        RXYZxi = np.einsum("ijkl,i,j,k,l->", Riem, E, F, Y3, xi)
        nrm = np.sqrt((E @ G @ E) * (F @ G @ F) * (Y3 @ G @ Y3)) * a
        rep.add("circle.R_X_Y_Z_xi", "R(X,Y,Z,xi) = 0", abs(RXYZxi) / (Kscale * nrm), tol, i, closed_form=0.0,
                numeric=RXYZxi)
        rep.add("circle.rho_xi_X", "rho(xi, X) = 0", abs(xi @ Ric @ Eu) / (Kscale * a), tol, i, closed_form=0.0,
                numeric=xi @ Ric @ Eu)

    # A-tensor on basic horizontal fields
    wrow = rng.standard_normal((2, dB))
    Ef = lambda Y: cb.lift(Y, np.broadcast_to(wrow[0], np.asarray(Y).shape[:-1] + (dB,)))
    Ff = lambda Y: cb.lift(Y, np.broadcast_to(wrow[1], np.asarray(Y).shape[:-1] + (dB,)))
    nF = covariant_derivative_array(g, Ff, ("u",), X, fd)
    nE = covariant_derivative_array(g, Ef, ("u",), X, fd)
    Ev, Fv = Ef(X), Ff(X)
    th = cb.theta(X)
    AEF = np.einsum("na,nam,nm->n", th, nF, Ev)
    AFE = np.einsum("na,nam,nm->n", th, nE, Fv)
    closed = -0.5 * s * np.einsum("nab,a,b->n", Om, wrow[0], wrow[1])
    for i in range(X.shape[0]):
        sc = max(abs(closed[i]), 0.5 * abs(s) * np.sqrt((Ev[i] @ curv.G[i] @ Ev[i]) * (Fv[i] @ curv.G[i] @ Fv[i])) / b**2)
        rep.add("circle.A_tensor", "A_E F = -(s/2) Omega_N(E_*, F_*) xi", abs(AEF[i] - closed[i]) / sc, tol, i,
                closed_form=closed[i], numeric=AEF[i])
        rep.add("circle.A_antisym", "A_E F = -A_F E", abs(AEF[i] + AFE[i]) / sc, tol, i)
    return rep


# -- warped bundle ----------------------------------------------------------------------------------


def warped_closed_forms(wb: WarpedBundleMetric, t) -> dict[str, np.ndarray]:
    p = wb.profile
    s, n = wb.s, wb.n
    r, dr, ddr, f, df = p.r(t), p.dr(t), p.ddr(t), p.f(t), p.df(t)
    K93 = s**2 * f**2 / (4 * r**4) - df * dr / (f * r)
    return {
        "T_UU": -r * dr,
        "T_xixi": -f * df,
        "K_JH_U": K93,
        "K_H_U": -ddr / r,
        "rho_shift_displayed": -(2 * n - 3) * dr**2 / r**2 + K93,
        "rho_shift": -(2 * n - 3) * dr**2 / r**2 - df * dr / (f * r) - ddr / r,
        "gauss_EE": -(dr**2) / r**2,
        "scale": np.abs(K93) + dr**2 / r**2 + np.abs(ddr / r) + np.abs(df * dr / (f * r)) + s**2 * f**2 / (4 * r**4),
    }


def verify_warped_curvature(wb: WarpedBundleMetric, samples, fd: FDConfig = DEFAULT_FD,
                            tol: float = C.TOL_CURVATURE_REL, seed: int = 0,
                            rep: VerificationReport | None = None) -> VerificationReport:
    rep = VerificationReport(name="warped") if rep is None else rep
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    wb.require_sample(X)
    rng = np.random.default_rng(seed)
    g = wb.metric
    J = total_complex_structure(wb)
    curv = curvature_at(g, X, fd)
    t = X[:, 0]
    cf = warped_closed_forms(wb, t)
    dB = wb.base.dim
    bcurv = _base_curvature(wb.base, X[:, 2:], fd)

    # T tensor: normal component of nabla_U U for the lift of a unit base vector
    W = rng.standard_normal((X.shape[0], 2, dB))
    hb = wb.base.metric(X[:, 2:])
    w1 = W[:, 0] / np.sqrt(np.einsum("na,nab,nb->n", W[:, 0], hb, W[:, 0]))[:, None]
    w2 = W[:, 1] - np.einsum("na,nab,nb->n", W[:, 1], hb, w1)[:, None] * w1
    w2 = w2 / np.sqrt(np.einsum("na,nab,nb->n", w2, hb, w2))[:, None]
    nU = covariant_derivative_array(g, lambda Y: _lift_bcast(wb, Y, w1), ("u",), X, fd)
    nV = covariant_derivative_array(g, lambda Y: _lift_bcast(wb, Y, w2), ("u",), X, fd)
    nxi = covariant_derivative_array(g, wb.xi, ("u",), X, fd)
    U = wb.lift(X, w1)
    V = wb.lift(X, w2)
    xi = wb.xi(X)
    H = wb.H(X)
    G = curv.G
    TUU = np.einsum("nam,nm,nab,nb->n", nU, U, G, H)
    TUV = np.einsum("nam,nm,nab,nb->n", nV, U, G, H)
    Txixi = np.einsum("nam,nm,nab,nb->n", nxi, xi, G, H)

    for i in range(X.shape[0]):
        Ks = float(cf["scale"][i])
        Gi, Ri, Rici = G[i], curv.Riem[i], curv.Ric[i]
        ci = _single(curv, i)
        JH = J(X[i]) @ H[i]
        Uu = U[i] / np.sqrt(U[i] @ Gi @ U[i])
        Vu = V[i] / np.sqrt(V[i] @ Gi @ V[i])
        r = float(wb.profile.r(t[i]))
        f = float(wb.profile.f(t[i]))
        rr = abs(cf["T_UU"][i]) + r * abs(float(wb.profile.dr(t[i])))
        rep.compare("warped.T_UU", "T(U,U) = -r r' H", TUU[i], cf["T_UU"][i], tol, scale=max(rr, 1e-12), sample=i)
        rep.add("warped.T_UV", "T(U,V) = 0 for g(U,V) = 0", abs(TUV[i]) / max(rr, 1e-12), tol, i, closed_form=0.0,
                numeric=TUV[i])
        rep.compare("warped.T_xixi", "T(xi,xi) = -f f' H", Txixi[i], cf["T_xixi"][i], tol,
                    scale=max(f * abs(float(wb.profile.df(t[i]))), f * f / r), sample=i)
        rep.compare("warped.K_JH_U", "R(JH,U,U,JH) = s^2 f^2/4r^4 - f'r'/(fr)", sectional_from(ci, JH, Uu),
                    cf["K_JH_U"][i], tol, scale=Ks, sample=i)
        rep.compare("warped.K_H_U", "K(H,U) = -r''/r", sectional_from(ci, H[i], Uu), cf["K_H_U"][i], tol,
                    scale=Ks, sample=i)
        val = np.einsum("ijkl,i,j,k,l->", Ri, JH, Uu, Vu, JH)
        rep.add("warped.R_JH_U_V_JH", "R(JH,U,V,JH) = 0 for g(U,V) = 0", abs(val) / Ks, tol, i, closed_form=0.0, numeric=val)
        # Delta triples against E vectors
        worst = 0.0
        D = (H[i], JH)
        for A_ in D:
            for B_ in D:
                for C_ in D:
                    worst = max(worst, abs(np.einsum("ijkl,i,j,k,l->", Ri, A_, B_, C_, Uu)))
        rep.add("warped.R_Delta_Delta_Delta_E", "R(X,Y,Z,V) = 0 for X,Y,Z in Delta, V in E", worst / Ks, tol, i,
                closed_form=0.0, numeric=worst)
        Wu = _unit_in_E(wb, X[i], Gi, rng)
        val = np.einsum("ijkl,i,j,k,l->", Ri, Uu, Vu, xi[i] / f, Wu)
        rep.add("warped.R_U_V_xi_W", "R(U,V,xi,W) = 0", abs(val) / Ks, tol, i, closed_form=0.0, numeric=val)
        val = np.einsum("ijkl,i,j,k,l->", Ri, H[i], Vu, xi[i] / f, H[i])
        rep.add("warped.R_H_V_xi_H", "R(H,V,xi,H) = 0", abs(val) / Ks, tol, i, closed_form=0.0, numeric=val)
        val = Vu @ Rici @ (xi[i] / f)
        rep.add("warped.rho_V_xi", "rho(V, xi) = 0", abs(val) / Ks, tol, i, closed_form=0.0, numeric=val)

        # frozen-level circle bundle
        cb = wb.fiber_metric(float(t[i]))
        P = X[i, 1:]
        ccurv = curvature_at(cb.metric, P, fd)
        Vp = Vu[1:]
        Up = Uu[1:]
        rho_hat = Vp @ ccurv.Ric @ Vp
        ccf = circle_closed_forms(cb)
        Vs = cb.project(Vp)
        rho0 = bcurv.Ric[i]
        rep.compare("warped.rho_hat_closed", "rho^(V,V) matches the circle-bundle closed form",
                    rho_hat, (r * Vs) @ rho0 @ (r * Vs) / r**2 + ccf["rho_shift"], tol, scale=Ks, sample=i)
        gauss = np.einsum("ijkl,i,j,k,l->", Ri, Uu, Vu, Vu, Uu) - np.einsum("ijkl,i,j,k,l->", ccurv.Riem, Up, Vp, Vp, Up)
        rep.compare("warped.gauss_EE", "R(U,V,V,U) = R^(U,V,V,U) - r'^2/r^2", gauss, cf["gauss_EE"][i], tol,
                    scale=Ks, sample=i)
        rho_num = Vu @ Rici @ Vu
        rep.compare("warped.rho_VV", "rho(V,V) = rho^ - (2n-3) r'^2/r^2 - f'r'/(fr) - r''/r",
                    rho_num, rho_hat + cf["rho_shift"][i], tol, scale=Ks, sample=i)
        rep.compare("warped.rho_VV_displayed", "rho(V,V) = rho^ - (2n-3) r'^2/r^2 + s^2f^2/4r^4 - f'r'/(fr)",
                    rho_num, rho_hat + cf["rho_shift_displayed"][i], tol, scale=Ks, sample=i, informational=True)
    return rep


def _bcast(w, Y):
    """Broadcast per-sample constants ``w`` of shape ``(N, k)`` over FD stencil points."""
    Y = np.asarray(Y)
    return np.broadcast_to(w.reshape(w.shape[:1] + (1,) * (Y.ndim - 2) + w.shape[1:]), Y.shape[:-1] + w.shape[-1:])


def _lift_bcast(wb, Y, w):
    return wb.lift(Y, _bcast(w, Y))


def _unit_in_E(wb: WarpedBundleMetric, x, G, rng) -> np.ndarray:
    w = rng.standard_normal(wb.base.dim)
    v = wb.lift(x, w)
    return v / np.sqrt(v @ G @ v)


def verify_rho_vv_at(wb: WarpedBundleMetric, x, fd: FDConfig = DEFAULT_FD, tol: float = C.TOL_CURVATURE_REL,
                     seed: int = 0) -> tuple[float, float, float]:
    """Numeric ``rho(V,V)`` and both closed forms at one point; returns (numeric, corrected, displayed)."""
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    curv = curvature_at(wb.metric, x, fd)
    V = _unit_in_E(wb, x, curv.G, rng)
    cb = wb.fiber_metric(float(x[0]))
    ccurv = curvature_at(cb.metric, x[1:], fd)
    rho_hat = V[1:] @ ccurv.Ric @ V[1:]
    cf = warped_closed_forms(wb, x[0])
    return float(V @ curv.Ric @ V), float(rho_hat + cf["rho_shift"]), float(rho_hat + cf["rho_shift_displayed"])


# -- Ricci eigenvalue count ------------------------------------------------------------------------


def ricci_eigenvalues(metric, x, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    curv = curvature_at(metric, np.asarray(x, dtype=float), fd)
    L = np.linalg.cholesky(curv.G)
    Li = np.linalg.inv(L)
    return np.linalg.eigvalsh(Li @ curv.Ric @ Li.T)


def verify_ricci_count(wb: WarpedBundleMetric, samples, fd: FDConfig = DEFAULT_FD, gap: float = C.EIGEN_CLUSTER_GAP,
                       rep: VerificationReport | None = None) -> VerificationReport:
    """Total-space Ricci has ``k + 1`` clustered eigenvalues where the base has ``k``."""
    rep = VerificationReport(name="ricci") if rep is None else rep
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    wb.require_sample(X)
    for i in range(X.shape[0]):
        k = len(cluster(ricci_eigenvalues(wb.base.metric, X[i, 2:], fd), gap))
        count = len(cluster(ricci_eigenvalues(wb.metric, X[i], fd), gap))
        rep.add("ricci.eigen_count", "number of Ricci eigenvalues = k + 1", abs(count - (k + 1)), C.INDICATOR_TOL, i,
                closed_form=k + 1, numeric=count)
    return rep
