"""Special Kähler potentials: Killing and holomorphy of ``X = J grad tau``, Hessian eigenstructure, identity chain.

``H^tau(Y, Z) = g(nabla_Y grad tau, Z)``; ``Lambda`` is its eigenvalue on
``V = span{grad tau, X}`` and ``M`` its eigenvalue on the orthogonal
complement. ``lambda = rho(X, X) / Q`` is always read off the numeric Ricci
tensor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import constants as C
from .bundles import WarpedBundleMetric, total_complex_structure
from .foliation import FoliationData, _bilinear_norm, _covector_norm, _vector_norm
from .report import VerificationReport
from .tensor import (
    DEFAULT_FD,
    ChartMetric,
    DegeneracyError,
    FDConfig,
    covariant_derivative_array,
    curvature_at,
    exterior_derivative_array,
    jacobian,
    lie_derivative_endomorphism_array,
    lie_derivative_metric_array,
    second_derivative,
)
from .tensor.curvature import christoffel_from_jet, metric_jet


class CriticalPointError(DegeneracyError):
    """``Q = |grad tau|^2`` is too small for the eigenstructure to be defined."""


@dataclass(frozen=True)
class PotentialData:
    metric: ChartMetric
    J: Callable[[np.ndarray], np.ndarray]
    tau: Callable[[np.ndarray], np.ndarray]
    n: int
    fd: FDConfig = DEFAULT_FD
    c: float = 0.0
    q_floor: float = 0.0  # Q below this is treated as critical

    def dtau(self, X, fd: FDConfig | None = None) -> np.ndarray:
        fd = self.fd if fd is None else fd
        return jacobian(self.tau, np.asarray(X, dtype=float), fd)

    def grad(self, X, fd: FDConfig | None = None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.linalg.solve(self.metric(X), self.dtau(X, fd)[..., None])[..., 0]

    def X(self, Y, fd: FDConfig | None = None) -> np.ndarray:
        """The field ``J grad tau``."""
        Y = np.asarray(Y, dtype=float)
        return np.einsum("...ij,...j->...i", self.J(Y), self.grad(Y, fd))

    def Q(self, X, fd: FDConfig | None = None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        dt = self.dtau(X, fd)
        return np.einsum("...i,...ij,...j->...", dt, np.linalg.inv(self.metric(X)), dt)

    def hessian(self, X, fd: FDConfig | None = None) -> np.ndarray:
        """``d_i d_j tau - Gamma^k_ij d_k tau`` from a direct second-derivative stencil."""
        fd = self.fd if fd is None else fd
        X = np.asarray(X, dtype=float)
        G, dG = metric_jet(self.metric, X, fd)
        Gam = christoffel_from_jet(G, dG)
        dd = second_derivative(self.tau, X, fd.step2, fd.richardson)
        return dd - np.einsum("...kij,...k->...ij", Gam, self.dtau(X, fd))

    def hessian_covariant(self, X, fd: FDConfig | None = None) -> np.ndarray:
        """Second route: ``nabla`` applied to the finite-difference field ``d tau``."""
        fd = self.fd if fd is None else fd
        X = np.asarray(X, dtype=float)
        H = covariant_derivative_array(self.metric, lambda Y: self.dtau(Y, fd), ("d",), X, fd.nested(1))
        return np.swapaxes(H, -1, -2)

    def Lambda_M(self, X, fd: FDConfig | None = None):
        """``Lambda`` on V, the mean ``M`` on E, and the projector onto E."""
        X = np.asarray(X, dtype=float)
        G = self.metric(X)
        v = self.grad(X, fd)
        w = np.einsum("...ij,...j->...i", self.J(X), v)
        Q = np.einsum("...i,...ij,...j->...", v, G, v)
        if np.any(Q <= self.q_floor):
            raise CriticalPointError(f"Q = {np.min(Q):.3e} at or below the critical floor {self.q_floor:.3e}")
        Hs = self.hessian(X, fd)
        Lam = np.einsum("...i,...ij,...j->...", v, Hs, v) / Q
        P_V = (np.einsum("...i,...j,...jk->...ik", v, v, G) + np.einsum("...i,...j,...jk->...ik", w, w, G)) / Q[..., None, None]
        P_E = np.eye(G.shape[-1]) - P_V
        trE = np.einsum("...ij,...ik,...kj->...", Hs, P_E, np.linalg.inv(G))
        M = trE / (2 * (self.n - 1))
        return Lam, M, P_E

    def Lambda(self, X, fd: FDConfig | None = None) -> np.ndarray:
        return self.Lambda_M(X, fd)[0]

    def M(self, X, fd: FDConfig | None = None) -> np.ndarray:
        return self.Lambda_M(X, fd)[1]

    def foliation(self) -> FoliationData:
        """The foliation tangent to ``span{grad tau, X}``."""
        return FoliationData(self.metric, self.J, lambda Y: self.grad(Y, self.fd), self.n, self.fd.nested(1))


def warped_potential(wb: WarpedBundleMetric, fd: FDConfig = DEFAULT_FD) -> PotentialData:
    p = wb.profile
    qmax = float(np.max(p.Q_along(p.t_grid)))
    return PotentialData(wb.metric, total_complex_structure(wb), wb.tau, wb.n, fd,
                         q_floor=C.CRITICAL_Q_FRACTION * qmax)


def _endo_norm(T: np.ndarray, G: np.ndarray) -> np.ndarray:
    """g-norm of a (1,1) tensor ``T^a_b``."""
    low = np.einsum("...ab,...bk->...ak", G, T)
    return _bilinear_norm(low, np.linalg.inv(G))


def check_killing_holomorphic(pd: PotentialData, samples, field: Callable | None = None,
                              tol: float = C.TOL_KILLING, rep: VerificationReport | None = None) -> VerificationReport:
    """``|L_X g|`` and ``|L_X J|`` at each sample; ``field`` defaults to ``J grad tau``."""
    rep = VerificationReport(name="potential") if rep is None else rep
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    if field is None:
        fd_out = pd.fd.nested(1)
        field = lambda Y: pd.X(Y, pd.fd)
    else:
        fd_out = pd.fd
    G = pd.metric(X)
    Lg = lie_derivative_metric_array(pd.metric, field, X, fd_out)
    LJ = lie_derivative_endomorphism_array(pd.J, field, X, fd_out)
    ng = _bilinear_norm(Lg, np.linalg.inv(G))
    nJ = _endo_norm(LJ, G)
    for i in range(X.shape[0]):
        rep.add("potential.killing", "L_X g = 0", ng[i], tol, i)
        rep.add("potential.holomorphic", "L_X J = 0", nJ[i], tol, i)
    return rep


@dataclass(frozen=True)
class HessianStructure:
    Lambda: float
    M: tuple[float, ...]
    residual: float
    eigenvalues: tuple[float, ...]

    @property
    def n_distinct(self) -> int:
        return len(self.eigenvalues)


def cluster(values, gap: float = C.EIGEN_CLUSTER_GAP) -> list[float]:
    """Representatives of clusters of sorted values separated by more than ``gap``."""
    vals = np.sort(np.asarray(values, dtype=float))
    if vals.size == 0:
        return []
    groups = [[vals[0]]]
    for v in vals[1:]:
        if v - groups[-1][-1] > gap:
            groups.append([v])
        else:
            groups[-1].append(v)
    return [float(np.mean(gp)) for gp in groups]


def hessian_eigenstructure(pd: PotentialData, x) -> HessianStructure:
    """Eigen-decomposition of ``H^tau`` relative to ``g`` at one point."""
    x = np.asarray(x, dtype=float)
    G = pd.metric(x)
    Lam, Mmean, P_E = pd.Lambda_M(x)
    Hs = pd.hessian(x)
    fol = pd.foliation()
    E = fol.e_frame(x)
    HE = E.T @ Hs @ E
    Ms = tuple(float(v) for v in np.linalg.eigvalsh(0.5 * (HE + HE.T)))
    v = pd.grad(x)
    w = pd.J(x) @ v
    Q = float(v @ G @ v)
    model = Lam * (np.outer(G @ v, G @ v) + np.outer(G @ w, G @ w)) / Q + Mmean * (P_E.T @ G @ P_E)
    Ginv = np.linalg.inv(G)
    residual = float(_bilinear_norm(Hs - model, Ginv))
    L = np.linalg.cholesky(G)
    Li = np.linalg.inv(L)
    eig = np.linalg.eigvalsh(Li @ Hs @ Li.T)
    return HessianStructure(float(Lam), Ms, residual, tuple(cluster(eig)))


def verify_identity_chain(pd: PotentialData, samples, tol: float = C.TOL_POTENTIAL, seed: int = 0,
                          rep: VerificationReport | None = None) -> VerificationReport:
    """Residual rows for the special-potential identities at each sample."""
    rep = VerificationReport(name="potential") if rep is None else rep
    fd = pd.fd
    nfd = fd.nested(1)
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    n = pd.n
    G = pd.metric(X)
    Ginv = np.linalg.inv(G)
    tau = pd.tau(X)
    dtau = pd.dtau(X)
    v = pd.grad(X)
    Xf = pd.X(X)
    Q = pd.Q(X)
    Lam, M, P_E = pd.Lambda_M(X)
    dQ = jacobian(lambda Y: pd.Q(Y, fd), X, nfd)
    dM = jacobian(lambda Y: pd.M(Y, fd), X, nfd)
    dLam = jacobian(lambda Y: pd.Lambda(Y, fd), X, nfd)
    curv = curvature_at(pd.metric, X, fd)
    rhoXX = np.einsum("...ij,...i,...j->...", curv.Ric, Xf, Xf)
    lam = rhoXX / Q
    rhoX = np.einsum("...ij,...j->...i", curv.Ric, Xf)
    rhoX_E = np.einsum("...i,...ij->...j", rhoX, P_E)
    Xlow = np.einsum("...ij,...j->...i", G, Xf)
    alpha = pd.foliation().alpha_form(X)
    dln_tau = dtau / (tau - pd.c)[..., None]
    JX = np.einsum("...ij,...j->...i", pd.J(X), Xf)
    Rvec = curv.Rup  # R^l_ijk
    rng = np.random.default_rng(seed)
    Jx = pd.J(X)

    for i in range(X.shape[0]):
        Gi, Gii = G[i], Ginv[i]
        sc = lambda w: _covector_norm(w, Gii)
        dtn = sc(dtau[i])
        rep.add("chain.dQ", "dQ = 2 Lambda dtau", sc(dQ[i] - 2 * Lam[i] * dtau[i]) / max(sc(dQ[i]), dtn), tol, i)
        lhs = Q[i] * dM[i]
        rhs = 2 * M[i] * (Lam[i] - M[i]) * dtau[i]
        rep.add("chain.dM", "Q dM = 2M(Lambda - M) dtau", sc(lhs - rhs) / max(sc(rhs), Q[i] * dtn * abs(M[i]), 1e-300), tol, i)
        lhs = Q[i] * dLam[i]
        rhs = (2 * (n - 1) * M[i] * (M[i] - Lam[i]) - lam[i] * Q[i]) * dtau[i]
        rep.add("chain.dLambda", "Q dLambda = (2(n-1)M(M - Lambda) - lambda Q) dtau",
                sc(lhs - rhs) / max(sc(rhs), sc(lhs), 1e-300), tol, i)
        rep.compare("chain.Q_over_M", "Q/M = 2(tau - c)", Q[i] / M[i], 2 * (tau[i] - pd.c), tol, sample=i)
        rep.add("chain.alpha_dln_tau", "alpha = d ln|tau - c|", sc(alpha[i] - dln_tau[i]) / sc(dln_tau[i]), tol, i)
        # curvature along the potential gradient, random Y, Z in E
        Ef = pd.foliation().e_frame(X[i])
        Y = Ef @ rng.standard_normal(Ef.shape[1])
        Z = Ef @ rng.standard_normal(Ef.shape[1])
        RYZv = np.einsum("lijk,i,j,k->l", Rvec[i], Y, Z, v[i])
        om = (Jx[i] @ Y) @ Gi @ Z
        lhs = Q[i] * RYZv
        rhs = 2 * (Lam[i] - M[i]) * M[i] * om * Xf[i]
        scale = max(_vector_norm(rhs, Gi), abs(Q[i]) * np.sqrt(abs(curv.scalar[i]) + 1.0) * _vector_norm(v[i], Gi)
                    * _vector_norm(Y, Gi) * _vector_norm(Z, Gi))
        rep.add("chain.R_grad_tau", "Q R(Y,Z) grad tau = 2(Lambda - M) M omega(Y,Z) X", _vector_norm(lhs - rhs, Gi) / scale, tol, i)
        ricscale = max(abs(lam[i]), 1.0) * np.sqrt(Q[i])
        rep.add("chain.rho_X_E", "rho(X, E) = 0", sc(rhoX_E[i]) / ricscale, tol, i)
        rep.add("chain.rho_X", "rho(X, .) = lambda g(X, .)", sc(rhoX[i] - lam[i] * Xlow[i]) / ricscale, tol, i)
        K = np.einsum("ijkl,i,j,k,l->", curv.Riem[i], Xf[i], JX[i], JX[i], Xf[i]) / Q[i] ** 2
        rep.compare("chain.K_X_JX", "K(X ^ JX) = lambda + 2(n-1) M (Lambda - M)/Q", K,
                    lam[i] + 2 * (n - 1) * M[i] * (Lam[i] - M[i]) / Q[i], tol, sample=i)
        # intermediate q bookkeeping, informational only
        q = -(dLam[i] @ v[i]) / Q[i]
        rep.compare("chain.q_identity", "q = K(X ^ JX)", q, K, tol, sample=i, informational=True)
        rep.compare("chain.laplacian", "2 Lambda + 2(n-1) M = -Laplacian tau",
                    2 * Lam[i] + 2 * (n - 1) * M[i], float(np.einsum("ij,ij->", pd.hessian(X[i]), Gii)), tol, sample=i)
    return rep


def check_pregeodesic_equivalences(pd: PotentialData, samples, tol: float = C.TOL_POTENTIAL,
                                   rep: VerificationReport | None = None) -> VerificationReport:
    """Conditions (a)-(e) evaluated together; an inconsistency row flags mixed verdicts."""
    rep = VerificationReport(name="potential") if rep is None else rep
    fd = pd.fd
    nfd = fd.nested(1)
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    G = pd.metric(X)
    Ginv = np.linalg.inv(G)
    dtau = pd.dtau(X)
    v = pd.grad(X)
    Xf = pd.X(X)
    Q = pd.Q(X)
    Lam, M, P_E = pd.Lambda_M(X)
    Hs = pd.hessian(X)
    dQ = jacobian(lambda Y: pd.Q(Y, fd), X, nfd)
    nv = covariant_derivative_array(pd.metric, lambda Y: pd.grad(Y, fd), ("u",), X, nfd)
    nvv = np.einsum("...am,...m->...a", nv, v)
    sff = pd.foliation().second_fundamental_residual(X)
    Hv = np.einsum("...ij,...j->...i", Hs, v)
    HX = np.einsum("...ij,...j->...i", Hs, Xf)
    Xlow = np.einsum("...ij,...j->...i", G, Xf)
    Hmix = np.einsum("...ij,...i,...jk->...k", Hs, v, P_E)
    for i in range(X.shape[0]):
        sc = lambda w: _covector_norm(w, Ginv[i])
        scale = max(abs(Lam[i]), np.sqrt(abs(M[i])), 1.0) * np.sqrt(Q[i])
        res = {
            "a": sc(HX[i] - Lam[i] * Xlow[i]) / scale,
            "b": _vector_norm(nvv[i] - Lam[i] * v[i], G[i]) / scale,
            "c": sff[i],
            "d": max(sc(Hv[i] - Lam[i] * dtau[i]), sc(Hmix[i])) / scale,
            "e": sc(dQ[i] - 2 * Lam[i] * dtau[i]) / max(sc(dQ[i]), sc(dtau[i])),
        }
        rows = {
            "a": ("pregeodesic.a_eigenfield", "X eigenfield of H^tau"),
            "b": ("pregeodesic.b_pregeodesic", "nabla_v v = Lambda v"),
            "c": ("pregeodesic.c_totally_geodesic", "span{X, JX} totally geodesic"),
            "d": ("pregeodesic.d_eigendistribution", "span{X, JX} eigendistribution of H^tau"),
            "e": ("pregeodesic.e_dQ", "dQ = 2 Lambda dtau"),
        }
        verdicts = []
        for k, (check, tag) in rows.items():
            verdicts.append(rep.add(check, tag, res[k], tol, i).passed)
        rep.add("pregeodesic.consistent", "conditions hold or fail together", 0.0 if len(set(verdicts)) == 1 else 1.0, C.INDICATOR_TOL, i)
    return rep


def hessian_two_route(pd: PotentialData, samples, tol: float = C.TOL_BASE,
                      rep: VerificationReport | None = None) -> VerificationReport:
    rep = VerificationReport(name="potential") if rep is None else rep
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    H1 = pd.hessian(X)
    H2 = pd.hessian_covariant(X)
    Ginv = np.linalg.inv(pd.metric(X))
    diff = _bilinear_norm(H1 - H2, Ginv) / np.maximum(_bilinear_norm(H1, Ginv), 1.0)
    sym = _bilinear_norm(H1 - np.swapaxes(H1, -1, -2), Ginv)
    for i in range(X.shape[0]):
        rep.add("potential.hessian_routes", "stencil Hessian = nabla d tau", diff[i], tol, i)
        rep.add("potential.hessian_symmetric", "H^tau symmetric", sym[i], tol, i)
    return rep


def verify_warped_potential(wb: WarpedBundleMetric, samples, fd: FDConfig = DEFAULT_FD, seed: int = 0,
                            tol: float = C.TOL_POTENTIAL) -> VerificationReport:
    """Potential suite on a warped bundle with ``tau = r^2/2``, plus its closed forms."""
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    wb.require_sample(X)
    pd = warped_potential(wb, fd)
    rep = VerificationReport(name="potential")
    check_killing_holomorphic(pd, X, rep=rep)
    verify_identity_chain(pd, X, tol=tol, seed=seed, rep=rep)
    check_pregeodesic_equivalences(pd, X, tol=tol, rep=rep)
    hessian_two_route(pd, X, rep=rep)
    p = wb.profile
    t = X[:, 0]
    Lam, M, _ = pd.Lambda_M(X)
    Q = pd.Q(X)
    for i in range(X.shape[0]):
        scale = max(abs(wb.s), 1.0)
        rep.compare("warped.Lambda", "Lambda = s f'/2", Lam[i], 0.5 * wb.s * p.df(t[i]), tol, scale=scale, sample=i)
        rep.compare("warped.M", "M = r'^2", M[i], p.dr(t[i]) ** 2, tol, sample=i)
        rep.compare("warped.Q", "Q = (r r')^2", Q[i], (p.r(t[i]) * p.dr(t[i])) ** 2, tol, sample=i)
    return rep
