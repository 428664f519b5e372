"""Invariants of a complex foliation by curves and the homothetic-foliation identities.

A foliation is supplied as a unit section ``u`` of a J-invariant 2-plane
distribution ``Delta``; ``E`` is its orthogonal complement. Traces over ``E``
use the orthogonal projector, ``sum_i B(e_i, e_i) = tr(B P_E G^-1)``, so no
frame is needed for ``div_E`` or the conformal factor. Quantities built from
finite-difference data (the principal section, ``p*``) are differentiated
again with the nested stepping of :class:`FDConfig`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import constants as C
from .bundles import WarpedBundleMetric, total_complex_structure
from .report import VerificationReport
from .tensor import (
    DEFAULT_FD,
    ChartMetric,
    DegeneracyError,
    FDConfig,
    GeodesicPath,
    covariant_derivative_array,
    exterior_derivative_array,
    gram_schmidt,
    jacobi_integrate,
    lie_derivative_metric_array,
)


class PrincipalUndefined(DegeneracyError):
    """kappa vanishes (to threshold) at the point, so the principal section is undefined."""


def _bilinear_norm(B: np.ndarray, Ginv: np.ndarray) -> np.ndarray:
    """g-norm of covariant 2-tensors: ``sqrt(B_ij B_kl g^ik g^jl)``."""
    return np.sqrt(np.maximum(np.einsum("...ij,...kl,...ik,...jl->...", B, B, Ginv, Ginv), 0.0))


def _covector_norm(w: np.ndarray, Ginv: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(np.einsum("...i,...ij,...j->...", w, Ginv, w), 0.0))


def _vector_norm(v: np.ndarray, G: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(np.einsum("...i,...ij,...j->...", v, G, v), 0.0))


@dataclass(frozen=True)
class FoliationData:
    """Metric, complex structure and a unit section ``u`` of ``Delta``.

    ``n`` is the complex dimension of the manifold, so ``E`` has real rank ``2(n-1)``.
    """

    metric: ChartMetric
    J: Callable[[np.ndarray], np.ndarray]
    u: Callable[[np.ndarray], np.ndarray]
    n: int
    fd: FDConfig = DEFAULT_FD
    kappa_threshold: float = C.KAPPA_THRESHOLD

    # -- frames and projectors --
    def frame(self, X):
        X = np.asarray(X, dtype=float)
        G = self.metric(X)
        u = np.asarray(self.u(X), dtype=float)
        u = u / _vector_norm(u, G)[..., None]
        Ju = np.einsum("...ij,...j->...i", self.J(X), u)
        return G, u, Ju

    def Ju(self, X):
        return self.frame(X)[2]

    def unit_u(self, X):
        return self.frame(X)[1]

    def projectors(self, X):
        G, u, Ju = self.frame(X)
        P_delta = np.einsum("...i,...j,...jk->...ik", u, u, G) + np.einsum("...i,...j,...jk->...ik", Ju, Ju, G)
        P_E = np.eye(G.shape[-1]) - P_delta
        return G, P_delta, P_E

    def e_frame(self, x) -> np.ndarray:
        """Orthonormal frame of ``E`` at a single point (Gram-Schmidt of projected coordinate fields)."""
        x = np.asarray(x, dtype=float)
        G, _, P_E = self.projectors(x)
        cand = P_E @ np.eye(G.shape[-1])
        norms = np.sqrt(np.einsum("ik,ij,jk->k", cand, G, cand))
        order = np.argsort(-norms, kind="stable")
        out = []
        for k in order:
            w = cand[:, k].copy()
            for e in out:
                w = w - (e @ G @ w) * e
            nw = np.sqrt(max(w @ G @ w, 0.0))
            if nw > 1e-8:
                out.append(w / nw)
            if len(out) == 2 * (self.n - 1):
                break
        if len(out) != 2 * (self.n - 1):
            raise DegeneracyError("could not build an orthonormal frame of E")
        return np.array(out).T

    # -- divergence and kappa --
    def div_E(self, V: Callable, X, fd: FDConfig | None = None) -> np.ndarray:
        """``sum_i g(nabla_{e_i} V, e_i)`` over an orthonormal frame of ``E``."""
        fd = self.fd if fd is None else fd
        X = np.asarray(X, dtype=float)
        _, _, P_E = self.projectors(X)
        nV = covariant_derivative_array(self.metric, V, ("u",), X, fd)  # [a, m] = nabla_m V^a
        return np.einsum("...ma,...am->...", P_E, nV)

    def div_pair(self, X, fd: FDConfig | None = None):
        return self.div_E(self.unit_u, X, fd), self.div_E(self.Ju, X, fd)

    def kappa(self, X, fd: FDConfig | None = None) -> np.ndarray:
        a, b = self.div_pair(X, fd)
        return np.hypot(a, b)

    def principal(self, X, fd: FDConfig | None = None) -> np.ndarray:
        """Unit section with ``div_E(J xi) = 0`` and ``div_E xi = kappa > 0``."""
        X = np.asarray(X, dtype=float)
        a, b = self.div_pair(X, fd)
        k = np.hypot(a, b)
        if np.any(k < self.kappa_threshold):
            raise PrincipalUndefined(f"kappa = {np.min(k):.3e} below threshold {self.kappa_threshold:g}")
        _, u, Ju = self.frame(X)
        return (a / k)[..., None] * u + (b / k)[..., None] * Ju

    def J_principal(self, X, fd: FDConfig | None = None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.einsum("...ij,...j->...i", self.J(X), self.principal(X, fd))

    # -- conformal factor --
    def conformal(self, V: Callable, X, fd: FDConfig | None = None):
        """``alpha(V) = tr_E(L_V g) / 2(n-1)`` and the residual ``|L_V g - alpha(V) g|`` on ``E``."""
        fd = self.fd if fd is None else fd
        X = np.asarray(X, dtype=float)
        G, _, P_E = self.projectors(X)
        Ginv = np.linalg.inv(G)
        Lg = lie_derivative_metric_array(self.metric, V, X, fd)
        trace = np.einsum("...ij,...ik,...kj->...", Lg, P_E, Ginv)
        a = trace / (2 * (self.n - 1))
        B = Lg - a[..., None, None] * G
        BE = np.einsum("...ai,...ab,...bj->...ij", P_E, B, P_E)
        return a, _bilinear_norm(BE, Ginv)

    def alpha_form(self, X, fd: FDConfig | None = None) -> np.ndarray:
        """The 1-form ``alpha`` (vanishing on E) from its values on the frame ``u, Ju``."""
        X = np.asarray(X, dtype=float)
        G, u, Ju = self.frame(X)
        au, _ = self.conformal(self.unit_u, X, fd)
        aJ, _ = self.conformal(self.Ju, X, fd)
        return au[..., None] * np.einsum("...ij,...j->...i", G, u) + aJ[..., None] * np.einsum("...ij,...j->...i", G, Ju)

    def alpha_norm(self, X, fd: FDConfig | None = None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return _covector_norm(self.alpha_form(X, fd), np.linalg.inv(self.metric(X)))

    # -- principal-section calculus --
    def eta(self, X, fd: FDConfig | None = None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.einsum("...ij,...j->...i", self.metric(X), self.principal(X, fd))

    def J_eta(self, X, fd: FDConfig | None = None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.einsum("...ij,...j->...i", self.metric(X), self.J_principal(X, fd))

    def p_star(self, X, fd: FDConfig | None = None) -> np.ndarray:
        """``p* = g(nabla_{J xi} J xi, xi)``."""
        fd = self.fd if fd is None else fd
        X = np.asarray(X, dtype=float)
        G = self.metric(X)
        xi = self.principal(X, fd)
        Jxi = self.J_principal(X, fd)
        nJxi = covariant_derivative_array(self.metric, lambda Y: self.J_principal(Y, fd), ("u",), X, fd.nested(1))
        acc = np.einsum("...am,...m->...a", nJxi, Jxi)
        return np.einsum("...a,...ab,...b->...", acc, G, xi)

    # -- structural checks --
    def holomorphy_residual(self, X, frame_fields=None, fd: FDConfig | None = None) -> np.ndarray:
        """``|P_E [nabla V, J]|`` over ``V`` in the given frame of the distribution.

        ``frame_fields`` defaults to ``(u, Ju)``; passing two other fields tests a
        different (possibly non-J-invariant) distribution, whose complement is
        then used for ``E``.
        """
        fd = self.fd if fd is None else fd
        X = np.asarray(X, dtype=float)
        G = self.metric(X)
        Ginv = np.linalg.inv(G)
        if frame_fields is None:
            fields = (self.unit_u, self.Ju)
            _, _, P_E = self.projectors(X)
        else:
            fields = frame_fields
            P_E = _complement_projector(G, [np.asarray(F(X), dtype=float) for F in fields])
        Jx = self.J(X)
        worst = np.zeros(X.shape[:-1])
        for V in fields:
            A = covariant_derivative_array(self.metric, V, ("u",), X, fd)  # A^a_m
            comm = np.einsum("...am,...mk->...ak", A, Jx) - np.einsum("...am,...mk->...ak", Jx, A)
            out = np.einsum("...ba,...ak->...bk", P_E, comm)
            # g-norm of the (1,1) tensor
            low = np.einsum("...ab,...bk->...ak", G, out)
            worst = np.maximum(worst, _bilinear_norm(low, Ginv))
        return worst

    def second_fundamental_residual(self, X, fd: FDConfig | None = None) -> np.ndarray:
        """Largest ``|P_E nabla_V W|`` for ``V, W`` in the frame ``u, Ju``: zero iff Delta is totally geodesic."""
        fd = self.fd if fd is None else fd
        X = np.asarray(X, dtype=float)
        G, u, Ju = self.frame(X)
        _, _, P_E = self.projectors(X)
        worst = np.zeros(X.shape[:-1])
        for W in (self.unit_u, self.Ju):
            nW = covariant_derivative_array(self.metric, W, ("u",), X, fd)
            for V in (u, Ju):
                v = np.einsum("...am,...m->...a", nW, V)
                worst = np.maximum(worst, _vector_norm(np.einsum("...ab,...b->...a", P_E, v), G))
        return worst


def _complement_projector(G, vectors):
    """``P_E`` for ``E`` the g-orthogonal complement of ``span(vectors)`` (batched)."""
    basis = []
    for v in vectors:
        w = v.copy()
        for e in basis:
            w = w - np.einsum("...i,...ij,...j->...", e, G, w)[..., None] * e
        basis.append(w / _vector_norm(w, G)[..., None])
    P = np.zeros(G.shape)
    for e in basis:
        P = P + np.einsum("...i,...j,...jk->...ik", e, e, G)
    return np.eye(G.shape[-1]) - P


def warped_foliation(wb: WarpedBundleMetric, fd: FDConfig = DEFAULT_FD, rotation: Callable | None = None) -> FoliationData:
    """``Delta = span{H, xi}`` on a warped bundle; ``rotation(X)`` optionally rotates the input frame."""
    J = total_complex_structure(wb)
    if rotation is None:
        u = wb.H
    else:
        def u(X):
            X = np.asarray(X, dtype=float)
            phi = rotation(X)[..., None]
            return np.cos(phi) * wb.H(X) + np.sin(phi) * wb.xi_unit(X)
    return FoliationData(wb.metric, J, u, wb.n, fd)


# -- homothetic-foliation suite ------------------------------------------------------------------


@dataclass
class FoliationInvariants:
    kappa: np.ndarray
    alpha: np.ndarray
    alpha_norm: np.ndarray
    p_star: np.ndarray
    principal: np.ndarray
    extras: dict = field(default_factory=dict)


def invariants(fol: FoliationData, X) -> FoliationInvariants:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return FoliationInvariants(
        kappa=fol.kappa(X),
        alpha=fol.alpha_form(X),
        alpha_norm=fol.alpha_norm(X),
        p_star=fol.p_star(X),
        principal=fol.principal(X),
    )


def verify_homothetic_identities(fol: FoliationData, samples, tol: float = C.TOL_FOLIATION, rep: VerificationReport | None = None) -> VerificationReport:
    """Residual rows for the homothetic-foliation identities and their prerequisites."""
    rep = VerificationReport(name="foliation") if rep is None else rep
    fd = fol.fd
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    G = fol.metric(X)
    Ginv = np.linalg.inv(G)
    n = fol.n

    # prerequisites, defined everywhere
    hol = fol.holomorphy_residual(X)
    sff = fol.second_fundamental_residual(X)
    au, ru = fol.conformal(fol.unit_u, X)
    aJ, rJ = fol.conformal(fol.Ju, X)
    dalpha = exterior_derivative_array(lambda Y: fol.alpha_form(Y, fd), X, fd.nested(1))
    dalpha_n = _bilinear_norm(dalpha, Ginv)
    kappa = fol.kappa(X)
    anorm = _covector_norm(fol.alpha_form(X), Ginv)
    for i in range(X.shape[0]):
        rep.add("foliation.holomorphic", "g(AJY,Z) = g(JAY,Z)", hol[i], tol, i)
        rep.add("foliation.totally_geodesic", "P_E nabla_V W = 0 on Delta", sff[i], tol, i)
        rep.add("foliation.conformal", "L_V g = alpha(V) g on E", max(ru[i], rJ[i]), tol, i)
        rep.add("foliation.homothetic", "d alpha = 0", dalpha_n[i], tol, i)

    defined = kappa >= fol.kappa_threshold
    for i in np.flatnonzero(~defined):
        rep.add("foliation.kappa_vanishes", "kappa = 0: principal section undefined", kappa[i], np.inf, int(i),
                numeric=kappa[i], informational=True)
    if not np.any(defined):
        rep.notes.append("note: kappa vanishes at every sample; alpha = 0 branch")
        for i in range(X.shape[0]):
            rep.add("foliation.alpha_zero", "alpha = 0", anorm[i], tol, i, closed_form=0.0, numeric=anorm[i])
        return rep

    Xd = X[defined]
    idx = np.flatnonzero(defined)
    Gd, Gid = G[defined], Ginv[defined]
    xi = fol.principal(Xd)
    Jxi = fol.J_principal(Xd)
    eta = np.einsum("...ij,...j->...i", Gd, xi)
    Jeta = np.einsum("...ij,...j->...i", Gd, Jxi)
    a_norm = anorm[defined]
    pstar = fol.p_star(Xd)
    nfd = fd.nested(1)

    d_eta = exterior_derivative_array(lambda Y: fol.eta(Y, fd), Xd, nfd)
    n_xi = covariant_derivative_array(fol.metric, lambda Y: fol.principal(Y, fd), ("u",), Xd, nfd)
    nab_xi_xi = np.einsum("...am,...m->...a", n_xi, xi)
    dln = exterior_derivative_array(lambda Y: np.log(fol.alpha_norm(Y, fd)), Xd, nfd)
    law = dln + (a_norm + pstar)[..., None] * eta
    dp = exterior_derivative_array(lambda Y: fol.p_star(Y, fd), Xd, fd.nested(2))
    dp_eta = dp[..., :, None] * eta[..., None, :] - eta[..., :, None] * dp[..., None, :]
    n_eta = covariant_derivative_array(fol.metric, lambda Y: fol.eta(Y, fd), ("d",), Xd, nfd)  # [y, x]
    _, _, P_E = fol.projectors(Xd)
    m_form = np.einsum("...ai,...ab,...bj->...ij", P_E, Gd, P_E)
    model = 0.5 * a_norm[..., None, None] * m_form - pstar[..., None, None] * Jeta[..., :, None] * Jeta[..., None, :]
    nab_eta_res = _bilinear_norm(np.swapaxes(n_eta, -1, -2) - model, Gid)
    div_J = fol.div_E(lambda Y: fol.J_principal(Y, fd), Xd, nfd)
    div_xi = fol.div_E(lambda Y: fol.principal(Y, fd), Xd, nfd)

    for k, i in enumerate(idx):
        i = int(i)
        rep.add("homothetic.d_eta", "d eta = 0", _bilinear_norm(d_eta[k], Gid[k]), tol, i)
        rep.add("homothetic.nabla_xi_xi", "nabla_xi xi = 0", _vector_norm(nab_xi_xi[k], Gd[k]), tol, i)
        rep.add("homothetic.dln_alpha", "d ln|alpha| = -(|alpha| + p*) eta", _covector_norm(law[k], Gid[k]), tol, i)
        rep.add("homothetic.dp_wedge_eta", "dp* ^ eta = 0", _bilinear_norm(dp_eta[k], Gid[k]), tol, i)
        rep.add("homothetic.nabla_eta", "nabla eta = |alpha|/2 m - p* Jeta Jeta", nab_eta_res[k], tol, i)
        rep.compare("foliation.kappa_alpha", "kappa = (n-1)|alpha|", kappa[i], (n - 1) * a_norm[k],
                    C.TOL_KAPPA_REL, scale=C.KAPPA_THRESHOLD, sample=i)
        rep.add("foliation.principal_divJ", "div_E J xi = 0", abs(div_J[k]), tol, i, closed_form=0.0, numeric=div_J[k])
        rep.compare("foliation.principal_div", "div_E xi = kappa", div_xi[k], kappa[i], tol, sample=i)
    return rep


def verify_warped_foliation(wb: WarpedBundleMetric, samples, fd: FDConfig = DEFAULT_FD,
                            tol: float = C.TOL_FOLIATION) -> VerificationReport:
    """Homothetic-foliation suite plus the closed forms of the warped construction."""
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    wb.require_sample(X)
    fol = warped_foliation(wb, fd)
    rep = verify_homothetic_identities(fol, X, tol)
    p = wb.profile
    t = X[:, 0]
    r, dr, f, df = p.r(t), p.dr(t), p.f(t), p.df(t)
    if wb.s == 0:
        return rep
    n = wb.n
    divH = fol.div_E(wb.H, X)
    divxi = fol.div_E(wb.xi_unit, X)
    aH, _ = fol.conformal(wb.H, X)
    pstar = fol.p_star(X)
    xi = fol.principal(X)
    G = wb.metric(X)
    align = np.abs(np.einsum("...i,...ij,...j->...", xi, G, wb.H(X)))
    for i in range(X.shape[0]):
        rep.compare("warped.div_H", "div_E H = 2(n-1) r'/r", divH[i], 2 * (n - 1) * dr[i] / r[i], tol, sample=i)
        rep.add("warped.div_xi", "div_E xi/f = 0", abs(divxi[i]), tol, i, closed_form=0.0, numeric=divxi[i])
        rep.compare("warped.alpha_H", "alpha(H) = 2 r'/r", aH[i], 2 * dr[i] / r[i], tol, sample=i)
        rep.compare("warped.p_star", "p* = -f'/f", pstar[i], -df[i] / f[i], C.TOL_EVENNESS, sample=i)
        rep.add("warped.principal_is_H", "principal section = H", abs(align[i] - 1.0), C.TOL_EVENNESS, i)
    return rep


# -- Jacobi decay experiment -----------------------------------------------------------------------


@dataclass(frozen=True)
class DecayTrace:
    path: GeodesicPath
    norm: np.ndarray  # |C(t)|
    tangential: np.ndarray  # g(c', C)
    t0: float
    t_stop: float

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.path.t

    def ratio(self) -> np.ndarray:
        return self.norm / self.norm[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "norm_C", "g_dc_C"])
        for row in zip(self.t, self.norm, self.tangential):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def jacobi_decay_experiment(wb: WarpedBundleMetric, t0: float | None = None, psi0: float = 0.0, x0=None,
                            t_stop: float | None = None, h_step: float = C.GEODESIC_STEP,
                            fd: FDConfig = DEFAULT_FD) -> DecayTrace:
    """Integrate the special Jacobi field along ``c(t) = (t, psi0, x0)`` toward ``t = L``.

    ``C(0) = f J xi`` (the fiber field) and ``nabla_c' C(0) = nabla_c' (f J xi)``.
    """
    L = wb.L
    t0 = 0.5 * L if t0 is None else float(t0)
    t_stop = wb.t_interval[1] if t_stop is None else float(t_stop)
    x0 = np.zeros(wb.base.dim) if x0 is None else np.asarray(x0, dtype=float)
    start = np.concatenate([[t0, psi0], x0])
    v0 = wb.H(start)
    J = total_complex_structure(wb)

    def special(X):
        X = np.asarray(X, dtype=float)
        f = wb.profile.f(X[..., 0])[..., None]
        return f * np.einsum("...ij,...j->...i", J(X), wb.H(X))

    C0 = special(start)
    DC0 = covariant_derivative_array(wb.metric, special, ("u",), start, fd) @ v0
    path = jacobi_integrate(wb.metric, start, v0, C0, DC0, t_stop - t0, h_step, fd)
    return DecayTrace(path, path.jacobi_norm(wb.metric), path.jacobi_tangential(wb.metric), t0, t_stop)


def decay_report(trace: DecayTrace, threshold: float = 1e-3, tangential_tol: float = 1e-8) -> VerificationReport:
    """Decay below ``threshold * |C(0)|`` before the stop point and constant ``g(c', C)``."""
    rep = VerificationReport(name="jacobi")
    ratio = trace.ratio()
    rep.add("jacobi.decay", "|C(t)| < 1e-3 |C(0)| before L - margin", float(ratio.min()), threshold,
            numeric=float(ratio.min()))
    rep.add("jacobi.monotone", "|C| decreasing toward L", float(max(np.diff(trace.norm).max(), 0.0)), 1e-12)
    tang = trace.tangential
    rep.add("jacobi.tangential", "g(c', C) constant", float(np.abs(tang - tang[0]).max()), tangential_tol)
    rep.add("jacobi.truncated", "path stays in chart", float(trace.path.truncated), C.INDICATOR_TOL)
    return rep
