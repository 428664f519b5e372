"""Levi-Civita connection and curvature from finite-difference metric jets.

Sign convention (fixed): R(u,v)w = nabla_u nabla_v w - nabla_v nabla_u w - nabla_[u,v] w,
R(X,Y,Z,W) = g(R(X,Y)Z, W) and K(E,F) = R(E,F,F,E) / |E ^ F|^2. With this
convention the unit round sphere has K = +1 and Ric = (dim-1) g.

Index layouts of the raw arrays:

* ``dG[..., i, j, k] = d_k g_ij``, ``ddG[..., i, j, k, l] = d_k d_l g_ij``
* ``Gam[..., k, i, j] = Gamma^k_ij``, ``dGam[..., k, i, j, m] = d_m Gamma^k_ij``
* ``Rup[..., l, i, j, k] = R^l_ijk`` with ``R(d_i, d_j) d_k = R^l_ijk d_l``
* ``Riem[..., i, j, k, l] = R(d_i, d_j, d_k, d_l)``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import constants as C
from .fd import DEFAULT_FD, FDConfig, derivative, second_derivative
from .metric import ChartMetric, DegeneracyError

SIGN_CONVENTION = "R(u,v)w = nabla_u nabla_v w - nabla_v nabla_u w - nabla_[u,v] w"


@dataclass(frozen=True)
class TensorValue:
    """Dense component table at a base point.

    ``signature`` holds one flag per axis: ``"u"`` (contravariant) or ``"d"``
    (covariant). Calling a tensor with vectors contracts its leading covariant
    slots.
    """

    components: np.ndarray
    signature: tuple[str, ...]
    basepoint: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        if comps.ndim != len(self.signature):
            raise ValueError("signature length must equal tensor rank")
        if any(s not in ("u", "d") for s in self.signature):
            raise ValueError("signature flags are 'u' or 'd'")
        d = np.asarray(self.basepoint).shape[-1]
        if any(n != d for n in comps.shape):
            raise ValueError("every tensor axis must have extent equal to the chart dimension")
        object.__setattr__(self, "components", comps)

    def __array__(self, dtype=None, copy=None):
        return self.components if dtype is None else self.components.astype(dtype)

    @property
    def rank(self) -> int:
        return self.components.ndim

    def __call__(self, *vectors) -> np.ndarray | float:
        if len(vectors) > self.rank or any(s != "d" for s in self.signature[: len(vectors)]):
            raise ValueError("can only feed vectors into leading covariant slots")
        out = self.components
        for v in vectors:
            out = np.tensordot(np.asarray(v, dtype=float), out, axes=([0], [0]))
        return float(out) if out.ndim == 0 else out


def metric_jet(g: ChartMetric, x, fd: FDConfig = DEFAULT_FD, order: int = 1):
    """Metric components and their coordinate derivatives at ``x``.

    Returns ``(G, dG)`` for ``order=1`` and ``(G, dG, ddG)`` for ``order=2``.
    """
    x = np.asarray(x, dtype=float)
    G = g(x)
    dG = derivative(g, x, fd.step, fd.richardson)
    if order == 1:
        return G, dG
    ddG = second_derivative(g, x, fd.step2, fd.richardson)
    return G, dG, ddG


def christoffel_from_jet(G: np.ndarray, dG: np.ndarray) -> np.ndarray:
    Ginv = np.linalg.inv(G)
    # low[l, i, j] = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
    low = 0.5 * (np.swapaxes(dG, -1, -2) + dG - np.moveaxis(dG, -1, -3))
    return np.einsum("...kl,...lij->...kij", Ginv, low)


def christoffel_derivative(G: np.ndarray, dG: np.ndarray, ddG: np.ndarray) -> np.ndarray:
    """``d_m Gamma^k_ij`` assembled analytically from the second jet."""
    Ginv = np.linalg.inv(G)
    low = 0.5 * (np.swapaxes(dG, -1, -2) + dG - np.moveaxis(dG, -1, -3))  # [l,i,j]
    # d_m of low: ddG[a,b,c,m] = d_c d_m g_ab
    # low[l,i,j] = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
    dlow = 0.5 * (
        np.einsum("...ljim->...lijm", ddG) + np.einsum("...lijm->...lijm", ddG) - np.einsum("...ijlm->...lijm", ddG)
    )
    dGinv = -np.einsum("...ka,...abm,...bl->...klm", Ginv, dG, Ginv)
    return np.einsum("...klm,...lij->...kijm", dGinv, low) + np.einsum("...kl,...lijm->...kijm", Ginv, dlow)


def riemann_from_connection(Gam: np.ndarray, dGam: np.ndarray) -> np.ndarray:
    """``R^l_ijk`` from Christoffel symbols and their derivatives."""
    t1 = np.einsum("...ljki->...lijk", dGam)
    t2 = np.swapaxes(t1, -3, -2)
    q1 = np.einsum("...lim,...mjk->...lijk", Gam, Gam)
    q2 = np.swapaxes(q1, -3, -2)
    return t1 - t2 + q1 - q2


@dataclass(frozen=True)
class CurvatureData:
    """Everything curvature-related at one point (or a batch of points)."""

    G: np.ndarray
    Gam: np.ndarray
    Rup: np.ndarray
    Riem: np.ndarray
    Ric: np.ndarray
    scalar: np.ndarray


def curvature_at(g: ChartMetric, x, fd: FDConfig = DEFAULT_FD) -> CurvatureData:
    G, dG, ddG = metric_jet(g, x, fd, order=2)
    Gam = christoffel_from_jet(G, dG)
    dGam = christoffel_derivative(G, dG, ddG)
    Rup = riemann_from_connection(Gam, dGam)
    Riem = np.einsum("...lm,...mijk->...ijkl", G, Rup)
    Ric = np.einsum("...iijk->...jk", Rup)
    Ric = 0.5 * (Ric + np.swapaxes(Ric, -1, -2))
    S = np.einsum("...jk,...jk->...", np.linalg.inv(G), Ric)
    return CurvatureData(G=G, Gam=Gam, Rup=Rup, Riem=Riem, Ric=Ric, scalar=S)


def christoffel_array(g: ChartMetric, x, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    G, dG = metric_jet(g, x, fd)
    return christoffel_from_jet(G, dG)


# -- public operations on a single point -------------------------------------------------------


def christoffel(g: ChartMetric, x, fd: FDConfig = DEFAULT_FD) -> TensorValue:
    x = np.asarray(x, dtype=float)
    return TensorValue(christoffel_array(g, x, fd), ("u", "d", "d"), x)


def riemann(g: ChartMetric, x, fd: FDConfig = DEFAULT_FD) -> TensorValue:
    x = np.asarray(x, dtype=float)
    return TensorValue(curvature_at(g, x, fd).Riem, ("d", "d", "d", "d"), x)


def ricci(g: ChartMetric, x, fd: FDConfig = DEFAULT_FD) -> TensorValue:
    x = np.asarray(x, dtype=float)
    return TensorValue(curvature_at(g, x, fd).Ric, ("d", "d"), x)


def scalar_curvature(g: ChartMetric, x, fd: FDConfig = DEFAULT_FD) -> float:
    return float(curvature_at(g, np.asarray(x, dtype=float), fd).scalar)


def wedge_norm_sq(G: np.ndarray, E, F) -> float:
    E = np.asarray(E, dtype=float)
    F = np.asarray(F, dtype=float)
    return float((E @ G @ E) * (F @ G @ F) - (E @ G @ F) ** 2)


def sectional_from(curv: CurvatureData, E, F) -> float:
    E = np.asarray(E, dtype=float)
    F = np.asarray(F, dtype=float)
    w = wedge_norm_sq(curv.G, E, F)
    scale = (E @ curv.G @ E) * (F @ curv.G @ F)
    if w <= C.MIN_WEDGE_NORM * max(scale, 1.0):
        raise DegeneracyError("sectional curvature requested for a degenerate plane")
    return float(np.einsum("ijkl,i,j,k,l->", curv.Riem, E, F, F, E) / w)


def sectional(g: ChartMetric, x, E, F, fd: FDConfig = DEFAULT_FD) -> float:
    return sectional_from(curvature_at(g, np.asarray(x, dtype=float), fd), E, F)


def bianchi_residuals(Riem: np.ndarray) -> dict[str, float]:
    """Largest violations of the algebraic Riemann symmetries."""
    anti12 = Riem + np.swapaxes(Riem, 0, 1)
    anti34 = Riem + np.swapaxes(Riem, 2, 3)
    pair = Riem - np.transpose(Riem, (2, 3, 0, 1))
    first = Riem + np.transpose(Riem, (1, 2, 0, 3)) + np.transpose(Riem, (2, 0, 1, 3))
    return {
        "antisym_12": float(np.abs(anti12).max()),
        "antisym_34": float(np.abs(anti34).max()),
        "pair": float(np.abs(pair).max()),
        "bianchi_1": float(np.abs(first).max()),
    }
