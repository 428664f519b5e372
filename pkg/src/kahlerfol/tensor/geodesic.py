"""Fixed-step RK4 integration of geodesics and Jacobi fields in a chart.

Jacobi fields are integrated as the linearization of the geodesic equation,

    C''^k = -d_l Gamma^k_ij C^l v^i v^j - 2 Gamma^k_ij v^i C'^j,

which is the coordinate form of nabla_c' nabla_c' C = R(c', C) c'.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import constants as C
from .curvature import christoffel_derivative, christoffel_from_jet, curvature_at, metric_jet
from .fd import DEFAULT_FD, FDConfig
from .metric import ChartMetric, DegeneracyError, DomainError


@dataclass(frozen=True)
class GeodesicPath:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    truncated: bool
    C: np.ndarray | None = None
    dC: np.ndarray | None = None  # coordinate derivative dC/dt

    def speed_sq(self, g: ChartMetric) -> np.ndarray:
        return np.einsum("ni,nij,nj->n", self.v, g(self.x), self.v)

    def jacobi_norm(self, g: ChartMetric) -> np.ndarray:
        G = g(self.x)
        return np.sqrt(np.einsum("ni,nij,nj->n", self.C, G, self.C))

    def jacobi_tangential(self, g: ChartMetric) -> np.ndarray:
        """g(c', C) along the path."""
        return np.einsum("ni,nij,nj->n", self.v, g(self.x), self.C)


def _geodesic_rhs(g, fd, state):
    d = state.size // 2
    x, v = state[:d], state[d:]
    G, dG = metric_jet(g, x, fd)
    Gam = christoffel_from_jet(G, dG)
    return np.concatenate([v, -np.einsum("kij,i,j->k", Gam, v, v)])


def _jacobi_rhs(g, fd, state):
    d = state.size // 4
    x, v, c, dc = (state[i * d:(i + 1) * d] for i in range(4))
    G, dG, ddG = metric_jet(g, x, fd, order=2)
    Gam = christoffel_from_jet(G, dG)
    dGam = christoffel_derivative(G, dG, ddG)
    a = -np.einsum("kij,i,j->k", Gam, v, v)
    ddc = -np.einsum("kijl,l,i,j->k", dGam, c, v, v) - 2.0 * np.einsum("kij,i,j->k", Gam, v, dc)
    return np.concatenate([v, a, dc, ddc])


def _rk4(rhs, y0, t0, t_end, h):
    n = int(np.ceil((t_end - t0) / h - 1e-12))
    n = max(n, 1)
    h = (t_end - t0) / n
    ts = [t0]
    ys = [np.asarray(y0, dtype=float)]
    truncated = False
    y = ys[0]
    for i in range(n):
        try:
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * h * k1)
            k3 = rhs(y + 0.5 * h * k2)
            k4 = rhs(y + h * k3)
        except (DomainError, DegeneracyError):
            truncated = True
            break
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        ts.append(t0 + (i + 1) * h)
        ys.append(y)
    return np.array(ts), np.array(ys), truncated


def geodesic_integrate(
    g: ChartMetric,
    x0,
    v0,
    t_end: float,
    h_step: float = C.GEODESIC_STEP,
    fd: FDConfig = DEFAULT_FD,
    speed_tol: float = 1e-10,
) -> GeodesicPath:
    """Integrate a unit-speed geodesic from ``x0`` with initial velocity ``v0``.

    If the path (or a stencil around it) leaves the chart, integration stops and
    the returned path carries ``truncated=True``.
    """
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    speed = float(v0 @ g(x0) @ v0)
    if abs(speed - 1.0) > speed_tol:
        raise ValueError(f"geodesic initial velocity must be unit, got |v|^2 = {speed:.6g}")
    d = x0.size
    ts, ys, truncated = _rk4(lambda y: _geodesic_rhs(g, fd, y), np.concatenate([x0, v0]), 0.0, t_end, h_step)
    return GeodesicPath(t=ts, x=ys[:, :d], v=ys[:, d:], truncated=truncated)


def jacobi_integrate(
    g: ChartMetric,
    x0,
    v0,
    C0,
    DC0,
    t_end: float,
    h_step: float = C.GEODESIC_STEP,
    fd: FDConfig = DEFAULT_FD,
    speed_tol: float = 1e-10,
) -> GeodesicPath:
    """Jacobi field along the geodesic through ``(x0, v0)``.

    ``C0`` is the initial field and ``DC0`` its initial covariant derivative
    ``nabla_c' C(0)``.
    """
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    C0 = np.asarray(C0, dtype=float)
    speed = float(v0 @ g(x0) @ v0)
    if abs(speed - 1.0) > speed_tol:
        raise ValueError(f"geodesic initial velocity must be unit, got |v|^2 = {speed:.6g}")
    G, dG = metric_jet(g, x0, fd)
    Gam = christoffel_from_jet(G, dG)
    dC0 = np.asarray(DC0, dtype=float) - np.einsum("kij,i,j->k", Gam, v0, C0)
    d = x0.size
    y0 = np.concatenate([x0, v0, C0, dC0])
    ts, ys, truncated = _rk4(lambda y: _jacobi_rhs(g, fd, y), y0, 0.0, t_end, h_step)
    return GeodesicPath(
        t=ts, x=ys[:, :d], v=ys[:, d:2 * d], C=ys[:, 2 * d:3 * d], dC=ys[:, 3 * d:], truncated=truncated
    )


def jacobi_residual(g: ChartMetric, x, v, c, dc, fd: FDConfig = DEFAULT_FD) -> float:
    """g-norm of nabla^2 C - R(c', C) c' at one node of an integrated Jacobi field."""
    x = np.asarray(x, dtype=float)
    G, dG, ddG = metric_jet(g, x, fd, order=2)
    Gam = christoffel_from_jet(G, dG)
    dGam = christoffel_derivative(G, dG, ddG)
    a = -np.einsum("kij,i,j->k", Gam, v, v)
    ddc = -np.einsum("kijl,l,i,j->k", dGam, c, v, v) - 2.0 * np.einsum("kij,i,j->k", Gam, v, dc)
    W = dc + np.einsum("kij,i,j->k", Gam, v, c)
    nabla2 = (
        ddc
        + np.einsum("kijl,l,i,j->k", dGam, v, v, c)
        + np.einsum("kij,i,j->k", Gam, a, c)
        + np.einsum("kij,i,j->k", Gam, v, dc)
        + np.einsum("kij,i,j->k", Gam, v, W)
    )
    Rup = curvature_at(g, x, fd).Rup
    Rvcv = np.einsum("lijk,i,j,k->l", Rup, v, c, v)
    r = nabla2 - Rvcv
    return float(np.sqrt(max(r @ G @ r, 0.0)))
