"""Model Hodge bases: flat tori, Fubini-Study charts and their products.

Base coordinates are interleaved real parts and imaginary parts,
``(x1, y1, x2, y2, ...)``, with ``J d/dx_j = d/dy_j``. The Kähler form is
``Omega(X, Y) = h(JX, Y)``, and 2-form components follow
``(d w)_ij = d_i w_j - d_j w_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import constants as C
from .report import VerificationReport
from .tensor import (
    DEFAULT_FD,
    ChartBox,
    ChartMetric,
    FDConfig,
    covariant_derivative_array,
    curvature_at,
    exterior_derivative_array,
    jacobian,
)


def standard_complex_structure(m: int) -> np.ndarray:
    """Matrix ``J[i, j] = dx^i(J d_j)`` for interleaved coordinates."""
    J = np.zeros((2 * m, 2 * m))
    for j in range(m):
        J[2 * j + 1, 2 * j] = 1.0
        J[2 * j, 2 * j + 1] = -1.0
    return J


def _broadcast_const(M: np.ndarray):
    def field_(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(M, x.shape[:-1] + M.shape).copy()

    return field_


@dataclass(frozen=True)
class BaseManifold:
    """Kähler base ``(N, h, J_N)`` on a coordinate box.

    ``A`` is a fixed local primitive of the Kähler form. For Einstein bases
    ``einstein_constant`` is the factor ``c`` in ``rho_0 = c h``. ``blocks``
    lists index ranges and Einstein constants of product factors, which is
    what the Ricci eigenvalue count of the total space depends on.
    """

    name: str
    m: int
    metric: ChartMetric
    J: Callable[[np.ndarray], np.ndarray]
    A: Callable[[np.ndarray], np.ndarray]
    einstein: bool
    einstein_constant: float | None = None
    blocks: tuple[tuple[int, int, float], ...] = ()
    hodge_note: str = "integrality of s*Omega/2pi not enforced on local charts"
    params: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return 2 * self.m

    @property
    def box(self) -> ChartBox:
        return self.metric.box

    @property
    def flagged(self) -> bool:
        """Real surfaces lie outside the main constructions (dim N > 2 assumed there)."""
        return self.m == 1

    def h(self, x) -> np.ndarray:
        return self.metric(x)

    def omega(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        # Omega_ab = h(J e_a, e_b) = J^c_a h_cb
        return np.einsum("...ca,...cb->...ab", self.J(x), self.metric(x))

    def known_ricci(self, x) -> np.ndarray | None:
        if not self.blocks:
            return None
        x = np.asarray(x, dtype=float)
        H = self.metric(x)
        R = np.zeros_like(H)
        for lo, hi, c in self.blocks:
            R[..., lo:hi, lo:hi] = c * H[..., lo:hi, lo:hi]
        return R

    def ricci_eigenvalues(self) -> tuple[float, ...]:
        """Distinct Einstein constants of the factors (the ``k`` base eigenvalues)."""
        vals: list[float] = []
        for _, _, c in self.blocks:
            if all(abs(c - v) > C.EIGEN_CLUSTER_GAP for v in vals):
                vals.append(c)
        return tuple(sorted(vals))

    def sample(self, rng: np.random.Generator, n: int, margin: float = C.BOUNDARY_MARGIN) -> np.ndarray:
        return self.box.sample(rng, n, margin)


def flat_torus(m: int, half_width: float = 1.0) -> BaseManifold:
    """Euclidean chart of a flat complex torus with ``A = 1/2 sum(x dy - y dx)``."""
    if m < 1:
        raise ValueError("complex dimension must be at least 1")
    d = 2 * m
    box = ChartBox.cube(d, half_width)

    def h(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(d), x.shape[:-1] + (d, d)).copy()

    def A(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[..., 0::2] = -0.5 * x[..., 1::2]
        out[..., 1::2] = 0.5 * x[..., 0::2]
        return out

    return BaseManifold(
        name=f"flat{m}",
        m=m,
        metric=ChartMetric(d, h, box, name=f"flat{m}"),
        J=_broadcast_const(standard_complex_structure(m)),
        A=A,
        einstein=True,
        einstein_constant=0.0,
        blocks=((0, d, 0.0),),
        params={"family": "flat", "m": m},
    )


def fubini_study(m: int, scale: float = 1.0, half_width: float = 1.0) -> BaseManifold:
    """Affine chart of CP^m with Kähler potential ``scale * log(1 + |z|^2)``.

    With ``G_jk = scale (delta_jk / w - conj(z_j) z_k / w^2)``, ``w = 1 + |z|^2``,
    the real metric is ``h(dx_j, dx_k) = h(dy_j, dy_k) = Re G_jk`` and
    ``h(dx_j, dy_k) = -h(dy_j, dx_k) = Im G_jk``. The Ricci tensor is
    ``2(m+1)/scale * h``.
    """
    if m < 1:
        raise ValueError("complex dimension must be at least 1")
    if scale <= 0:
        raise ValueError("Fubini-Study scale must be positive")
    d = 2 * m
    box = ChartBox.cube(d, half_width)
    c = float(scale)

    def h(x):
        x = np.asarray(x, dtype=float)
        z = x[..., 0::2] + 1j * x[..., 1::2]
        w = 1.0 + np.sum(np.abs(z) ** 2, axis=-1)
        G = c * (np.eye(m) / w[..., None, None] - np.conj(z)[..., :, None] * z[..., None, :] / (w**2)[..., None, None])
        out = np.empty(x.shape[:-1] + (d, d))
        out[..., 0::2, 0::2] = G.real
        out[..., 1::2, 1::2] = G.real
        out[..., 0::2, 1::2] = G.imag
        out[..., 1::2, 0::2] = -G.imag
        return out

    def A(x):
        x = np.asarray(x, dtype=float)
        w = 1.0 + np.sum(x**2, axis=-1, keepdims=True)
        out = np.empty_like(x)
        out[..., 0::2] = -0.5 * c * x[..., 1::2] / w
        out[..., 1::2] = 0.5 * c * x[..., 0::2] / w
        return out

    k = 2.0 * (m + 1) / c
    return BaseManifold(
        name=f"fs{m}(scale={c:g})",
        m=m,
        metric=ChartMetric(d, h, box, name=f"fs{m}"),
        J=_broadcast_const(standard_complex_structure(m)),
        A=A,
        einstein=True,
        einstein_constant=k,
        blocks=((0, d, k),),
        params={"family": "fubini-study", "m": m, "scale": c},
    )


def product(b1: BaseManifold, b2: BaseManifold) -> BaseManifold:
    """Riemannian and complex product; coordinates of ``b1`` come first."""
    d1, d2 = b1.dim, b2.dim
    d = d1 + d2
    box = b1.box.product(b2.box)

    def split(x):
        x = np.asarray(x, dtype=float)
        return x[..., :d1], x[..., d1:]

    def blockdiag(f1, f2):
        def field_(x):
            x1, x2 = split(x)
            M1, M2 = f1(x1), f2(x2)
            out = np.zeros(np.asarray(x).shape[:-1] + (d, d))
            out[..., :d1, :d1] = M1
            out[..., d1:, d1:] = M2
            return out

        return field_

    def A(x):
        x1, x2 = split(x)
        return np.concatenate([b1.A(x1), b2.A(x2)], axis=-1)

    blocks = tuple(b1.blocks) + tuple((lo + d1, hi + d1, c) for lo, hi, c in b2.blocks)
    einstein = (
        b1.einstein
        and b2.einstein
        and b1.einstein_constant is not None
        and b2.einstein_constant is not None
        and abs(b1.einstein_constant - b2.einstein_constant) <= C.EIGEN_CLUSTER_GAP
    )
    name = f"{b1.name}x{b2.name}"
    return BaseManifold(
        name=name,
        m=b1.m + b2.m,
        metric=ChartMetric(d, blockdiag(lambda y: b1.metric.components(y), lambda y: b2.metric.components(y)), box, name=name),
        J=blockdiag(b1.J, b2.J),
        A=A,
        einstein=einstein,
        einstein_constant=b1.einstein_constant if einstein else None,
        blocks=blocks if (b1.blocks and b2.blocks) else (),
        params={"family": "product", "factors": [b1.params, b2.params]},
    )


def with_gauge(base: BaseManifold, chi: Callable, dchi: Callable | None = None, fd: FDConfig = DEFAULT_FD) -> BaseManifold:
    """Same base with primitive ``A + d chi``; the Kähler form is unchanged."""
    if dchi is None:
        def dchi(x):
            return jacobian(chi, x, fd)

    def A(x):
        return base.A(x) + dchi(x)

    return replace(base, A=A, name=base.name + "+dchi")


# -- verification helpers ------------------------------------------------------------------------


def einstein_constant_numeric(base: BaseManifold, x, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``tr_h rho_0 / 2m`` at the points ``x`` from the numeric Ricci tensor."""
    curv = curvature_at(base.metric, np.asarray(x, dtype=float), fd)
    return np.einsum("...ij,...ij->...", np.linalg.inv(curv.G), curv.Ric) / base.dim


def verify_base(base: BaseManifold, samples, fd: FDConfig = DEFAULT_FD, tol: float = C.TOL_BASE) -> VerificationReport:
    """J^2 = -Id, compatibility, parallel J, closed Omega, dA = Omega and the Ricci form."""
    rep = VerificationReport(name=f"base:{base.name}")
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    d = base.dim
    H = base.metric(samples)
    Jx = base.J(samples)
    Om = base.omega(samples)
    nablaJ = covariant_derivative_array(base.metric, base.J, ("u", "d"), samples, fd)
    dOm = exterior_derivative_array(base.omega, samples, fd)
    dA = exterior_derivative_array(base.A, samples, fd)
    curv = curvature_at(base.metric, samples, fd)
    known = base.known_ricci(samples)
    for i in range(samples.shape[0]):
        Hi = H[i]
        Li = np.linalg.cholesky(Hi)
        scale = np.linalg.norm(Hi)
        rep.add("base.spd", "metric positive definite", max(0.0, C.MIN_METRIC_EIGENVALUE - np.linalg.eigvalsh(Hi)[0]), tol, i)
        rep.add("base.J_squared", "J^2 = -Id", np.abs(Jx[i] @ Jx[i] + np.eye(d)).max(), tol, i)
        rep.add("base.J_compatible", "h(J.,J.) = h", np.abs(Jx[i].T @ Hi @ Jx[i] - Hi).max() / scale, tol, i)
        # frame norm of nabla J: raise/lower via the Cholesky factor
        Linv = np.linalg.inv(Li)
        nJ = np.einsum("ai,ijk,jb,kc->abc", Li.T, nablaJ[i], Linv.T, Linv.T)
        rep.add("base.nabla_J", "nabla J = 0", np.linalg.norm(nJ), tol, i)
        rep.add("base.d_omega", "d Omega = 0", np.abs(dOm[i]).max() / scale, tol, i)
        rep.add("base.dA_omega", "dA = Omega", np.abs(dA[i] - Om[i]).max() / scale, tol, i)
        if known is not None:
            rscale = max(np.abs(known[i]).max(), scale)
            rep.add("base.ricci_known", "rho_0 = c h", np.abs(curv.Ric[i] - known[i]).max() / rscale, tol, i)
        if base.einstein:
            c = np.einsum("ij,ij->", np.linalg.inv(Hi), curv.Ric[i]) / d
            rep.add("base.einstein", "rho_0 - (tr rho_0 / 2m) h = 0", np.abs(curv.Ric[i] - c * Hi).max() / max(abs(c), 1.0) / scale, tol, i)
    if base.flagged:
        rep.notes.append(f"note: base {base.name} is a real surface; bundle theorems assume dim N > 2")
    return rep
