"""Coordinate metrics on circle bundles over a Kähler base and on their warped sphere-bundle extensions.

Circle bundle chart: ``(psi, x^1..x^2m)`` with ``g = a^2 theta^2 + b^2 p*h``.
Warped chart: ``(t, psi, x^1..x^2m)`` with ``g = dt^2 + f(t)^2 theta^2 + r(t)^2 p*h``.
In both, ``theta = dpsi + s A`` and ``xi = d/dpsi``. The fiber coordinate is
an ordinary real coordinate; the circle is never closed up.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import constants as C
from .bases import BaseManifold
from .profile import Profile
from .report import VerificationReport
from .tensor import (
    DEFAULT_FD,
    ChartBox,
    ChartMetric,
    DegeneracyError,
    DomainError,
    FDConfig,
    covariant_derivative_array,
    exterior_derivative_array,
    lie_derivative_endomorphism_array,
    lie_derivative_metric_array,
    tensor_norm,
)

PSI_HALF_WIDTH = 1.0


def _unit(d: int, i: int, lead=()) -> np.ndarray:
    e = np.zeros(tuple(lead) + (d,))
    e[..., i] = 1.0
    return e


@dataclass(frozen=True)
class CircleBundleMetric:
    """``g = a^2 theta (x) theta + b^2 p*h`` on the chart ``(psi, x)``."""

    base: BaseManifold
    a: float
    b: float
    s: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("a and b must be positive")
        if self.s == 0:
            raise ValueError("s must be nonzero")

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def dim(self) -> int:
        return 1 + self.base.dim

    @property
    def box(self) -> ChartBox:
        return ChartBox(np.array([-PSI_HALF_WIDTH]), np.array([PSI_HALF_WIDTH])).product(self.base.box)

    def theta(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        A = self.base.A(X[..., 1:])
        return np.concatenate([np.ones(X.shape[:-1] + (1,)), self.s * A], axis=-1)

    def components(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        th = self.theta(X)
        d = self.dim
        g = self.a**2 * th[..., :, None] * th[..., None, :]
        g[..., 1:, 1:] += self.b**2 * self.base.metric.components(X[..., 1:])
        return g

    @property
    def metric(self) -> ChartMetric:
        return ChartMetric(self.dim, self.components, self.box, name=f"circle({self.base.name},a={self.a:g},b={self.b:g},s={self.s:g})")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        psi = rng.uniform(-0.5 * PSI_HALF_WIDTH, 0.5 * PSI_HALF_WIDTH, (n, 1))
        return np.concatenate([psi, self.base.sample(rng, n)], axis=-1)

    # vector fields and maps
    def xi(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return _unit(self.dim, 0, X.shape[:-1])

    def project(self, v) -> np.ndarray:
        """Base part ``pi_* v`` of a tangent vector."""
        return np.asarray(v, dtype=float)[..., 1:]

    def lift(self, X, w) -> np.ndarray:
        """Horizontal lift ``w^h = w - s A(w) xi`` of base vectors ``w`` at the points ``X``."""
        X = np.asarray(X, dtype=float)
        w = np.asarray(w, dtype=float)
        A = self.base.A(X[..., 1:])
        c = -self.s * np.einsum("...a,...a->...", A, w)
        return np.concatenate([c[..., None], w], axis=-1)

    def vertical_part(self, X, v) -> np.ndarray:
        th = self.theta(X)
        return np.einsum("...i,...i->...", th, v)[..., None] * self.xi(X)

    def horizontal_part(self, X, v) -> np.ndarray:
        return np.asarray(v, dtype=float) - self.vertical_part(X, v)

    def J_horizontal(self, X) -> np.ndarray:
        """Matrix of ``J~``: zero on xi, ``(J_N pi_* v)^h`` on horizontal vectors."""
        X = np.asarray(X, dtype=float)
        d, dn = self.dim, self.base.dim
        JN = self.base.J(X[..., 1:])
        A = self.base.A(X[..., 1:])
        out = np.zeros(X.shape[:-1] + (d, d))
        out[..., 1:, 1:] = JN
        out[..., 0, 1:] = -self.s * np.einsum("...b,...ba->...a", A, JN)
        return out


def circle_bundle(base: BaseManifold, a: float, b: float, s: float) -> CircleBundleMetric:
    return CircleBundleMetric(base, float(a), float(b), float(s))


@dataclass(frozen=True)
class WarpedBundleMetric:
    """``g = dt^2 + f(t)^2 theta^2 + r(t)^2 p*h`` on the chart ``(t, psi, x)``.

    With ``s = 0`` and ``r`` constant this is the product of a surface of
    revolution with the base.
    """

    base: BaseManifold
    profile: Profile
    s: float
    margin_fraction: float = C.WARP_MARGIN_FRACTION

    def __post_init__(self):
        if abs(self.profile.s - self.s) > 1e-12 * max(abs(self.s), 1.0):
            raise ValueError(f"bundle s={self.s:g} does not match profile s={self.profile.s:g}")

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def n(self) -> int:
        """Complex dimension of the total space."""
        return self.base.m + 1

    @property
    def dim(self) -> int:
        return 2 + self.base.dim

    @property
    def L(self) -> float:
        return self.profile.L

    @property
    def box(self) -> ChartBox:
        fiber = ChartBox(np.array([0.0, -PSI_HALF_WIDTH]), np.array([self.L, PSI_HALF_WIDTH]))
        return fiber.product(self.base.box)

    @property
    def t_interval(self) -> tuple[float, float]:
        return self.margin_fraction * self.L, (1.0 - self.margin_fraction) * self.L

    def require_sample(self, X) -> None:
        X = np.asarray(X, dtype=float)
        lo, hi = self.t_interval
        t = X[..., 0]
        if np.any(t < lo) or np.any(t > hi):
            raise DomainError(f"t-sample outside ({lo:.4g}, {hi:.4g}); tensor checks stay away from t = 0, L")

    def theta(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        A = self.base.A(X[..., 2:])
        lead = X.shape[:-1]
        return np.concatenate([np.zeros(lead + (1,)), np.ones(lead + (1,)), self.s * A], axis=-1)

    def components(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        t = X[..., 0]
        f = self.profile.f(t)
        r = self.profile.r(t)
        th = self.theta(X)
        g = (f**2)[..., None, None] * th[..., :, None] * th[..., None, :]
        g[..., 0, 0] += 1.0
        g[..., 2:, 2:] += (r**2)[..., None, None] * self.base.metric.components(X[..., 2:])
        return g

    @property
    def metric(self) -> ChartMetric:
        return ChartMetric(self.dim, self.components, self.box, name=f"warped({self.base.name},{self.profile.name})")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        lo, hi = self.t_interval
        t = rng.uniform(lo, hi, (n, 1))
        psi = rng.uniform(-0.5 * PSI_HALF_WIDTH, 0.5 * PSI_HALF_WIDTH, (n, 1))
        return np.concatenate([t, psi, self.base.sample(rng, n)], axis=-1)

    def at_t(self, X, t) -> np.ndarray:
        """Copies of the points ``X`` moved to the level ``t``."""
        X = np.array(X, dtype=float)
        X[..., 0] = t
        return X

    # distinguished fields
    def H(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return _unit(self.dim, 0, X.shape[:-1])

    def xi(self, X) -> np.ndarray:
        """The fundamental fiber field ``d/dpsi`` with ``theta(xi) = 1``."""
        X = np.asarray(X, dtype=float)
        return _unit(self.dim, 1, X.shape[:-1])

    def xi_unit(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return self.xi(X) / self.profile.f(X[..., 0])[..., None]

    def tau(self, X) -> np.ndarray:
        """Potential ``r(t)^2 / 2``."""
        X = np.asarray(X, dtype=float)
        return 0.5 * self.profile.r(X[..., 0]) ** 2

    def lift(self, X, w) -> np.ndarray:
        """Horizontal lift of base vectors, ``theta(w^h) = 0``."""
        X = np.asarray(X, dtype=float)
        w = np.asarray(w, dtype=float)
        A = self.base.A(X[..., 2:])
        c = -self.s * np.einsum("...a,...a->...", A, w)
        return np.concatenate([np.zeros(c.shape + (1,)), c[..., None], w], axis=-1)

    def project(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float)[..., 2:]

    def fiber_metric(self, t: float) -> CircleBundleMetric:
        """The circle bundle on the level ``t``: ``a = f(t)``, ``b = r(t)``."""
        return CircleBundleMetric(self.base, float(self.profile.f(t)), float(self.profile.r(t)), self.s)


def warped_bundle(base: BaseManifold, profile: Profile, s: float | None = None) -> WarpedBundleMetric:
    s = profile.s if s is None else float(s)
    if s == 0:
        raise ValueError("warped bundles need s != 0; use product_bundle for s = 0")
    return WarpedBundleMetric(base, profile, s)


def product_bundle(base: BaseManifold, profile: Profile) -> WarpedBundleMetric:
    """Surface of revolution ``dt^2 + f^2 dpsi^2`` times the base (``s = 0``, ``r`` constant)."""
    if profile.s != 0:
        raise ValueError("product bundles use a profile with s = 0")
    return WarpedBundleMetric(base, profile, 0.0)


# -- complex structure ----------------------------------------------------------------------------


@dataclass(frozen=True)
class TotalComplexStructure:
    """``J d_t = xi / f``, ``J xi = -f d_t``, ``J w^h = (J_N w)^h``."""

    bundle: WarpedBundleMetric

    def __call__(self, X) -> np.ndarray:
        wb = self.bundle
        X = np.asarray(X, dtype=float)
        f = wb.profile.f(X[..., 0])
        if np.any(f < C.MIN_WARP):
            raise DegeneracyError(f"warp f = {np.min(f):.3e} below {C.MIN_WARP:g}; J undefined")
        d = wb.dim
        A = wb.base.A(X[..., 2:])
        JN = wb.base.J(X[..., 2:])
        J = np.zeros(X.shape[:-1] + (d, d))
        J[..., 1, 0] = 1.0 / f
        J[..., 0, 1] = -f
        J[..., 0, 2:] = -wb.s * f[..., None] * A
        J[..., 1, 2:] = -wb.s * np.einsum("...b,...ba->...a", A, JN)
        J[..., 2:, 2:] = JN
        return J

    def kahler_form(self, X) -> np.ndarray:
        """``Omega(u, v) = g(Ju, v)``."""
        X = np.asarray(X, dtype=float)
        return np.einsum("...ki,...kj->...ij", self(X), self.bundle.components(X))

    def model_kahler_form(self, X) -> np.ndarray:
        """``f dt ^ theta + r^2 p*Omega_N`` assembled from its pieces."""
        wb = self.bundle
        X = np.asarray(X, dtype=float)
        t = X[..., 0]
        f, r = wb.profile.f(t), wb.profile.r(t)
        th = wb.theta(X)
        dt = wb.H(X)
        out = f[..., None, None] * (dt[..., :, None] * th[..., None, :] - th[..., :, None] * dt[..., None, :])
        out[..., 2:, 2:] += (r**2)[..., None, None] * wb.base.omega(X[..., 2:])
        return out


def total_complex_structure(wb: WarpedBundleMetric) -> TotalComplexStructure:
    return TotalComplexStructure(wb)


def verify_kahler(wb: WarpedBundleMetric, samples, fd: FDConfig = DEFAULT_FD, tol: float = C.TOL_KAHLER,
                  rep: VerificationReport | None = None) -> VerificationReport:
    """Kähler suite for ``(g, J)`` on the warped bundle; passes iff ``f = 2 r r'/s`` (up to FD error)."""
    rep = VerificationReport(name="kahler") if rep is None else rep
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    wb.require_sample(X)
    J = total_complex_structure(wb)
    Jx = J(X)
    G = wb.components(X)
    d = wb.dim
    eye = np.eye(d)
    nJ = covariant_derivative_array(wb.metric, J, ("u", "d"), X, fd)
    dOm = exterior_derivative_array(J.kahler_form, X, fd)
    Om = J.kahler_form(X)
    model = J.model_kahler_form(X)
    Lg = lie_derivative_metric_array(wb.metric, wb.xi, X, fd)
    LJ = lie_derivative_endomorphism_array(J, wb.xi, X, fd)
    p = wb.profile
    t = X[:, 0]
    for i in range(X.shape[0]):
        sc = np.abs(G[i]).max()
        rep.add("kahler.J_squared", "J^2 = -1", np.abs(Jx[i] @ Jx[i] + eye).max(), C.TOL_BASE, i)
        rep.add("kahler.J_compatible", "g(J., J.) = g", np.abs(Jx[i].T @ G[i] @ Jx[i] - G[i]).max() / sc, C.TOL_BASE, i)
        rep.add("kahler.omega_model", "Omega = f dt^theta + r^2 Omega_N", np.abs(Om[i] - model[i]).max() / sc, C.TOL_BASE, i)
        rep.add("kahler.nabla_J", "nabla J = 0", tensor_norm(nJ[i], ("u", "d", "d"), G[i]), tol, i)
        rep.add("kahler.d_omega", "d Omega = 0", tensor_norm(dOm[i], ("d", "d", "d"), G[i]), tol, i)
        rep.add("kahler.xi_killing", "L_xi g = 0", np.abs(Lg[i]).max(), C.TOL_KILLING, i)
        rep.add("kahler.xi_holomorphic", "L_xi J = 0", np.abs(LJ[i]).max(), C.TOL_KILLING, i)
        if wb.s != 0:
            rep.compare("kahler.f_relation", "f = 2 r r'/s", p.f(t[i]), 2 * p.r(t[i]) * p.dr(t[i]) / wb.s, tol,
                        scale=1.0, sample=i)
    return rep


# -- projectors -----------------------------------------------------------------------------------


@dataclass(frozen=True)
class Projectors:
    """Orthogonal splitting ``TM = Delta + E`` at one point, with frames."""

    G: np.ndarray
    delta_frame: np.ndarray  # columns: H, xi/f
    e_frame: np.ndarray  # columns: orthonormal frame of E
    P_delta: np.ndarray
    P_E: np.ndarray


def lifts_and_projectors(wb: WarpedBundleMetric, X) -> Projectors:
    """``Delta = span{H, xi}`` and its orthogonal complement at a single point ``X``."""
    X = np.asarray(X, dtype=float)
    G = wb.components(X)
    H = wb.H(X)
    xu = wb.xi_unit(X)
    D = np.stack([H, xu], axis=-1)
    P_delta = D @ D.T @ G
    P_E = np.eye(wb.dim) - P_delta
    r = float(wb.profile.r(X[0]))
    hb = wb.base.metric.components(X[2:])
    Eb = np.linalg.inv(np.linalg.cholesky(hb)).T  # h-orthonormal base frame
    E = wb.lift(np.broadcast_to(X, (wb.base.dim, wb.dim)), Eb.T).T / r
    return Projectors(G=G, delta_frame=D, e_frame=E, P_delta=P_delta, P_E=P_E)


def component_grid_csv(metric: ChartMetric, points) -> str:
    """Tabulate upper-triangle metric components at the given points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = metric.dim
    G = metric(pts)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    pairs = [(i, j) for i in range(d) for j in range(i, d)]
    w.writerow([f"x{k}" for k in range(d)] + [f"g{i}{j}" for i, j in pairs])
    for p, g in zip(pts, G):
        w.writerow([repr(float(v)) for v in p] + [repr(float(g[i, j])) for i, j in pairs])
    return buf.getvalue()
