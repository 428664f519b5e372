"""Profile functions r(t), f(t) for the warped bundle metric, realized from Q-profiles.

A Q-profile prescribes ``Q(tau) = |grad tau|^2`` for the potential
``tau = r^2 / 2``. Along the unit-speed parameter ``t`` we have
``dtau/dt = sqrt(Q)``, so ``t(tau) = int dtau / sqrt(Q)``. Both endpoints are
simple zeros of ``Q``; the substitution ``tau = a + (b - a) sin^2(phi)`` turns
the integrand into the analytic function ``2 / sqrt(P(tau(phi)))`` with
``Q = (tau - a)(b - tau) P``. The same substitution continues ``r`` evenly past
both endpoints, which gives finite-difference stencils room near ``t = 0, L``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from . import constants as C
from .report import VerificationReport
from .tensor.metric import NumericError


@dataclass(frozen=True)
class QProfile:
    """Polynomial ``Q(tau)`` on ``[tau_min, tau_max]`` with simple zeros at both ends."""

    tau_min: float
    tau_max: float
    s: float
    Q: Polynomial
    family: str = "polynomial"

    def __post_init__(self):
        if not (0 < self.tau_min < self.tau_max):
            raise ValueError("need 0 < tau_min < tau_max")
        if self.s <= 0:
            raise ValueError("s must be positive (negative s is a reversal of fiber orientation)")

    @property
    def dQ(self) -> Polynomial:
        return self.Q.deriv()

    @property
    def ddQ(self) -> Polynomial:
        return self.Q.deriv(2)

    def reduced(self) -> Polynomial:
        """``P`` with ``Q = (tau - a)(b - tau) P``."""
        a, b = self.tau_min, self.tau_max
        quot, rem = divmod(self.Q, Polynomial([-a * b, a + b, -1.0]))
        if rem.coef.size and np.abs(rem.coef).max() > 1e-12 * max(np.abs(self.Q.coef).max(), 1.0):
            raise ValueError("Q does not vanish at both endpoints")
        return quot

    def residuals(self) -> dict[str, float]:
        a, b = self.tau_min, self.tau_max
        grid = np.linspace(a, b, 1001)[1:-1]
        return {
            "Q(tau_min)": abs(self.Q(a)),
            "Q(tau_max)": abs(self.Q(b)),
            "Q'(tau_min)-s": abs(self.dQ(a) - self.s),
            "Q'(tau_max)+s": abs(self.dQ(b) + self.s),
            "min Q inside": float(self.Q(grid).min()),
        }

    def is_valid(self, tol: float = 1e-12) -> bool:
        r = self.residuals()
        return r["min Q inside"] > 0 and all(v <= tol for k, v in r.items() if k != "min Q inside")


def quadratic_q(tau_min: float, tau_max: float, s: float) -> QProfile:
    """``Q = s (tau - tau_min)(tau_max - tau) / (tau_max - tau_min)``; slopes are exactly +-s."""
    a, b = float(tau_min), float(tau_max)
    k = s / (b - a)
    return QProfile(a, b, float(s), Polynomial([-a * b, a + b, -1.0]) * k, family="quadratic")


def quartic_q(tau_min: float, tau_max: float, s: float, w: float) -> QProfile:
    """Quadratic profile plus ``w (tau - a)^2 (b - tau)^2``; endpoint slopes stay +-s."""
    a, b = float(tau_min), float(tau_max)
    bump = Polynomial([-a * b, a + b, -1.0])
    return QProfile(a, b, float(s), bump * (s / (b - a)) + bump * bump * w, family=f"quartic(w={w:g})")


def _adaptive_chebyshev(func, domain, tol=1e-14, max_deg=1024) -> Chebyshev:
    deg = 16
    while deg <= max_deg:
        cheb = Chebyshev.interpolate(func, deg, domain=domain)
        c = np.abs(cheb.coef)
        if c[-4:].max() <= tol * max(c.max(), 1.0):
            return cheb.trim(tol * max(c.max(), 1.0) * 1e-3)
        deg *= 2
    raise NumericError(
        f"Chebyshev quadrature did not converge up to degree {max_deg}: tail {c[-4:].max():.3e}, head {c.max():.3e}"
    )


class Profile:
    """Profile functions on ``[0, L]`` given by callables.

    Subclasses supply ``r``, ``dr``, ``ddr``, ``f``, ``df`` and ``ddf``; all
    accept arrays of ``t``. ``tau = r^2 / 2`` throughout.
    """

    L: float
    s: float

    def __init__(self, L, s, r, dr, ddr, f, df, ddf, n_grid: int = C.PROFILE_N_GRID, name: str = "profile"):
        self.L = float(L)
        self.s = float(s)
        self._r, self._dr, self._ddr = r, dr, ddr
        self._f, self._df, self._ddf = f, df, ddf
        self.n_grid = int(n_grid)
        self.name = name

    @property
    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.n_grid)

    def r(self, t):
        return self._r(np.asarray(t, dtype=float))

    def dr(self, t):
        return self._dr(np.asarray(t, dtype=float))

    def ddr(self, t):
        return self._ddr(np.asarray(t, dtype=float))

    def f(self, t):
        return self._f(np.asarray(t, dtype=float))

    def df(self, t):
        return self._df(np.asarray(t, dtype=float))

    def ddf(self, t):
        return self._ddf(np.asarray(t, dtype=float))

    def tau(self, t):
        return 0.5 * self.r(t) ** 2

    def Q_along(self, t):
        """``Q`` as a function of ``t``: ``(r r')^2``."""
        return (self.r(t) * self.dr(t)) ** 2

    def interior(self, margin_fraction: float = C.WARP_MARGIN_FRACTION) -> tuple[float, float]:
        return margin_fraction * self.L, (1.0 - margin_fraction) * self.L

    def to_csv(self, t=None) -> str:
        t = self.t_grid if t is None else np.asarray(t, dtype=float)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "r", "dr", "f", "df", "tau", "Q"])
        for row in zip(t, self.r(t), self.dr(t), self.f(t), self.df(t), self.tau(t), self.Q_along(t)):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


class QRealizedProfile(Profile):
    """Profile realized from a :class:`QProfile`, optionally with ``f`` rescaled.

    ``f = f_scale * 2 r r' / s``; ``f_scale = 1`` is the Kähler profile.
    """

    def __init__(self, q: QProfile, n_grid: int = C.PROFILE_N_GRID, f_scale: float = 1.0,
                 extension: float = C.PROFILE_EXTENSION, _cache=None):
        self.q = q
        self.f_scale = float(f_scale)
        self.extension = float(extension)
        a, b = q.tau_min, q.tau_max
        self._a, self._b = a, b
        if _cache is None:
            P = q.reduced()
            lo, hi = -extension, 0.5 * np.pi + extension
            sig = lambda phi: a + (b - a) * np.sin(phi) ** 2
            Pgrid = P(sig(np.linspace(lo, hi, 4001)))
            if Pgrid.min() <= 0:
                raise ValueError("Q must be positive strictly between its endpoint zeros")
            dt_dphi = _adaptive_chebyshev(lambda phi: 2.0 / np.sqrt(P(sig(phi))), [lo, hi])
            t_of_phi = dt_dphi.integ(lbnd=0.0)
            _cache = (P, dt_dphi, t_of_phi)
        self._P, self._dt_dphi, self._t_of_phi = _cache
        L = float(self._t_of_phi(0.5 * np.pi))
        self._t_lo = float(self._t_of_phi(-extension))
        self._t_hi = float(self._t_of_phi(0.5 * np.pi + extension))
        super().__init__(L, q.s, self._r_eval, self._dr_eval, self._ddr_eval,
                         self._f_eval, self._df_eval, self._ddf_eval, n_grid=n_grid,
                         name=f"{q.family}[{a:g},{b:g}] s={q.s:g}" + ("" if f_scale == 1.0 else f" f_scale={f_scale:g}"))

    def perturbed(self, f_scale: float) -> "QRealizedProfile":
        """Same ``r`` with ``f`` multiplied by ``f_scale`` (non-Kähler unless 1)."""
        return QRealizedProfile(self.q, self.n_grid, self.f_scale * f_scale, self.extension,
                                _cache=(self._P, self._dt_dphi, self._t_of_phi))

    @property
    def t_range(self) -> tuple[float, float]:
        """Parameter range on which the even continuation is available."""
        return self._t_lo, self._t_hi

    def phi(self, t) -> np.ndarray:
        """Invert ``t(phi)`` by Newton iteration."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self._t_lo) or np.any(t > self._t_hi):
            raise ValueError(f"t outside the continued profile range [{self._t_lo:.4g}, {self._t_hi:.4g}]")
        phi = 0.5 * np.pi * t / self.L
        for _ in range(60):
            step = (self._t_of_phi(phi) - t) / self._dt_dphi(phi)
            phi = phi - step
            if np.all(np.abs(step) <= 4e-16 * (1.0 + np.abs(phi))):
                break
        else:
            raise NumericError(f"profile inversion did not converge, last step {np.abs(step).max():.3e}")
        return phi

    def t_of_tau(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        u = np.clip((tau - self._a) / (self._b - self._a), 0.0, 1.0)
        return self._t_of_phi(np.arcsin(np.sqrt(u)))

    def _state(self, t):
        phi = self.phi(t)
        sn, cs = np.sin(phi), np.cos(phi)
        tau = self._a + (self._b - self._a) * sn**2
        dtau = (self._b - self._a) * sn * cs * np.sqrt(self._P(tau))  # signed sqrt(Q)
        return tau, dtau

    def tau(self, t):
        return self._state(t)[0]

    def sqrtQ(self, t):
        return self._state(t)[1]

    def Q_along(self, t):
        return self.q.Q(self.tau(t))

    def _r_eval(self, t):
        return np.sqrt(2.0 * self.tau(t))

    def _dr_eval(self, t):
        tau, dtau = self._state(t)
        return dtau / np.sqrt(2.0 * tau)

    def _ddr_eval(self, t):
        tau, dtau = self._state(t)
        r = np.sqrt(2.0 * tau)
        dr = dtau / r
        return (0.5 * self.q.dQ(tau) - dr**2) / r

    def _f_eval(self, t):
        return self.f_scale * 2.0 * self.sqrtQ(t) / self.s

    def _df_eval(self, t):
        return self.f_scale * self.q.dQ(self.tau(t)) / self.s

    def _ddf_eval(self, t):
        tau, dtau = self._state(t)
        return self.f_scale * self.q.ddQ(tau) * dtau / self.s


def realize(q: QProfile, n_grid: int = C.PROFILE_N_GRID) -> QRealizedProfile:
    """Realize ``r, f`` on ``[0, L]`` with ``L = int dtau / sqrt(Q)``."""
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    return QRealizedProfile(q, n_grid)


def from_functions(L: float, s: float, r: Callable, dr: Callable, ddr: Callable, f: Callable, df: Callable,
                   ddf: Callable, n_grid: int = C.PROFILE_N_GRID, name: str = "custom") -> Profile:
    return Profile(L, s, r, dr, ddr, f, df, ddf, n_grid=n_grid, name=name)


def round_sphere_profile(radius: float = 1.0, n_grid: int = C.PROFILE_N_GRID) -> Profile:
    """``r = 1``, ``f = radius sin(t / radius)``: the metric of a round sphere times a fixed base."""
    R = float(radius)
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    return Profile(
        np.pi * R, 0.0, one, zero, zero,
        lambda t: R * np.sin(t / R), lambda t: np.cos(t / R), lambda t: -np.sin(t / R) / R,
        n_grid=n_grid, name=f"round-sphere R={R:g}",
    )


# -- validation ----------------------------------------------------------------------------------


def _odd_derivatives(func, t0: float, h: float) -> tuple[float, float]:
    v = func(np.array([t0 - 2 * h, t0 - h, t0 + h, t0 + 2 * h]))
    d1 = (v[2] - v[1]) / (2 * h)
    d3 = (v[3] - 2 * v[2] + 2 * v[1] - v[0]) / (2 * h**3)
    return float(d1), float(d3)


def validate(p: Profile, s: float | None = None, even_step: float = 1e-2) -> VerificationReport:
    """Residuals of every profile invariant: signs, boundary slopes, evenness, round trip."""
    s = p.s if s is None else float(s)
    rep = VerificationReport(name=f"profile:{p.name}")
    L = p.L
    t = p.t_grid
    inner = t[1:-1]
    r, dr, f = p.r(t), p.dr(inner), p.f(inner)

    rep.add("profile.r_positive", "r > 0", 0.0 if r.min() > 0 else 1.0, C.INDICATOR_TOL, numeric=r.min())
    rep.add("profile.dr_positive", "r' > 0 inside", 0.0 if dr.min() > 0 else 1.0, C.INDICATOR_TOL, numeric=dr.min())
    rep.add("profile.f_positive", "f > 0 inside", 0.0 if f.min() > 0 else 1.0, C.INDICATOR_TOL, numeric=f.min())
    kahler = 2.0 * p.r(inner) * dr / s if s != 0 else np.zeros_like(inner)
    rep.add("profile.f_kahler", "f = 2 r r'/s", np.abs(f - kahler).max() / max(np.abs(kahler).max(), 1e-300),
            C.TOL_PROFILE_ROUNDTRIP)

    tb = C.TOL_PROFILE_BOUNDARY
    rep.add("profile.f_zero_start", "f(0) = 0", abs(float(p.f(0.0))), tb, numeric=float(p.f(0.0)), closed_form=0.0)
    rep.add("profile.f_zero_end", "f(L) = 0", abs(float(p.f(L))), tb, numeric=float(p.f(L)), closed_form=0.0)
    rep.add("profile.df_start", "f'(0) = 1", abs(float(p.df(0.0)) - 1.0), tb, numeric=float(p.df(0.0)), closed_form=1.0)
    rep.add("profile.df_end", "f'(L) = -1", abs(float(p.df(L)) + 1.0), tb, numeric=float(p.df(L)), closed_form=-1.0)
    sc = max(abs(s), 1.0)
    v0 = float(2 * p.r(0.0) * p.ddr(0.0))
    vL = float(2 * p.r(L) * p.ddr(L))
    rep.add("profile.rr_start", "2 r(0) r''(0) = s", abs(v0 - s) / sc, tb, numeric=v0, closed_form=s)
    rep.add("profile.rr_end", "2 r(L) r''(L) = -s", abs(vL + s) / sc, tb, numeric=vL, closed_form=-s)

    for tag, t0 in (("start", 0.0), ("end", L)):
        try:
            d1, d3 = _odd_derivatives(p.r, t0, even_step)
            res = max(abs(d1), abs(d3))
        except ValueError:
            d1 = d3 = res = float("inf")
        rep.add(f"profile.even_{tag}", "odd derivatives of r vanish", res, C.TOL_EVENNESS, numeric=d3)

    mid = inner[(inner > 0.05 * L) & (inner < 0.95 * L)]
    if isinstance(p, QRealizedProfile):
        rrp = p.r(mid) * p.dr(mid)
        sq = np.sqrt(p.q.Q(0.5 * p.r(mid) ** 2))
        rep.add("profile.roundtrip_Q", "r r' = sqrt(Q(tau))", np.abs(rrp - sq).max() / np.abs(sq).max(),
                C.TOL_PROFILE_ROUNDTRIP)
        back = p.t_of_tau(p.tau(mid))
        rep.add("profile.roundtrip_t", "t(tau(t)) = t", np.abs(back - mid).max() / L, C.TOL_PROFILE_ROUNDTRIP)
    if isinstance(p, QRealizedProfile) and p.q.family == "quadratic":
        # dt = dtau / sqrt(Q) with Q = k (tau - a)(b - tau) integrates to pi / sqrt(k)
        exact = np.pi / np.sqrt(p.q.s / (p.q.tau_max - p.q.tau_min))
        rep.add("profile.length", "L = pi / sqrt(k) for quadratic Q", abs(L - exact) / exact, tb, numeric=L,
                closed_form=exact)
    else:
        rep.add("profile.length", "length of the t interval", 0.0, tb, numeric=L, informational=True)
    # (ln|alpha|)' = -(|alpha| + p*) with |alpha| = 2r'/r, p* = -f'/f
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = p.ddr(mid) / p.dr(mid) - p.dr(mid) / p.r(mid)
        rhs = -(2 * p.dr(mid) / p.r(mid) - p.df(mid) / p.f(mid))
        res = np.abs(lhs - rhs).max() / max(np.abs(rhs).max(), 1.0)
    rep.add("profile.dln_alpha", "(ln|alpha|)' = -(|alpha| + p*)", res if np.isfinite(res) else np.inf,
            C.TOL_PROFILE_ROUNDTRIP)
    return rep


# -- closed-form potential data at one tau -------------------------------------------------------


@dataclass(frozen=True)
class MidpointChain:
    tau: float
    Q: float
    dQ: float
    M: float
    Lambda: float
    dM: float
    Q_dM: float
    two_M_Lambda_minus_M: float
    lam: float
    extras: dict = field(default_factory=dict)


def identity_chain_at(q: QProfile, tau: float, m: int) -> MidpointChain:
    """Exact potential data at ``tau`` for the warped construction over an m-dimensional base.

    ``M = Q / 2 tau``, ``Lambda = Q'/2`` and ``lambda`` from
    ``Q dLambda = 2 m M (M - Lambda) - lambda Q`` (all derivatives in ``tau``).
    """
    Qv, dQ, ddQ = float(q.Q(tau)), float(q.dQ(tau)), float(q.ddQ(tau))
    M = Qv / (2 * tau)
    Lam = dQ / 2
    dM = dQ / (2 * tau) - Qv / (2 * tau**2)
    dLam = ddQ / 2
    lam = (2 * m * M * (M - Lam) - Qv * dLam) / Qv
    return MidpointChain(tau, Qv, dQ, M, Lam, dM, Qv * dM, 2 * M * (Lam - M), lam)
