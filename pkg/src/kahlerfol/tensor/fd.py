"""Vectorized central finite differences with optional Richardson extrapolation.

Fields are callables taking points of shape ``(..., d)`` and returning arrays
of shape ``(..., *S)``. Derivatives append the differentiation axes at the end,
so ``derivative(F, x)`` has shape ``(..., *S, d)``. Because every stencil is
evaluated in a single batched call, derivatives of FD-derived fields nest
without Python-level loops.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .. import constants as C

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FDConfig:
    """Stepping for one family of finite-difference evaluations.

    ``step`` is used for first derivatives, ``step2`` for direct second
    derivative stencils. When an FD-derived quantity is itself differentiated,
    callers use :meth:`nested`, which scales both steps by ``nest_ratio`` per
    level so that round-off from the inner level is not amplified.
    """

    step: float = C.FD_STEP
    step2: float = C.FD_STEP_SECOND
    richardson: bool = True
    nest_ratio: float = C.FD_NEST_RATIO

    def __post_init__(self):
        if self.step <= 0 or self.step2 <= 0 or self.nest_ratio < 1:
            raise ValueError(f"invalid FD configuration {self}")

    def nested(self, level: int = 1) -> "FDConfig":
        k = self.nest_ratio**level
        return replace(self, step=self.step * k, step2=self.step2 * k)

    def scaled(self, factor: float) -> "FDConfig":
        return replace(self, step=self.step * factor, step2=self.step2 * factor)

    def reach(self, levels: int = 1) -> float:
        """Largest coordinate offset touched by ``levels`` nested stencils."""
        return sum(2.0 * max(self.step, self.step2) * self.nest_ratio**k for k in range(levels))

    @classmethod
    def convergence(cls, step: float = C.CONVERGENCE_STEP) -> "FDConfig":
        """Plain second-order stepping used for observed-order studies."""
        return cls(step=step, step2=step, richardson=False, nest_ratio=C.CONVERGENCE_NEST_RATIO)


DEFAULT_FD = FDConfig()


def _steps(step: float, richardson: bool) -> tuple[float, ...]:
    return (step, step / 2.0) if richardson else (step,)


def _extrapolate(est: np.ndarray, axis: int, richardson: bool) -> np.ndarray:
    if not richardson:
        return np.take(est, 0, axis=axis)
    coarse = np.take(est, 0, axis=axis)
    fine = np.take(est, 1, axis=axis)
    return (4.0 * fine - coarse) / 3.0


def derivative(F: Field, x, step: float = C.FD_STEP, richardson: bool = True) -> np.ndarray:
    """Gradient of ``F`` at ``x`` by central differences.

    Returns an array of shape ``(..., *S, d)`` with ``[..., k] = dF/dx^k``.
    """
    x = np.asarray(x, dtype=float)
    lead = x.shape[:-1]
    d = x.shape[-1]
    k = len(lead)
    hs = np.array(_steps(step, richardson))
    eye = np.eye(d)
    # offsets: (n_h, 2, d, d) -> points (..., n_h, 2, d, d)
    offs = hs[:, None, None, None] * np.array([1.0, -1.0])[None, :, None, None] * eye
    vals = np.asarray(F(x[..., None, None, None, :] + offs))
    tail = vals.shape[k + 3:]
    diff = np.take(vals, 0, axis=k + 1) - np.take(vals, 1, axis=k + 1)  # (..., n_h, d, *S)
    diff = diff / (2.0 * hs.reshape((len(hs),) + (1,) * (1 + len(tail))))
    out = _extrapolate(diff, k, richardson)  # (..., d, *S)
    return np.moveaxis(out, k, -1)


def second_derivative(F: Field, x, step: float = C.FD_STEP_SECOND, richardson: bool = True) -> np.ndarray:
    """Hessian of ``F`` at ``x``; shape ``(..., *S, d, d)``, symmetric in the last two axes.

    Uses the four-corner stencil for every index pair (the diagonal reduces to a
    centered second difference of spacing ``2h``).
    """
    x = np.asarray(x, dtype=float)
    lead = x.shape[:-1]
    d = x.shape[-1]
    k = len(lead)
    hs = np.array(_steps(step, richardson))
    eye = np.eye(d)
    signs = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    # offsets (n_h, 4, d, d, d): corner c, pair (a, b), coordinate
    offs = (
        signs[:, 0, None, None, None] * eye[:, None, :]
        + signs[:, 1, None, None, None] * eye[None, :, :]
    )
    offs = hs[:, None, None, None, None] * offs[None]
    vals = np.asarray(F(x[..., None, None, None, None, :] + offs))
    tail = vals.shape[k + 4:]
    corners = [np.take(vals, c, axis=k + 1) for c in range(4)]  # (..., n_h, d, d, *S)
    est = (corners[0] - corners[1] - corners[2] + corners[3]) / (
        4.0 * hs.reshape((len(hs),) + (1,) * (2 + len(tail))) ** 2
    )
    out = _extrapolate(est, k, richardson)  # (..., d, d, *S)
    out = np.moveaxis(out, (k, k + 1), (-2, -1))
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def jacobian(F: Field, x, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    return derivative(F, x, fd.step, fd.richardson)


def hessian(F: Field, x, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    return second_derivative(F, x, fd.step2, fd.richardson)


def observed_order(coarse: float, fine: float, ratio: float = 2.0) -> float:
    """Observed convergence order from residuals at steps h and h/ratio."""
    coarse, fine = abs(coarse), abs(fine)
    if coarse == 0.0 or fine == 0.0:
        return float("nan")
    return float(np.log(coarse / fine) / np.log(ratio))
