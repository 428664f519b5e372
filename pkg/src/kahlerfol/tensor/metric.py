"""Chart-level metric fields and the error types shared by the engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import constants as C


class DomainError(ValueError):
    """A point (or a stencil point around it) lies outside the chart box."""


class DegeneracyError(ArithmeticError):
    """A metric, frame or plane is degenerate where a nondegenerate one is required."""


class NumericError(RuntimeError):
    """A numerical procedure failed to converge."""


@dataclass(frozen=True)
class ChartBox:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
            raise ValueError("chart box needs 1-d bounds with upper > lower")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, dim: int, half_width: float = 1.0) -> "ChartBox":
        return cls(-half_width * np.ones(dim), half_width * np.ones(dim))

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x, margin: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all((x > self.lower + margin) & (x < self.upper - margin), axis=-1)

    def require(self, x, margin: float = 0.0) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DomainError(f"point has {x.shape[-1]} coordinates, chart has {self.dim}")
        if not np.all(self.contains(x, margin)):
            bad = x.reshape(-1, self.dim)[~self.contains(x, margin).reshape(-1)][0]
            raise DomainError(f"point {bad} is not inside the chart box with margin {margin:g}")

    def shrink(self, margin) -> "ChartBox":
        return ChartBox(self.lower + margin, self.upper - margin)

    def product(self, other: "ChartBox") -> "ChartBox":
        return ChartBox(np.concatenate([self.lower, other.lower]), np.concatenate([self.upper, other.upper]))

    def sample(self, rng: np.random.Generator, n: int, margin=0.0) -> np.ndarray:
        lo = self.lower + margin
        hi = self.upper - margin
        return lo + (hi - lo) * rng.random((n, self.dim))


@dataclass(frozen=True)
class ChartMetric:
    """A Riemannian metric on a coordinate box.

    ``components`` maps points of shape ``(..., d)`` to symmetric matrices of
    shape ``(..., d, d)``. Calling the metric validates that every point is in
    the box and that the metric is positive definite there.
    """

    dim: int
    components: Callable[[np.ndarray], np.ndarray]
    box: ChartBox
    name: str = field(default="metric", compare=False)

    def __post_init__(self):
        if self.dim < 1 or self.dim > 12:
            raise ValueError("chart dimension must be between 1 and 12")
        if self.box.dim != self.dim:
            raise ValueError("box dimension does not match metric dimension")

    def __call__(self, x, check: bool = True) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if check:
            self.box.require(x)
        g = np.asarray(self.components(x), dtype=float)
        if check:
            lam = np.linalg.eigvalsh(g)[..., 0]
            if np.any(lam < C.MIN_METRIC_EIGENVALUE):
                raise DegeneracyError(
                    f"{self.name}: smallest metric eigenvalue {lam.min():.3e} below {C.MIN_METRIC_EIGENVALUE:g}"
                )
        return g

    def inner(self, x, u, v) -> np.ndarray:
        return np.einsum("...i,...ij,...j->...", u, self(x), v)

    def lower(self, x, v) -> np.ndarray:
        return np.einsum("...ij,...j->...i", self(x), v)


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Columns form a g-orthonormal basis: ``E.T @ g @ E = I``."""
    L = np.linalg.cholesky(g)
    return np.swapaxes(np.linalg.inv(L), -1, -2)


def gram_schmidt(vectors: np.ndarray, g: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """g-orthonormalize the columns of ``vectors`` at a single point."""
    out = []
    for v in np.asarray(vectors, dtype=float).T:
        w = v.copy()
        for e in out:
            w = w - (e @ g @ w) * e
        n = np.sqrt(max(w @ g @ w, 0.0))
        if n < tol:
            raise DegeneracyError("Gram-Schmidt met a linearly dependent vector")
        out.append(w / n)
    return np.array(out).T
