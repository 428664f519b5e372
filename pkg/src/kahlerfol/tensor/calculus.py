"""Covariant, Lie and exterior derivatives of chart tensor fields.

Tensor fields are vectorized callables ``x -> components``; derivative
directions are appended as the last axis. All ``*_array`` helpers accept a
batch of points, which lets verification code differentiate their results
again.
"""

from __future__ import annotations

import numpy as np

from .curvature import TensorValue, christoffel_array
from .fd import DEFAULT_FD, FDConfig, Field, jacobian
from .metric import ChartMetric, orthonormal_frame

_SLOTS = "abcdefgh"


def covariant_from(T: np.ndarray, dT: np.ndarray, Gam: np.ndarray, signature) -> np.ndarray:
    """``nabla_m T`` from components, coordinate derivatives and Christoffels."""
    rank = len(signature)
    idx = _SLOTS[:rank]
    out = np.array(dT, dtype=float, copy=True)
    for p, kind in enumerate(signature):
        src = idx[:p] + "z" + idx[p + 1:]
        if kind == "u":
            out = out + np.einsum(f"...{src},...{idx[p]}yz->...{idx}y", T, Gam)
        else:
            out = out - np.einsum(f"...{src},...zy{idx[p]}->...{idx}y", T, Gam)
    return out


def covariant_derivative_array(g: ChartMetric, T: Field, signature, x, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return covariant_from(np.asarray(T(x)), jacobian(T, x, fd), christoffel_array(g, x, fd), tuple(signature))


def covariant_derivative(g: ChartMetric, T: Field, signature, x, fd: FDConfig = DEFAULT_FD) -> TensorValue:
    """``nabla T`` at a point; the new (covariant) derivative slot is last."""
    x = np.asarray(x, dtype=float)
    comps = covariant_derivative_array(g, T, signature, x, fd)
    return TensorValue(comps, tuple(signature) + ("d",), x)


def lie_metric_from(G: np.ndarray, dG: np.ndarray, V: np.ndarray, dV: np.ndarray) -> np.ndarray:
    return (
        np.einsum("...k,...ijk->...ij", V, dG)
        + np.einsum("...kj,...ki->...ij", G, dV)
        + np.einsum("...ik,...kj->...ij", G, dV)
    )


def lie_derivative_metric_array(g: ChartMetric, V: Field, x, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return lie_metric_from(g(x), jacobian(g, x, fd), np.asarray(V(x)), jacobian(V, x, fd))


def lie_derivative_metric(g: ChartMetric, V: Field, x, fd: FDConfig = DEFAULT_FD) -> TensorValue:
    """``(L_V g)_ij = V^k d_k g_ij + g_kj d_i V^k + g_ik d_j V^k``."""
    x = np.asarray(x, dtype=float)
    return TensorValue(lie_derivative_metric_array(g, V, x, fd), ("d", "d"), x)


def lie_derivative_endomorphism_array(J: Field, V: Field, x, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``(L_V J)^i_j`` for a (1,1)-tensor field ``J``."""
    x = np.asarray(x, dtype=float)
    Jx = np.asarray(J(x))
    dJ = jacobian(J, x, fd)
    Vx = np.asarray(V(x))
    dV = jacobian(V, x, fd)
    return (
        np.einsum("...k,...ijk->...ij", Vx, dJ)
        - np.einsum("...kj,...ik->...ij", Jx, dV)
        + np.einsum("...ik,...kj->...ij", Jx, dV)
    )


def exterior_derivative_array(form: Field, x, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """d of a 0-, 1- or 2-form field given by its antisymmetric components."""
    x = np.asarray(x, dtype=float)
    dW = jacobian(form, x, fd)
    degree = dW.ndim - x.ndim
    if degree == 0:
        return dW
    if degree == 1:
        return np.swapaxes(dW, -1, -2) - dW
    if degree == 2:
        return (
            np.einsum("...jki->...ijk", dW)
            + np.einsum("...kij->...ijk", dW)
            + dW
        )
    raise ValueError("exterior derivative implemented for forms of degree <= 2")


def exterior_derivative(form: Field, x, fd: FDConfig = DEFAULT_FD) -> TensorValue:
    x = np.asarray(x, dtype=float)
    comps = exterior_derivative_array(form, x, fd)
    return TensorValue(comps, ("d",) * comps.ndim, x)


def frame_components(T: np.ndarray, signature, G: np.ndarray) -> np.ndarray:
    """Components of ``T`` in a g-orthonormal frame at a single point."""
    E = orthonormal_frame(G)
    Einv = np.linalg.inv(E)
    out = np.asarray(T, dtype=float)
    for p, kind in enumerate(signature):
        M = E if kind == "d" else Einv.T
        out = np.moveaxis(np.tensordot(out, M, axes=([p], [0])), -1, p)
    return out


def tensor_norm(T, signature, G: np.ndarray) -> float:
    """Pointwise g-induced norm (Frobenius norm of orthonormal-frame components)."""
    return float(np.linalg.norm(frame_components(np.asarray(T), signature, G)))


def vector_norm(v, G: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.sqrt(max(v @ G @ v, 0.0)))


def covector_norm(w, G: np.ndarray) -> float:
    w = np.asarray(w, dtype=float)
    return float(np.sqrt(max(w @ np.linalg.solve(G, w), 0.0)))
