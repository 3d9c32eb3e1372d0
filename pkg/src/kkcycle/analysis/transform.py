"""Bounded transform and the graph projection of a self-adjoint operator."""

from __future__ import annotations

import numpy as np

from ..graded import (
    DEFAULT_TOL,
    EVEN,
    GradedOperator,
    GradedSpace,
    operator_norm,
)

__all__ = [
    "eigh_selfadjoint",
    "functional_calculus",
    "bounded_transform",
    "woronowicz_projection",
    "graph_isometry",
    "projection_residuals",
]


def _matrix(D):
    return D.matrix if isinstance(D, GradedOperator) else np.asarray(D, dtype=complex)


def eigh_selfadjoint(D, tol=DEFAULT_TOL):
    """Eigendecomposition of a self-adjoint matrix, rejecting anything else."""
    m = _matrix(D)
    res = float(np.abs(m - m.conj().T).max(initial=0.0))
    if res > tol * max(1.0, float(np.abs(m).max(initial=0.0))):
        raise ValueError(f"operator is not self-adjoint (residual {res:.3e})")
    return np.linalg.eigh((m + m.conj().T) / 2)


def functional_calculus(D, fn, tol=DEFAULT_TOL):
    """``fn(D)`` by the spectral theorem."""
    w, V = eigh_selfadjoint(D, tol)
    return (V * fn(w)) @ V.conj().T


def bounded_transform(D, tol=DEFAULT_TOL):
    """``F = D (1 + D^2)^(-1/2)`` with the degree and space of ``D``.

    >>> bounded_transform(np.diag([3.0])).matrix.real * np.sqrt(10)
    array([[3.]])
    """
    F = functional_calculus(D, lambda w: w / np.sqrt(1.0 + w * w), tol)
    if isinstance(D, GradedOperator):
        F = (F + F.conj().T) / 2
        return GradedOperator(F, D.degree, D.space)
    m = _matrix(D)
    space = GradedSpace.ungraded(m.shape[0])
    return GradedOperator((F + F.conj().T) / 2, 1, space)


def woronowicz_projection(D, tol=DEFAULT_TOL):
    """Projection of ``E (+) E^op`` onto the graph ``{(e, De)}``.

    Blocks ``[[R, DR], [DR, D^2 R]]`` with ``R = (1 + D^2)^(-1)``.
    """
    w, V = eigh_selfadjoint(D, tol)
    Vh = V.conj().T
    r = 1.0 / (1.0 + w * w)
    R = (V * r) @ Vh
    DR = (V * (w * r)) @ Vh
    D2R = (V * (w * w * r)) @ Vh
    p = np.block([[R, DR], [DR, D2R]])
    p = (p + p.conj().T) / 2
    space = D.space.doubled() if isinstance(D, GradedOperator) else GradedSpace.ungraded(2 * len(w))
    return GradedOperator(p, EVEN, space)


def graph_isometry(D, tol=DEFAULT_TOL):
    """``[(1 + D^2)^(-1/2); D (1 + D^2)^(-1/2)]``: orthonormal basis of the graph."""
    w, V = eigh_selfadjoint(D, tol)
    Vh = V.conj().T
    s = 1.0 / np.sqrt(1.0 + w * w)
    return np.vstack([(V * s) @ Vh, (V * (w * s)) @ Vh])


def flip(n):
    """``v(x, y) = (-y, x)`` on ``E (+) E``."""
    eye = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, -eye], [eye, Z]])


def projection_residuals(D, p=None, tol=DEFAULT_TOL):
    """Idempotence, self-adjointness, graph-range and complement residuals.

    The range test applies ``p`` to the normalized graph vectors
    ``(e, De) / sqrt(1 + lambda^2)`` of all eigenvectors; the complement test
    applies it to ``v`` of those vectors.
    """
    if p is None:
        p = woronowicz_projection(D, tol)
    P = _matrix(p)
    G = graph_isometry(D, tol)
    n = G.shape[1]
    return {
        "idempotent": operator_norm(P @ P - P),
        "selfadjoint": operator_norm(P - P.conj().T),
        "range": operator_norm(P @ G - G),
        "complement": operator_norm(P @ flip(n) @ G),
        "rank": int(np.linalg.matrix_rank(P, tol=1e-8)),
    }
