"""Sobolev chain of iterated graphs and smoothness diagnostics.

Level ``n`` of the chain lives in ``X_n = X_(n-1) (+) X_(n-1)`` with
``X_0 = E``. On ``X_n`` the operator ``D~_n = 1 (x) D`` acts blockwise; the
projection ``q_(n+1)`` onto its graph and the projection ``P_n`` onto the
graph space satisfy ``P_(n+1) = q_(n+1) (P_n (+) P_n)``. An orthonormal
basis ``V_n`` of the graph space is carried along; in it the restricted
operator ``D_n`` coincides with ``D``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..correspondences import realize_base_matrix, realize_connection
from ..graded import DEFAULT_TOL, GradedOperator, operator_norm
from .transform import eigh_selfadjoint, graph_isometry, woronowicz_projection

__all__ = [
    "SobolevLevel",
    "SobolevChain",
    "sobolev_chain",
    "pi_theta_reps",
    "graded_ad",
    "relative_boundedness_norms",
    "connection_transversality_norms",
]


def _matrix(x):
    return x.matrix if isinstance(x, GradedOperator) else np.asarray(x, dtype=complex)


@dataclass(frozen=True, eq=False)
class SobolevLevel:
    """One level of the chain.

    Attributes
    ----------
    basis : ndarray, shape (dim X_n, dim E)
        Orthonormal basis of the graph space inside ``X_n``.
    projection : ndarray
        ``P_n``, the orthogonal projection of ``X_n`` onto the graph space.
    step : ndarray or None
        ``q_n``, the graph projection of ``D~_(n-1)`` (``None`` at level 0).
    operator : ndarray
        ``D_n`` in the basis ``basis``.
    ambient : ndarray
        ``D~_n = 1 (x) D`` on ``X_n``.
    """

    basis: np.ndarray
    projection: np.ndarray
    step: np.ndarray
    operator: np.ndarray
    ambient: np.ndarray

    @property
    def dim(self):
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class SobolevChain:
    D: np.ndarray
    levels: tuple
    graded: bool

    @property
    def depth(self):
        return len(self.levels) - 1

    def splitting_residual(self, n):
        """``|| q + v q v* - 1 ||`` at level ``n``: graph and its complement fill ``X_n``."""
        q = self.levels[n].step
        if q is None:
            return 0.0
        m = q.shape[0] // 2
        eye = np.eye(m)
        Z = np.zeros((m, m))
        v = np.block([[Z, -eye], [eye, Z]])
        return operator_norm(q + v @ q @ v.T - np.eye(2 * m))


def sobolev_chain(D, depth, tol=DEFAULT_TOL):
    """Iterate the graph construction ``depth`` times."""
    if int(depth) < 0:
        raise ValueError("depth must be non-negative")
    Dm = _matrix(D)
    eigh_selfadjoint(Dm, tol)
    graded = isinstance(D, GradedOperator) and D.space.graded
    d = Dm.shape[0]
    eye = np.eye(d)
    levels = [SobolevLevel(eye.astype(complex), eye.astype(complex), None, Dm, Dm)]
    for n in range(int(depth)):
        prev = levels[-1]
        amb = prev.ambient
        q = woronowicz_projection(amb, tol).matrix
        P = q @ np.kron(np.eye(2), prev.projection)
        P = (P + P.conj().T) / 2
        basis = graph_isometry(amb, tol) @ prev.basis
        amb_next = np.kron(np.eye(2), amb)
        op = basis.conj().T @ amb_next @ basis
        levels.append(SobolevLevel(basis, P, q, (op + op.conj().T) / 2, amb_next))
    return SobolevChain(Dm, tuple(levels), graded)


def graded_ad(D, x, degree, graded):
    """``D x - (-1)^deg x D``; the plain commutator when ungraded."""
    sign = -1.0 if (graded and degree % 2) else 1.0
    return D @ x - sign * (x @ D)


def _pi(a, D, degree, graded):
    s = -1.0 if (graded and degree % 2) else 1.0
    Z = np.zeros_like(a)
    return np.block([[a, Z], [graded_ad(D, a, degree, graded), s * a]])


def pi_theta_reps(a, chain, n):
    """``pi_n(a)``, ``theta_n(a)`` and (for ``n = 1``) ``chi_1(a)``.

    ``pi_1(a) = [[a, 0], [[D, a], (-1)^deg a]]`` on ``X_1`` and
    ``theta_1 = p pi_1 p + p' pi_1 p'`` with ``p`` the graph projection and
    ``p' = 1 - p``. Higher levels apply ``pi`` to ``theta_(n-1)(a)`` with
    ``D~_(n-1)`` and compress with ``q_n (q_(n-1) (+) q_(n-1))`` and the
    complementary product, without re-orthonormalizing.

    Returns
    -------
    dict
        ``pi``, ``theta`` and, at ``n = 1``, ``chi`` (``V* pi_1(a) V`` in
        the graph basis) with ``chi_residual = ||pi_1(a) G - G a||`` for the
        graph map ``G = [1; D]``.
    """
    n = int(n)
    if n < 1 or n > chain.depth:
        raise ValueError(f"level {n} is outside 1..{chain.depth}")
    degree = a.degree if isinstance(a, GradedOperator) else 0
    A = _matrix(a)
    theta = A
    prev_q = None
    out = {}
    for level in range(1, n + 1):
        amb = chain.levels[level - 1].ambient
        pi = _pi(theta, amb, degree, chain.graded)
        q = chain.levels[level].step
        m = q.shape[0]
        if prev_q is None:
            outer, outer_c = q, np.eye(m) - q
            theta = outer @ pi @ outer + outer_c @ pi @ outer_c
        else:
            inner = np.kron(np.eye(2), prev_q)
            inner_c = np.kron(np.eye(2), np.eye(prev_q.shape[0]) - prev_q)
            left = q @ inner
            left_c = (np.eye(m) - q) @ inner_c
            theta = left @ pi @ left.conj().T + left_c @ pi @ left_c.conj().T
        prev_q = q
        out = {"pi": pi, "theta": theta}
    if n == 1:
        V = chain.levels[1].basis
        out["chi"] = V.conj().T @ out["pi"] @ V
        G = np.vstack([np.eye(A.shape[0]), chain.D])
        out["chi_residual"] = operator_norm(out["pi"] @ G - G @ A)
    return out


def _resolvent_power(D, k, sign):
    """``(D + sign i)^(-k)`` by spectral calculus."""
    w, V = eigh_selfadjoint(D)
    return (V * (w + sign * 1j) ** (-k)) @ V.conj().T


def relative_boundedness_norms(a, D, max_level, graded=None):
    """Norm ladder ``||ad(D)^k(a) (D +- i)^(1-k)||`` and the ``a*`` variants.

    Returns one dict per level ``k = 1..max_level`` with keys ``level``,
    ``plus``, ``minus``, ``adjoint_plus``, ``adjoint_minus`` and ``max``.
    """
    Dm = _matrix(D)
    A = _matrix(a)
    degree = a.degree if isinstance(a, GradedOperator) else 0
    if graded is None:
        graded = isinstance(D, GradedOperator) and D.space.graded
    rows = []
    cur, cur_adj = A, A.conj().T
    deg = degree
    for k in range(1, int(max_level) + 1):
        cur = graded_ad(Dm, cur, deg, graded)
        cur_adj = graded_ad(Dm, cur_adj, deg, graded)
        deg = (deg + 1) % 2
        if k == 1:
            vals = [operator_norm(cur)] * 2 + [operator_norm(cur_adj)] * 2
        else:
            Rp, Rm = _resolvent_power(Dm, k - 1, +1), _resolvent_power(Dm, k - 1, -1)
            vals = [
                operator_norm(cur @ Rp),
                operator_norm(cur @ Rm),
                operator_norm(cur_adj @ Rp),
                operator_norm(cur_adj @ Rm),
            ]
        rows.append(
            {
                "level": k,
                "plus": vals[0],
                "minus": vals[1],
                "adjoint_plus": vals[2],
                "adjoint_minus": vals[3],
                "max": max(vals),
            }
        )
    return rows


def connection_transversality_norms(c, D, max_level, triple):
    """Norm ladder of ``ad(D)^k(nabla)`` against ``(D +- i)^(1-k)`` on both sides.

    ``nabla`` is realized on ``E (x)_B H`` through ``triple`` (whose operator
    implements ``d``); ``D`` is a matrix over the base (realized the same
    way) or a matrix on the realized space.

    Returns one dict per level with keys ``level``, ``right_plus``,
    ``right_minus``, ``left_plus``, ``left_minus`` and ``max``.
    """
    Dm = np.asarray(D, dtype=complex)
    if Dm.ndim == 3:
        Dm = realize_base_matrix(c.base, Dm, triple.rep)
    Nm = realize_connection(c, triple)
    if Dm.shape != Nm.shape:
        raise ValueError("D does not act on the realized module space")
    rows = []
    cur = Nm
    for k in range(1, int(max_level) + 1):
        cur = Dm @ cur - cur @ Dm
        if k == 1:
            v = operator_norm(cur)
            vals = [v, v, v, v]
        else:
            Rp, Rm = _resolvent_power(Dm, k - 1, +1), _resolvent_power(Dm, k - 1, -1)
            vals = [
                operator_norm(cur @ Rp),
                operator_norm(cur @ Rm),
                operator_norm(Rp @ cur),
                operator_norm(Rm @ cur),
            ]
        rows.append(
            {
                "level": k,
                "right_plus": vals[0],
                "right_minus": vals[1],
                "left_plus": vals[2],
                "left_minus": vals[3],
                "max": max(vals),
            }
        )
    return rows
