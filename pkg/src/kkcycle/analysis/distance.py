"""Connes distance between point evaluations in commutative models.

The problem ``sup { f(x) - f(y) : ||[D, f]|| <= 1 }`` is posed over real
functions ``f = sum c_j b_j`` in a fixed real basis, which makes the
constraint operator ``A(c) = i [D, m_f]`` Hermitian-valued and linear in
``c``. It is solved by a primal-dual (Chambolle-Pock) iteration whose dual
step projects onto the spectral-norm ball by clipping eigenvalues. Every
iterate is rescaled by ``1 / max(1, ||A(c)||)`` before its value is
recorded, so the returned value is always attained by a feasible
certificate and is a rigorous lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ..algebras import multiplication_matrix

__all__ = [
    "SolverOptions",
    "DistanceProblem",
    "DistanceResult",
    "circle_problem",
    "discrete_problem",
    "two_point_problem",
    "connes_distance",
]


@dataclass(frozen=True)
class SolverOptions:
    """Iteration budget and bookkeeping of the primal-dual solver.

    ``step`` scales the Lipschitz step ``1 / ||A||``; ``check_every`` sets
    how often a rescaled feasible iterate is evaluated; the run stops early
    once the best value has not improved by more than ``tol`` (relative)
    over ``patience`` checks.
    """

    max_iter: int = 1000
    step: float = 0.99
    check_every: int = 20
    tol: float = 0.0
    patience: int = 0


@dataclass(frozen=True, eq=False)
class DistanceProblem:
    """Linear objective over a real function basis with a spectral-norm constraint.

    Attributes
    ----------
    D : ndarray
        Dirac matrix on the representation space.
    basis : ndarray, shape (m, n, n)
        Multiplication operators of the real basis functions.
    objective : ndarray, shape (m,)
        ``b_j(x) - b_j(y)`` for each basis function.
    kind : str
        ``"circle"`` or ``"discrete"``.
    points : tuple
    options : SolverOptions
    """

    D: np.ndarray
    basis: np.ndarray
    objective: np.ndarray
    kind: str
    points: tuple
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex)
        if B.ndim != 3 or B.shape[1:] != np.shape(self.D):
            raise ValueError("basis operators must match the Dirac matrix")
        comm = np.einsum("ij,bjk->bik", self.D, B) - np.einsum("bij,jk->bik", B, self.D)
        # circle functions commute in the algebra; their truncated
        # multiplication matrices need not, so only discrete models are checked
        off = 0.0
        if self.kind == "discrete":
            off = np.abs(np.einsum("aij,bjk->abik", B, B) - np.einsum("bij,ajk->abik", B, B)).max()
        if off > 1e-12:
            raise ValueError("the generator set is not commutative; only point evaluations "
                             "of commutative models are supported")
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "constraint", 1j * comm)

    def evaluate(self, c):
        return float(np.dot(self.objective, c))

    def constraint_norm(self, c):
        A = np.tensordot(np.asarray(c, dtype=float), self.constraint, axes=1)
        return float(np.abs(np.linalg.eigvalsh((A + A.conj().T) / 2)).max())


@dataclass(frozen=True)
class DistanceResult:
    """Best feasible value, its certificate and the constraint norm there."""

    value: float
    certificate: np.ndarray
    constraint_norm: float
    iterations: int
    improved_late: bool

    def to_json(self):
        return {
            "distance": self.value,
            "constraint_norm": self.constraint_norm,
            "iterations": self.iterations,
            "certificate": [float(x) for x in self.certificate],
        }


def circle_problem(x, y, M, cutoff=None, options=None):
    """Points ``x, y`` of the circle, ``D = diag(k)`` on modes ``|k| <= cutoff``.

    Functions are real trigonometric polynomials of degree ``M`` in the basis
    ``cos(2 pi k t), sin(2 pi k t)``, ``k = 1..M``. Constants are dropped
    because they commute with ``D`` and do not change ``f(x) - f(y)``.
    With ``D = (1/2 pi i) d/dt`` the exact answer is ``2 pi`` times the arc
    length between the points.
    """
    K = M if cutoff is None else int(cutoff)
    ks = np.arange(-K, K + 1)
    D = np.diag(ks.astype(complex))
    mats, obj = [], []
    for k in range(1, M + 1):
        c = np.zeros(2 * M + 1, dtype=complex)
        c[M + k] = c[M - k] = 0.5
        mats.append(multiplication_matrix(c, K))
        obj.append(np.cos(2 * np.pi * k * x) - np.cos(2 * np.pi * k * y))
        s = np.zeros(2 * M + 1, dtype=complex)
        s[M + k], s[M - k] = -0.5j, 0.5j
        mats.append(multiplication_matrix(s, K))
        obj.append(np.sin(2 * np.pi * k * x) - np.sin(2 * np.pi * k * y))
    opts = options or SolverOptions()
    return DistanceProblem(D, np.array(mats), np.array(obj), "circle", (x, y), opts)


def discrete_problem(D, projections, x, y, options=None):
    """Finite space: ``projections[i]`` represents the indicator of point ``i``."""
    P = np.asarray(projections, dtype=complex)
    obj = np.zeros(P.shape[0])
    obj[x] += 1.0
    obj[y] -= 1.0
    opts = options or SolverOptions()
    return DistanceProblem(np.asarray(D, dtype=complex), P, obj, "discrete", (x, y), opts)


def two_point_problem(lam, options=None):
    """``A = C^2`` on ``C^2`` with ``D = [[0, lam], [lam, 0]]``; distance ``1/lam``."""
    D = np.array([[0.0, lam], [lam, 0.0]], dtype=complex)
    P = np.array([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]])
    return discrete_problem(D, P, 0, 1, options)


def connes_distance(problem):
    """Lower bound on the Connes distance with a feasible certificate.

    Raises
    ------
    ValueError
        If the objective is not annihilated by functions commuting with
        ``D`` (the supremum is then infinite).
    """
    opts = problem.options
    m = problem.basis.shape[0]
    n = problem.D.shape[0]
    g = np.asarray(problem.objective, dtype=float)
    if not np.any(g):
        return DistanceResult(0.0, np.zeros(m), 0.0, 0, False)
    Af = problem.constraint.reshape(m, -1)
    # real linear map c -> A(c); its kernel must be orthogonal to g
    gram = np.real(Af @ Af.conj().T)
    K = scipy.linalg.null_space(gram, rcond=1e-12)
    if K.size:
        leak = float(np.abs(K.T @ g).max())
        if leak > 1e-10 * max(1.0, float(np.abs(g).max())):
            raise ValueError("distance is infinite: the objective sees functions commuting with D")
        g = g - K @ (K.T @ g)
    L = float(np.linalg.norm(Af, 2))
    tau = sigma = opts.step / L
    Afc = Af.conj()
    c = np.zeros(m)
    cbar = c.copy()
    Y = np.zeros((n, n), dtype=complex)
    best, best_c, best_norm = 0.0, np.zeros(m), 0.0
    stale = 0
    last_gain = -1
    it = 0
    for it in range(1, int(opts.max_iter) + 1):
        Z = Y + sigma * (cbar @ Af).reshape(n, n)
        Z = (Z + Z.conj().T) / 2
        w, V = np.linalg.eigh(Z)
        Y = (V * (w - np.clip(w, -sigma, sigma))) @ V.conj().T
        c_old = c
        c = c - tau * (np.real(Afc @ Y.ravel()) - g)
        if K.size:
            c = c - K @ (K.T @ c)
        cbar = 2 * c - c_old
        if it % opts.check_every == 0 or it == opts.max_iter:
            nrm = problem.constraint_norm(c)
            scale = max(1.0, nrm)
            val = float(g @ c) / scale
            if val > best * (1.0 + opts.tol) + 1e-300:
                best, best_c, best_norm = val, c / scale, nrm / scale
                last_gain = it
                stale = 0
            else:
                stale += 1
            if opts.patience and stale >= opts.patience:
                break
    final_norm = problem.constraint_norm(best_c) if np.any(best_c) else 0.0
    value = problem.evaluate(best_c)
    return DistanceResult(value, best_c, final_norm, it, last_gain == it)
