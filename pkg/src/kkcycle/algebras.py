"""Finite models of base algebras.

Two families are provided and share one small interface (``dim``,
``forms_dim``, ``mul``, ``star``, ``d``, the form actions, ``realize`` and
``j``) so that correspondences can be built over either:

* :class:`CircleAlgebra` -- truncated trigonometric polynomials standing in
  for C(S^1). One-forms ``sum f_k [(1/2 pi i) d/dx, g_k]`` are
  multiplication operators, so a form is stored as the TrigPoly of the
  function it multiplies by.
* :class:`FiniteAlgebra` -- an associative unital (optionally Z/2-graded)
  algebra given by structure constants; its one-forms are honest elements
  of ``ker(m) < B (x) B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .graded import DEFAULT_TOL

__all__ = [
    "AlgebraError",
    "LeibnizError",
    "TruncationError",
    "TrigPoly",
    "multiply",
    "circle_derivative",
    "multiplication_matrix",
    "CircleAlgebra",
    "FiniteAlgebra",
    "UniversalForms",
    "universal_one_forms",
    "universal_derivation",
    "MatrixDerivation",
    "factor_derivation",
]

POLICIES = ("drop", "error", "wrap")


class AlgebraError(ValueError):
    """Non-associative, non-unital or otherwise malformed algebra data."""


class TruncationError(ValueError):
    """A product or sample leaves the truncation band."""


class LeibnizError(ValueError):
    """A map fails the (graded) Leibniz rule.

    Attributes
    ----------
    pair : tuple of int
        Basis indices ``(i, j)`` of the worst violation.
    residual : float
    """

    def __init__(self, message, pair=None, residual=None):
        super().__init__(message)
        self.pair = pair
        self.residual = residual


# ---------------------------------------------------------------------------
# truncated Fourier series


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Laurent polynomial ``sum_{|k| <= M} c_k z^k`` with ``z = exp(2 pi i x)``.

    ``coeffs[k + M]`` holds ``c_k``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size % 2 != 1:
            raise TruncationError("a TrigPoly needs 2M+1 coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def cutoff(self):
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self):
        M = self.cutoff
        return np.arange(-M, M + 1)

    @classmethod
    def zero(cls, M):
        return cls(np.zeros(2 * M + 1))

    @classmethod
    def one(cls, M):
        return cls.monomial(0, M)

    @classmethod
    def monomial(cls, k, M, c=1.0):
        if abs(k) > M:
            raise TruncationError(f"mode {k} outside cutoff {M}")
        out = np.zeros(2 * M + 1, dtype=complex)
        out[k + M] = c
        return cls(out)

    @classmethod
    def from_dict(cls, terms, M):
        out = np.zeros(2 * M + 1, dtype=complex)
        for k, c in terms.items():
            if abs(k) > M:
                raise TruncationError(f"mode {k} outside cutoff {M}")
            out[k + M] += c
        return cls(out)

    def __getitem__(self, k):
        M = self.cutoff
        return self.coeffs[k + M] if abs(k) <= M else 0.0

    def degree(self, tol=0.0):
        """Largest ``|k|`` with a coefficient above ``tol`` (-1 for zero)."""
        nz = np.flatnonzero(np.abs(self.coeffs) > tol)
        if nz.size == 0:
            return -1
        return int(np.abs(nz - self.cutoff).max())

    def conj(self):
        """Pointwise complex conjugate: ``c_k -> conj(c_{-k})``."""
        return TrigPoly(self.coeffs[::-1].conj())

    def is_real(self, tol=DEFAULT_TOL):
        return bool(np.abs(self.coeffs - self.coeffs[::-1].conj()).max() <= tol)

    def rotate(self, theta):
        """``f(x) -> f(x + theta)``."""
        return TrigPoly(self.coeffs * np.exp(2j * np.pi * self.modes * theta))

    def extend(self, M):
        if M < self.cutoff:
            raise TruncationError("extend() cannot shrink the cutoff")
        pad = M - self.cutoff
        return TrigPoly(np.pad(self.coeffs, pad))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(2j * np.pi * np.multiply.outer(x, self.modes)) @ self.coeffs

    def _check(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        if other.cutoff != self.cutoff:
            raise TruncationError(
                f"cutoff mismatch: {self.cutoff} vs {other.cutoff}"
            )
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return TrigPoly(self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return TrigPoly(self.coeffs - other.coeffs)

    def __neg__(self):
        return TrigPoly(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return multiply(self, other)
        return TrigPoly(self.coeffs * complex(other))

    def __rmul__(self, other):
        return TrigPoly(self.coeffs * complex(other))

    def allclose(self, other, atol=DEFAULT_TOL):
        self._check(other)
        return bool(np.abs(self.coeffs - other.coeffs).max() <= atol)

    def to_json(self):
        return [[float(c.real), float(c.imag)] for c in self.coeffs]

    @classmethod
    def from_json(cls, pairs):
        arr = np.asarray(pairs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("TrigPoly JSON must be a list of [re, im] pairs")
        return cls(arr[:, 0] + 1j * arr[:, 1])

    def __repr__(self):
        return f"TrigPoly(M={self.cutoff}, degree={self.degree()})"


def _fold(full, M, policy):
    """Map a coefficient vector on modes -L..L back to -M..M."""
    L = (full.size - 1) // 2
    if policy == "drop":
        return full[L - M : L + M + 1].copy()
    if policy == "error":
        outside = np.r_[full[: L - M], full[L + M + 1 :]]
        if outside.size and np.abs(outside).max() > 0.0:
            raise TruncationError("product has modes beyond the cutoff")
        return full[L - M : L + M + 1].copy()
    if policy == "wrap":
        out = np.zeros(2 * M + 1, dtype=complex)
        n = 2 * M + 1
        for k, c in zip(range(-L, L + 1), full):
            out[(k + M) % n] += c
        return out
    raise ValueError(f"unknown truncation policy {policy!r}; use one of {POLICIES}")


def multiply(f, g, policy="drop"):
    """Product of two TrigPolys with out-of-band modes handled by ``policy``.

    ``"drop"`` (default) discards modes with ``|k| > M``, ``"error"`` raises
    :class:`TruncationError`, ``"wrap"`` folds them back periodically.
    """
    if f.cutoff != g.cutoff:
        raise TruncationError(f"cutoff mismatch: {f.cutoff} vs {g.cutoff}")
    full = np.convolve(f.coeffs, g.coeffs)
    return TrigPoly(_fold(full, f.cutoff, policy))


def circle_derivative(f):
    """Coefficients ``k c_k``: the function multiplying ``[(1/2 pi i) d/dx, f]``."""
    return TrigPoly(f.modes * f.coeffs)


def multiplication_matrix(f, cutoff=None):
    """Matrix of multiplication by ``f`` on Fourier modes ``|k| <= cutoff``."""
    c = f.coeffs if isinstance(f, TrigPoly) else np.asarray(f, dtype=complex)
    M = (c.size - 1) // 2
    K = M if cutoff is None else int(cutoff)
    ks = np.arange(-K, K + 1)
    diff = ks[:, None] - ks[None, :]
    inside = np.abs(diff) <= M
    out = np.zeros((2 * K + 1, 2 * K + 1), dtype=complex)
    out[inside] = c[diff[inside] + M]
    return out


# ---------------------------------------------------------------------------
# base-algebra models


class CircleAlgebra:
    """C(S^1) truncated to modes ``|k| <= cutoff`` (hard-drop products).

    Elements are coefficient vectors of length ``2M+1``; one-forms are
    stored the same way (the function a form multiplies by) and ``d`` is
    :func:`circle_derivative`.
    """

    kind = "circle"
    graded = False
    is_commutative = True

    def __init__(self, cutoff):
        if int(cutoff) < 0:
            raise ValueError("cutoff must be non-negative")
        self.cutoff = int(cutoff)

    def __eq__(self, other):
        return isinstance(other, CircleAlgebra) and other.cutoff == self.cutoff

    def __hash__(self):
        return hash(("circle", self.cutoff))

    def __repr__(self):
        return f"CircleAlgebra(cutoff={self.cutoff})"

    @property
    def dim(self):
        return 2 * self.cutoff + 1

    forms_dim = dim

    @property
    def modes(self):
        return np.arange(-self.cutoff, self.cutoff + 1)

    def unit(self):
        return TrigPoly.one(self.cutoff).coeffs.copy()

    def element(self, x):
        if isinstance(x, TrigPoly):
            if x.cutoff != self.cutoff:
                raise TruncationError(f"cutoff mismatch: {x.cutoff} vs {self.cutoff}")
            return x.coeffs
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim,):
            raise TruncationError(f"expected {self.dim} coefficients, got {x.shape}")
        return x

    def mul(self, x, y):
        return _fold(np.convolve(self.element(x), self.element(y)), self.cutoff, "drop")

    def star(self, x):
        return self.element(x)[::-1].conj()

    def d(self, x):
        return self.modes * self.element(x)

    form_lmul = mul
    form_rmul = mul
    form_star = star

    def band(self, x):
        """Fourier degree, used to keep samples inside the truncation."""
        return TrigPoly(self.element(x)).degree()

    def form_band(self, w):
        return self.band(w)

    def representation(self, cutoff=None):
        """Basis matrices of multiplication by ``z^k`` on modes ``|j| <= cutoff``."""
        K = self.cutoff if cutoff is None else int(cutoff)
        ks = np.arange(-K, K + 1)
        diff = ks[:, None] - ks[None, :]
        return np.stack([(diff == k).astype(complex) for k in self.modes])

    def realize(self, x, rep):
        return np.tensordot(self.element(x), rep, axes=1)

    def derivative_residual(self, rep, T):
        """How far ``[T, rho(b)] = rho(db)`` is from holding on the basis."""
        T = np.asarray(T)
        comm = np.einsum("ij,bjk->bik", T, rep) - np.einsum("bij,jk->bik", rep, T)
        return float(np.abs(comm - self.modes[:, None, None] * rep).max())

    def j(self, w, rep, T, tol=DEFAULT_TOL):
        """Realize the one-form ``w`` for ``delta = [T, .]``.

        Forms are already multiplication operators, so this is only valid
        when ``T`` implements the circle derivative on the representation;
        that is checked.
        """
        res = self.derivative_residual(rep, T)
        if res > tol:
            raise ValueError(
                "circle forms are realized as multiplication operators; the "
                f"target operator does not implement d/dx (residual {res:.3e})"
            )
        return self.realize(w, rep)


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    """Associative unital algebra with basis ``e_0 .. e_{d-1}``.

    Parameters
    ----------
    structure : ndarray, shape (d, d, d)
        ``e_i e_j = sum_k structure[i, j, k] e_k``.
    unit : ndarray, shape (d,)
    parity : ndarray, shape (d,)
        Grading of the basis; ``gamma(e_i) = (-1)**parity[i] e_i``.
    matrices : ndarray, shape (d, n, n), optional
        A faithful *-representation. When present it defines the involution.
    """

    structure: np.ndarray
    unit: np.ndarray
    parity: np.ndarray = None
    matrices: np.ndarray = None
    name: str = ""
    star_matrix: np.ndarray = field(default=None, repr=False)

    kind = "finite"

    def __post_init__(self):
        C = np.array(self.structure, dtype=complex)
        d = C.shape[0]
        if C.shape != (d, d, d):
            raise AlgebraError(f"structure constants must be (d, d, d), got {C.shape}")
        unit = np.array(self.unit, dtype=complex).ravel()
        parity = (
            np.zeros(d, dtype=np.int8)
            if self.parity is None
            else np.array(self.parity, dtype=np.int8).ravel()
        )
        if unit.shape != (d,) or parity.shape != (d,):
            raise AlgebraError("unit and parity must have one entry per basis element")
        for name, val in (("structure", C), ("unit", unit), ("parity", parity)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        scale = max(1.0, float(np.abs(C).max()))
        assoc = self.associativity_residual()
        if assoc > 1e-12 * scale**2:
            raise AlgebraError(f"structure constants are not associative ({assoc:.3e})")
        L = np.einsum("i,ijk->kj", unit, C)
        R = np.einsum("j,ijk->ki", unit, C)
        eye = np.eye(d)
        if max(np.abs(L - eye).max(), np.abs(R - eye).max()) > 1e-12 * scale:
            raise AlgebraError("the given unit is not a two-sided unit")
        p = parity
        bad = ((p[:, None, None] + p[None, :, None] + p[None, None, :]) % 2 == 1)
        if np.abs(C[bad]).max(initial=0.0) > 1e-12 * scale:
            raise AlgebraError("the grading is not multiplicative")
        if self.matrices is not None:
            mats = np.array(self.matrices, dtype=complex)
            mats.setflags(write=False)
            object.__setattr__(self, "matrices", mats)
            if self.star_matrix is None:
                object.__setattr__(self, "star_matrix", _coordinates(mats, mats.conj().transpose(0, 2, 1)).T)

    # construction ---------------------------------------------------------

    @classmethod
    def from_matrices(cls, matrices, parity=None, name="", tol=1e-10):
        """Algebra spanned by linearly independent matrices closed under products."""
        mats = np.array(matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise AlgebraError("expected a stack of square matrices")
        d, n, _ = mats.shape
        flat = mats.reshape(d, -1).T
        if np.linalg.matrix_rank(flat, tol=tol) < d:
            raise AlgebraError("basis matrices are linearly dependent")
        prods = np.einsum("iab,jbc->ijac", mats, mats).reshape(d * d, n, n)
        C, res = _coordinates(mats, prods, return_residual=True)
        if res > tol:
            raise AlgebraError(f"span of the matrices is not closed under products ({res:.3e})")
        unit, res = _coordinates(mats, np.eye(n)[None], return_residual=True)
        if res > tol:
            raise AlgebraError("the identity matrix is not in the span (non-unital)")
        return cls(
            C.reshape(d, d, d).round(14),
            unit[0].round(14),
            parity,
            mats,
            name,
        )

    @classmethod
    def scalars(cls):
        return cls.from_matrices(np.ones((1, 1, 1)), name="C")

    @classmethod
    def diagonal(cls, n):
        """``C^n`` with the minimal idempotents as basis."""
        mats = np.zeros((n, n, n))
        for i in range(n):
            mats[i, i, i] = 1.0
        return cls.from_matrices(mats, name=f"C^{n}")

    @classmethod
    def matrix_algebra(cls, n, n_odd=0):
        """``M_n`` on the matrix units ``E_ij`` (row-major).

        With ``n_odd > 0`` the last ``n_odd`` basis vectors of ``C^n`` are odd
        and ``E_ij`` has parity ``p_i + p_j``.
        """
        p = np.r_[np.zeros(n - n_odd, np.int8), np.ones(n_odd, np.int8)]
        mats = np.zeros((n * n, n, n))
        for i in range(n):
            for j in range(n):
                mats[i * n + j, i, j] = 1.0
        parity = ((p[:, None] + p[None, :]) % 2).ravel()
        return cls.from_matrices(mats, parity, name=f"M_{n}")

    @classmethod
    def clifford1(cls):
        """``C[e]/(e^2 - 1)`` with ``e`` odd."""
        mats = np.array([np.eye(2), [[0.0, 1.0], [1.0, 0.0]]])
        return cls.from_matrices(mats, parity=[0, 1], name="Cl_1")

    # basic structure ----------------------------------------------------

    @property
    def dim(self):
        return self.structure.shape[0]

    @property
    def forms_dim(self):
        return self.dim**2

    @property
    def graded(self):
        return bool(self.parity.any())

    @property
    def is_commutative(self):
        return bool(np.abs(self.structure - self.structure.transpose(1, 0, 2)).max() <= 1e-12)

    def basis(self, i):
        e = np.zeros(self.dim, dtype=complex)
        e[i] = 1.0
        return e

    def element(self, x):
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim,):
            raise AlgebraError(f"expected {self.dim} coordinates, got {x.shape}")
        return x

    def associativity_residual(self):
        C = self.structure
        lhs = np.einsum("ijm,mkn->ijkn", C, C)
        rhs = np.einsum("jkm,imn->ijkn", C, C)
        return float(np.abs(lhs - rhs).max())

    def mul(self, x, y):
        return np.einsum("i,j,ijk->k", self.element(x), self.element(y), self.structure)

    def gamma(self, x):
        return self.element(x) * (1 - 2 * self.parity.astype(float))

    def star(self, x):
        if self.star_matrix is None:
            raise AlgebraError("this algebra carries no involution")
        return self.star_matrix @ self.element(x).conj()

    def left_matrix(self, b):
        """Matrix of ``x -> b x`` on coordinates."""
        return np.einsum("i,ijk->kj", self.element(b), self.structure)

    def right_matrix(self, b):
        """Matrix of ``x -> x b`` on coordinates."""
        return np.einsum("j,ijk->ki", self.element(b), self.structure)

    def multiplication_map(self):
        """Graded multiplication ``b1 (x) b2 -> b1 gamma(b2)`` as a (d, d*d) matrix."""
        g = 1 - 2 * self.parity.astype(float)
        return (self.structure * g[None, :, None]).reshape(self.dim**2, self.dim).T

    def realize(self, x, rep=None):
        rep = self.matrices if rep is None else rep
        return np.tensordot(self.element(x), rep, axes=1)

    def band(self, x):
        return 0

    def form_band(self, w):
        return 0

    # one-forms inside B (x) B -------------------------------------------

    def d(self, b):
        return universal_derivation(self, b)

    def form_lmul(self, b, w):
        W = np.asarray(w, dtype=complex).reshape(self.dim, self.dim)
        return np.einsum("x,xac,ab->cb", self.element(b), self.structure, W).ravel()

    def form_rmul(self, w, b):
        W = np.asarray(w, dtype=complex).reshape(self.dim, self.dim)
        return np.einsum("ab,byc,y->ac", W, self.structure, self.element(b)).ravel()

    def form_star(self, w):
        """``(b1 (x) b2)* = b2* (x) b1*``, the adjoint of realized forms."""
        if self.star_matrix is None:
            raise AlgebraError("this algebra carries no involution")
        W = np.asarray(w, dtype=complex).reshape(self.dim, self.dim)
        S = self.star_matrix
        return (S @ W.T.conj() @ S.T).ravel()

    def j(self, w, rep, T, tol=None):
        """``j_delta(w)`` for ``delta(b) = [T, rho(b)]`` on an even representation."""
        W = np.asarray(w, dtype=complex).reshape(self.dim, self.dim)
        T = np.asarray(T)
        comm = np.einsum("ij,bjk->bik", T, rep) - np.einsum("bij,jk->bik", rep, T)
        return np.einsum("ab,aij,bjk->ik", W, rep, comm)

    def representation(self, cutoff=None):
        if self.matrices is None:
            raise AlgebraError("this algebra carries no matrix representation")
        return self.matrices

    def __repr__(self):
        label = self.name or "FiniteAlgebra"
        return f"{label}(dim={self.dim})"


def _coordinates(basis, targets, return_residual=False):
    """Least-squares coordinates of ``targets`` in the span of ``basis``."""
    d = basis.shape[0]
    A = basis.reshape(d, -1).T
    Y = targets.reshape(targets.shape[0], -1).T
    coef, *_ = np.linalg.lstsq(A, Y, rcond=None)
    coef = coef.T
    if return_residual:
        res = float(np.abs(A @ coef.T - Y).max(initial=0.0))
        return coef, res
    return coef


# ---------------------------------------------------------------------------
# universal calculus


@dataclass(frozen=True, eq=False)
class UniversalForms:
    """Orthonormal basis of ``Omega^1(B) = ker m`` with the bimodule actions.

    ``basis[:, a]`` is the a-th form in ``B (x) B`` coordinates
    (index ``i * d + j`` for ``e_i (x) e_j``); ``left[b]`` and ``right[b]``
    are the actions of the basis element ``e_b`` in form coordinates.
    """

    algebra: FiniteAlgebra
    basis: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def dim(self):
        return self.basis.shape[1]

    def coordinates(self, w):
        return self.basis.conj().T @ np.asarray(w, dtype=complex)

    def contains(self, w, tol=DEFAULT_TOL):
        w = np.asarray(w, dtype=complex)
        return bool(np.abs(self.basis @ self.coordinates(w) - w).max() <= tol)


def universal_one_forms(B):
    """Kernel of the graded multiplication map together with its actions."""
    if not isinstance(B, FiniteAlgebra):
        raise TypeError("universal_one_forms needs a FiniteAlgebra")
    m = B.multiplication_map()
    K = scipy.linalg.null_space(m)
    d = B.dim
    eye = np.eye(d)
    left = np.stack([K.conj().T @ np.kron(B.left_matrix(eye[b]), eye) @ K for b in range(d)])
    right = np.stack([K.conj().T @ np.kron(eye, B.right_matrix(eye[b])) @ K for b in range(d)])
    return UniversalForms(B, K.astype(complex), left, right)


def universal_derivation(B, b):
    """``db = 1 (x) b - gamma(b) (x) 1`` in ``B (x) B`` coordinates."""
    b = B.element(b)
    return np.kron(B.unit, b) - np.kron(B.gamma(b), B.unit)


@dataclass(frozen=True, eq=False)
class MatrixDerivation:
    """Linear map ``delta: B -> M_n(C)`` with ``B`` acting through ``rep``.

    ``values[i] = delta(e_i)``. The bimodule is ``M_n(C)`` with left and
    right actions ``rho(b) X`` and ``X rho(b)``.
    """

    algebra: FiniteAlgebra
    rep: np.ndarray
    values: np.ndarray

    @classmethod
    def commutator(cls, algebra, T, rep=None, degree=1):
        """Graded commutator ``b -> T rho(b) - (-1)^(deg T deg b) rho(b) T``."""
        rep = algebra.representation() if rep is None else np.asarray(rep, dtype=complex)
        T = np.asarray(T, dtype=complex)
        sign = 1 - 2 * ((degree * algebra.parity) % 2)
        vals = np.einsum("ij,bjk->bik", T, rep) - sign[:, None, None] * np.einsum(
            "bij,jk->bik", rep, T
        )
        return cls(algebra, rep, vals)

    def __call__(self, b):
        return np.tensordot(self.algebra.element(b), self.values, axes=1)

    def leibniz_defects(self):
        """``delta(e_i e_j) - delta(e_i) e_j - gamma(e_i) delta(e_j)`` for all pairs."""
        B, rho, v = self.algebra, self.rep, self.values
        g = 1 - 2 * B.parity.astype(float)
        prod = np.einsum("ijk,kab->ijab", B.structure, v)
        first = np.einsum("iab,jbc->ijac", v, rho)
        second = g[:, None, None, None] * np.einsum("iab,jbc->ijac", rho, v)
        return prod - first - second

    def leibniz_residual(self):
        """Worst Leibniz defect and the basis pair where it occurs."""
        defects = np.abs(self.leibniz_defects()).max(axis=(2, 3))
        i, j = np.unravel_index(np.argmax(defects), defects.shape)
        return float(defects[i, j]), (int(i), int(j))


def factor_derivation(delta, w, tol=DEFAULT_TOL):
    """Value of the bimodule map ``j_delta`` on a one-form.

    Uses ``j_delta(sum b1 (x) b2) = sum rho(b1) delta(b2)``, valid on
    ``ker m`` because every such element equals ``sum b1 d(b2)``.

    Raises
    ------
    LeibnizError
        If ``delta`` violates the graded Leibniz rule by more than ``tol``.
    ValueError
        If ``w`` is not annihilated by the multiplication map.
    """
    res, pair = delta.leibniz_residual()
    scale = max(1.0, float(np.abs(delta.values).max(initial=0.0)))
    if res > tol * scale:
        raise LeibnizError(
            f"delta is not a derivation: worst pair {pair} with defect {res:.3e}",
            pair,
            res,
        )
    B = delta.algebra
    w = np.asarray(w, dtype=complex)
    if w.shape != (B.dim**2,):
        raise ValueError(f"one-form must have {B.dim ** 2} coordinates")
    leak = np.abs(B.multiplication_map() @ w).max(initial=0.0)
    if leak > tol * max(1.0, float(np.abs(w).max(initial=0.0))):
        raise ValueError(f"element is not a one-form: |m(w)| = {leak:.3e}")
    W = w.reshape(B.dim, B.dim)
    return np.einsum("ab,aij,bjk->ik", W, delta.rep, delta.values)
