"""Z/2-graded finite-dimensional linear algebra.

Basis conventions
-----------------
A tensor product ``E (x) F`` enumerates its basis with the ``F`` index
running fastest, i.e. ``e_i (x) f_j`` sits at position ``i * dim F + j``.
This is the ordering produced by :func:`numpy.kron` and every module of the
package relies on it.

Koszul signs are applied when an odd operator passes an odd basis vector::

    (S (x) T)(e (x) f) = (-1)**(deg T * deg e) * S e (x) T f

Adjoints are plain Hilbert-space adjoints (conjugate transpose); with the
sign rule above this gives ``(S (x) T)* = (-1)**(deg S deg T) S* (x) T*``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EVEN",
    "ODD",
    "DEFAULT_TOL",
    "GradingError",
    "SpectrumError",
    "GradedSpace",
    "GradedOperator",
    "graded_tensor",
    "graded_commutator",
    "identity",
    "spectrum",
    "operator_norm",
    "block_operator",
]

EVEN = 0
ODD = 1

#: default tolerance for identity-type residuals
DEFAULT_TOL = 1e-10
#: homogeneity of a declared degree is checked at this level (relative)
HOMOGENEITY_TOL = 1e-12


class GradingError(ValueError):
    """Raised for dimension mismatches and inhomogeneous operators."""


class SpectrumError(RuntimeError):
    """Raised when the dense eigensolver fails to converge."""


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GradedSpace:
    """Finite-dimensional space with a parity label per basis vector.

    Parameters
    ----------
    parity : array_like of {0, 1}
        ``0`` marks an even basis vector, ``1`` an odd one.
    graded : bool
        ``False`` for a trivially graded space. Operators on such a space
        may still carry a formal degree (this is how odd spectral triples
        and KK^1-type cycles are modelled); the degree then only enters
        Koszul signs of tensor products and is never checked against the
        grading.
    """

    parity: np.ndarray
    graded: bool = True

    def __post_init__(self):
        p = np.asarray(self.parity, dtype=np.int8).ravel()
        if p.size == 0:
            raise GradingError("a graded space needs at least one basis vector")
        if np.any((p != 0) & (p != 1)):
            raise GradingError("parity labels must be 0 (even) or 1 (odd)")
        if not self.graded and np.any(p):
            raise GradingError("a trivially graded space has only even vectors")
        object.__setattr__(self, "parity", _frozen(p, np.int8))

    @classmethod
    def even(cls, dim):
        return cls(np.zeros(dim, dtype=np.int8), graded=True)

    @classmethod
    def ungraded(cls, dim):
        return cls(np.zeros(dim, dtype=np.int8), graded=False)

    @classmethod
    def split(cls, n_even, n_odd):
        """Space with the even vectors first, e.g. ``H (+) H`` with H even."""
        return cls(np.r_[np.zeros(n_even, np.int8), np.ones(n_odd, np.int8)])

    @property
    def dim(self):
        return int(self.parity.size)

    def gamma(self):
        """Grading involution as a diagonal matrix of +-1."""
        return np.diag((1.0 - 2.0 * self.parity).astype(complex))

    def signs(self):
        return 1 - 2 * self.parity.astype(np.int64)

    def tensor(self, other):
        if not (self.graded and other.graded):
            return GradedSpace.ungraded(self.dim * other.dim)
        return GradedSpace(((self.parity[:, None] + other.parity[None, :]) % 2).ravel())

    def direct_sum(self, other):
        graded = self.graded and other.graded
        if not graded:
            return GradedSpace.ungraded(self.dim + other.dim)
        return GradedSpace(np.r_[self.parity, other.parity])

    def flipped(self):
        """Same space with opposite parity (``E^op``)."""
        if not self.graded:
            return self
        return GradedSpace(1 - self.parity)

    def doubled(self):
        """``E (+) E^op``, the ambient space of graphs of odd operators."""
        return self.direct_sum(self.flipped())

    def __eq__(self, other):
        if not isinstance(other, GradedSpace):
            return NotImplemented
        return self.graded == other.graded and np.array_equal(self.parity, other.parity)

    def __hash__(self):
        return hash((self.graded, self.parity.tobytes()))

    def __repr__(self):
        n_odd = int(self.parity.sum())
        kind = "graded" if self.graded else "ungraded"
        return f"GradedSpace(dim={self.dim}, odd={n_odd}, {kind})"


@dataclass(frozen=True, eq=False)
class GradedOperator:
    """Square complex matrix with a declared degree on a graded space."""

    matrix: np.ndarray
    degree: int
    space: GradedSpace

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.space.dim
        if m.shape != (n, n):
            raise GradingError(
                f"operator of shape {m.shape} does not act on a space of dim {n}"
            )
        if self.degree not in (EVEN, ODD):
            raise GradingError(f"degree must be 0 or 1, got {self.degree!r}")
        object.__setattr__(self, "matrix", _frozen(m, complex))
        res = self.homogeneity_residual()
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        if res > HOMOGENEITY_TOL * scale:
            raise GradingError(
                f"operator is not homogeneous of degree {self.degree} "
                f"(residual {res:.3e})"
            )

    @property
    def dim(self):
        return self.space.dim

    @property
    def H(self):
        return self.adjoint()

    def homogeneity_residual(self):
        """Largest entry violating the declared degree (0 when ungraded)."""
        if not self.space.graded:
            return 0.0
        p = self.space.parity
        wrong = (p[:, None] + p[None, :] + self.degree) % 2 == 1
        if not wrong.any():
            return 0.0
        return float(np.abs(self.matrix[wrong]).max())

    def adjoint(self):
        return GradedOperator(self.matrix.conj().T, self.degree, self.space)

    def selfadjoint_residual(self):
        return float(np.abs(self.matrix - self.matrix.conj().T).max(initial=0.0))

    def is_selfadjoint(self, tol=DEFAULT_TOL):
        scale = max(1.0, float(np.abs(self.matrix).max(initial=0.0)))
        return self.selfadjoint_residual() <= tol * scale

    def _check_compatible(self, other):
        if not isinstance(other, GradedOperator):
            raise TypeError(f"expected GradedOperator, got {type(other).__name__}")
        if self.space != other.space:
            raise GradingError("operators live on different graded spaces")

    def __add__(self, other):
        self._check_compatible(other)
        if self.degree != other.degree and self.space.graded:
            raise GradingError("cannot add operators of different degree")
        return GradedOperator(self.matrix + other.matrix, self.degree, self.space)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return GradedOperator(-self.matrix, self.degree, self.space)

    def __mul__(self, scalar):
        if isinstance(scalar, GradedOperator):
            return NotImplemented
        return GradedOperator(complex(scalar) * self.matrix, self.degree, self.space)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check_compatible(other)
        return GradedOperator(
            self.matrix @ other.matrix, (self.degree + other.degree) % 2, self.space
        )

    def __repr__(self):
        kind = "odd" if self.degree else "even"
        return f"GradedOperator(dim={self.dim}, {kind})"


def identity(space):
    return GradedOperator(np.eye(space.dim), EVEN, space)


def graded_tensor(S, T):
    """Koszul-signed tensor product of two homogeneous operators.

    >>> sp = GradedSpace([0, 1])
    >>> X = GradedOperator([[0, 1], [1, 0]], ODD, sp)
    >>> graded_tensor(identity(sp), X).matrix.real.astype(int)
    array([[ 0,  1,  0,  0],
           [ 1,  0,  0,  0],
           [ 0,  0,  0, -1],
           [ 0,  0, -1,  0]])
    """
    if not (isinstance(S, GradedOperator) and isinstance(T, GradedOperator)):
        raise TypeError("graded_tensor expects two GradedOperator instances")
    space = S.space.tensor(T.space)
    # column (i, j) picks up (-1)^(deg T * parity of e_i)
    col_sign = np.repeat(1 - 2 * ((T.degree * S.space.parity) % 2), T.dim)
    mat = np.kron(S.matrix, T.matrix) * col_sign[None, :]
    return GradedOperator(mat, (S.degree + T.degree) % 2, space)


def graded_commutator(A, B):
    """``[A, B] = AB - (-1)^(deg A deg B) BA`` (plain commutator if ungraded)."""
    A._check_compatible(B)
    sign = -1.0 if (A.space.graded and A.degree and B.degree) else 1.0
    mat = A.matrix @ B.matrix - sign * (B.matrix @ A.matrix)
    return GradedOperator(mat, (A.degree + B.degree) % 2, A.space)


def block_operator(blocks, degree, space):
    """Assemble a GradedOperator from a nested list of matrix blocks."""
    return GradedOperator(np.block(blocks), degree, space)


def _as_matrix(T):
    return T.matrix if isinstance(T, GradedOperator) else np.asarray(T)


def operator_norm(T):
    """Largest singular value."""
    m = _as_matrix(T)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def spectrum(T, hermitian=None):
    """Eigenvalues with multiplicity.

    Self-adjoint input returns ascending real values; anything else returns
    complex eigenvalues ordered by real part, then imaginary part.
    """
    m = _as_matrix(T)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise GradingError(f"spectrum needs a square matrix, got shape {m.shape}")
    if hermitian is None:
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        hermitian = np.abs(m - m.conj().T).max(initial=0.0) <= HOMOGENEITY_TOL * scale
    try:
        if hermitian:
            return np.linalg.eigvalsh(m)
        ev = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise SpectrumError(
            f"eigensolver did not converge on a matrix of norm {operator_norm(m):.6e}"
        ) from exc
    return ev[np.lexsort((ev.imag, ev.real))]
