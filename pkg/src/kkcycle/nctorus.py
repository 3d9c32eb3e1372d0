"""Finite models of the noncommutative torus and its factorization.

Modes ``(n, k)`` with ``|n| <= N`` (crossed-product direction) and
``|k| <= M`` (Fourier direction) are enumerated with ``k`` fastest, at
position ``(n + N) * (2M + 1) + (k + M)``. An element of the convolution
algebra ``C_c(S^1 x Z)`` is an array ``f[n + N, k + M]`` holding the
coefficient of ``delta_n (x) z^k``.

Generators in the regular representation::

    u = delta_1 (x) 1 :  e_(n,k) -> exp(2 pi i k theta) e_(n+1,k)
    v = delta_0 (x) z :  e_(n,k) -> e_(n,k+1)

so that ``uv = exp(2 pi i theta) vu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .algebras import CircleAlgebra
from .correspondences import (
    Correspondence,
    SpectralTriple,
    assemble_odd_pair,
    compose,
)
from .graded import EVEN, ODD, GradedOperator, GradedSpace

__all__ = [
    "GOLDEN",
    "TorusParams",
    "TorusElement",
    "TorusTriple",
    "ClockShift",
    "FactorizationReport",
    "convolution",
    "regular_representation",
    "build_torus_triple",
    "build_clock_shift",
    "build_circle_triple",
    "build_fibration",
    "identification_map",
    "verify_factorization",
]

#: fractional part of the golden ratio, the default irrational sample
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TorusParams:
    """Rotation angle and cutoffs of a truncated torus model."""

    theta: float = GOLDEN
    N: int = 8
    M: int = 8

    def __post_init__(self):
        theta = float(self.theta)
        if not (0.0 <= theta < 1.0) or not math.isfinite(theta):
            raise ValueError(f"theta must lie in [0, 1), got {self.theta!r}")
        if int(self.N) < 1 or int(self.M) < 1:
            raise ValueError("cutoffs N and M must be at least 1")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "M", int(self.M))

    @property
    def shape(self):
        return (2 * self.N + 1, 2 * self.M + 1)

    @property
    def dim(self):
        return self.shape[0] * self.shape[1]

    def modes(self):
        """Arrays ``(n, k)`` of all modes in basis order."""
        n, k = np.meshgrid(
            np.arange(-self.N, self.N + 1), np.arange(-self.M, self.M + 1), indexing="ij"
        )
        return n.ravel(), k.ravel()

    def interior(self):
        """Mask of modes with ``|n| <= N-1`` and ``|k| <= M-1``."""
        n, k = self.modes()
        return (np.abs(n) < self.N) & (np.abs(k) < self.M)

    def to_json(self):
        return {"theta": self.theta, "N": self.N, "M": self.M}


# ---------------------------------------------------------------------------
# convolution algebra


@dataclass(frozen=True, eq=False)
class TorusElement:
    """Truncated element ``sum f[n, k] delta_n (x) z^k`` of the crossed product."""

    coeffs: np.ndarray
    params: TorusParams

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != self.params.shape:
            raise ValueError(f"expected coefficients of shape {self.params.shape}, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, n, k, params, c=1.0):
        out = np.zeros(params.shape, dtype=complex)
        out[n + params.N, k + params.M] = c
        return cls(out, params)

    @classmethod
    def unit(cls, params):
        return cls.monomial(0, 0, params)

    @classmethod
    def u(cls, params):
        return cls.monomial(1, 0, params)

    @classmethod
    def v(cls, params):
        return cls.monomial(0, 1, params)

    def __mul__(self, other):
        if isinstance(other, TorusElement):
            return convolution(self, other)
        return TorusElement(self.coeffs * complex(other), self.params)

    __rmul__ = lambda self, other: TorusElement(self.coeffs * complex(other), self.params)  # noqa: E731

    def __add__(self, other):
        return TorusElement(self.coeffs + other.coeffs, self.params)

    def __sub__(self, other):
        return TorusElement(self.coeffs - other.coeffs, self.params)

    def partial1(self):
        """``d_1 f(x, n) = n f(x, n)``."""
        n = np.arange(-self.params.N, self.params.N + 1)
        return TorusElement(self.coeffs * n[:, None], self.params)

    def partial2(self):
        """Fourier derivative ``c_k -> k c_k`` in the circle direction."""
        k = np.arange(-self.params.M, self.params.M + 1)
        return TorusElement(self.coeffs * k[None, :], self.params)

    def support_band(self):
        """Largest ``|n|`` and ``|k|`` carrying a nonzero coefficient."""
        nz = np.argwhere(self.coeffs != 0)
        if nz.size == 0:
            return (-1, -1)
        return (
            int(np.abs(nz[:, 0] - self.params.N).max()),
            int(np.abs(nz[:, 1] - self.params.M).max()),
        )


def convolution(f, g):
    """``(f * g)(x, n) = sum_m f(x, m) g(x + m theta, n - m)``, out-of-band modes dropped."""
    if f.params != g.params:
        raise ValueError("convolution needs elements with common parameters")
    p = f.params
    N, M = p.N, p.M
    out = np.zeros(p.shape, dtype=complex)
    ks = np.arange(-M, M + 1)
    for m in range(-N, N + 1):
        fm = f.coeffs[m + N]
        if not fm.any():
            continue
        phase = np.exp(2j * np.pi * ks * m * p.theta)
        for n in range(max(-N, m - N), min(N, m + N) + 1):
            gm = g.coeffs[n - m + N] * phase
            if not gm.any():
                continue
            full = np.convolve(fm, gm)
            out[n + N] += full[M : 3 * M + 1]
    return TorusElement(out, p)


def regular_representation(f):
    """Matrix of ``g -> f * g`` on the mode basis (truncated)."""
    p = f.params
    n, k = p.modes()
    dn = n[:, None] - n[None, :]
    dk = k[:, None] - k[None, :]
    inside = (np.abs(dn) <= p.N) & (np.abs(dk) <= p.M)
    out = np.zeros((p.dim, p.dim), dtype=complex)
    phase = np.exp(2j * np.pi * k[None, :] * dn * p.theta)
    out[inside] = f.coeffs[dn[inside] + p.N, dk[inside] + p.M] * phase[inside]
    return out


# ---------------------------------------------------------------------------
# triples


class TorusTriple(SpectralTriple):
    """Spectral triple on ``H (+) H`` with named parts.

    ``u``, ``v`` are the generators on ``H`` (the triple's generators are
    their doubles), ``partials`` holds ``(d_1, d_2)`` as diagonal matrices.
    """

    params: TorusParams = None
    partials: tuple = None

    @property
    def u(self):
        return self.generators["u"]

    @property
    def v(self):
        return self.generators["v"]

    def relation_residual(self, interior=True):
        """``||uv - exp(2 pi i theta) vu||`` on the interior (or all) modes."""
        return _relation_residual(
            self.u.matrix[: self.params.dim, : self.params.dim],
            self.v.matrix[: self.params.dim, : self.params.dim],
            self.params,
            interior,
        )

    def interior_unitarity(self):
        """Largest deviation of ``u* u`` and ``v* v`` from 1 on the interior."""
        mask = self.params.interior()
        d = self.params.dim
        out = 0.0
        for g in (self.u, self.v):
            m = g.matrix[:d, :d]
            prod = (m.conj().T @ m)[np.ix_(mask, mask)]
            out = max(out, float(np.abs(prod - np.eye(mask.sum())).max()))
        return out


def _relation_residual(u, v, params, interior=True):
    # the generators are monomial matrices, so sparse products are cheap
    u, v = sp.csc_matrix(u), sp.csc_matrix(v)
    diff = u @ v - np.exp(2j * np.pi * params.theta) * (v @ u)
    if interior:
        diff = diff[:, np.flatnonzero(params.interior())]
    if diff.shape[1] == 0:
        return 0.0
    # spectral norm from the largest eigenvalue of the Gram matrix
    gram = (diff.conj().T @ diff).toarray()
    return float(np.sqrt(max(np.linalg.eigvalsh(gram)[-1], 0.0)))


def _torus_generators(params):
    p = params
    return (
        regular_representation(TorusElement.u(p)),
        regular_representation(TorusElement.v(p)),
    )


def build_torus_triple(params):
    """Crossed-product model of ``(A_theta, H (+) H, D)``.

    ``D = [[0, d1 - i d2], [d1 + i d2, 0]]`` with ``d1 = diag(n)``,
    ``d2 = diag(k)``; the first copy of ``H`` is even.
    """
    p = params
    n, k = p.modes()
    d1, d2 = np.diag(n.astype(complex)), np.diag(k.astype(complex))
    u, v = _torus_generators(p)
    D = assemble_odd_pair(d1, d2)
    space = D.space
    gens = {
        "u": GradedOperator(np.kron(np.eye(2), u), EVEN, space),
        "v": GradedOperator(np.kron(np.eye(2), v), EVEN, space),
    }
    t = TorusTriple(space, D, gens)
    object.__setattr__(t, "params", p)
    object.__setattr__(t, "partials", (d1, d2))
    return t


@dataclass(frozen=True, eq=False)
class ClockShift:
    """Exact ``q x q`` representation ``u = clock``, ``v = shift`` of ``A_(p/q)``."""

    q: int
    p: int
    u: np.ndarray
    v: np.ndarray

    @property
    def theta(self):
        return self.p / self.q

    def relation_residual(self):
        phase = _roots_of_unity(self.p, self.q, np.array([1]))[0]
        diff = self.u @ self.v - phase * (self.v @ self.u)
        return float(np.linalg.norm(diff, 2))

    def power_residual(self):
        eye = np.eye(self.q)
        return max(
            float(np.abs(np.linalg.matrix_power(self.u, self.q) - eye).max()),
            float(np.abs(np.linalg.matrix_power(self.v, self.q) - eye).max()),
        )


def _roots_of_unity(p, q, j):
    """``exp(2 pi i p j / q)``, exact at the quarter turns."""
    angle = 2 * np.pi * ((p * j) % q) / q
    out = np.cos(angle) + 1j * np.sin(angle)
    quarter = (4 * p * j) % q == 0
    out[quarter] = np.array([1, 1j, -1, -1j])[(4 * p * j[quarter] // q) % 4]
    return out


def build_clock_shift(q, p):
    """Clock and shift matrices with ``uv = exp(2 pi i p/q) vu``."""
    q, p = int(q), int(p)
    if q < 1:
        raise ValueError("q must be at least 1")
    if math.gcd(p, q) != 1:
        raise ValueError(f"p and q must be coprime, got p={p}, q={q}")
    u = np.diag(_roots_of_unity(p, q, np.arange(q)))
    v = np.roll(np.eye(q), 1, axis=0).astype(complex)
    return ClockShift(q, p, u, v)


def build_circle_triple(M):
    """``(C(S^1), L^2(S^1), (1/2 pi i) d/dx)`` on Fourier modes ``|k| <= M``.

    The space is trivially graded: this is an odd triple and ``D`` carries
    a formal odd degree.
    """
    if int(M) < 1:
        raise ValueError("M must be at least 1")
    B = CircleAlgebra(M)
    space = GradedSpace.ungraded(B.dim)
    D = GradedOperator(np.diag(B.modes.astype(complex)), ODD, space)
    rep = B.representation()
    z = GradedOperator(rep[M + 1], EVEN, space)
    return SpectralTriple(space, D, {"z": z}, B, rep)


def build_fibration(params):
    """The module ``E`` of the torus over the circle with ``S = diag(n)``.

    Fibers ``e_n``, ``|n| <= N``, over the circle cutoff ``M``. The
    connection is flat in this basis and ``A_theta`` acts through the
    crossed product: ``u`` shifts fibers and ``v`` multiplies the fiber
    ``e_n`` by ``exp(-2 pi i n theta) z``.
    """
    p = params
    B = CircleAlgebra(p.M)
    r = 2 * p.N + 1
    ns = np.arange(-p.N, p.N + 1)
    S = np.zeros((r, r, B.dim), dtype=complex)
    S[np.arange(r), np.arange(r), p.M] = ns
    u = np.zeros((r, r, B.dim), dtype=complex)
    u[np.arange(1, r), np.arange(r - 1), p.M] = 1.0
    v = np.zeros((r, r, B.dim), dtype=complex)
    v[np.arange(r), np.arange(r), p.M + 1] = np.exp(-2j * np.pi * ns * p.theta)
    return Correspondence(
        B, S, np.zeros((r, r, B.dim)), None, False, {"u": u, "v": v}, name="fibration"
    )


def identification_map(params):
    """Unitary ``e_n (x) e_k -> exp(2 pi i k n theta) e_(n,k)``.

    The phase moves the rotation carried by ``v`` on the fibers onto ``u``.
    """
    n, k = params.modes()
    return np.diag(np.exp(2j * np.pi * k * n * params.theta))


# ---------------------------------------------------------------------------
# factorization


@dataclass(frozen=True)
class FactorizationReport:
    """Comparison of the composed fibration with the torus triple."""

    theta: float
    N: int
    M: int
    interior_residual: float
    full_residual: float
    spectral_residual: float
    intertwining_u: float
    intertwining_v: float

    def to_json(self):
        return {
            "theta": self.theta,
            "N": self.N,
            "M": self.M,
            "interior_residual": self.interior_residual,
            "full_residual": self.full_residual,
            "spectral_residual": self.spectral_residual,
            "intertwining": {"u": self.intertwining_u, "v": self.intertwining_v},
        }


def verify_factorization(params):
    """Compose the fibration with the circle triple and compare with the torus.

    The product of the two odd cycles is assembled from the summands
    ``X = S (x) 1`` and ``Y = 1 (x)_nabla T`` of the composition as
    ``[[0, X - iY], [X + iY, 0]]`` and transported by
    :func:`identification_map`.

    ``interior_residual`` is the largest of the entrywise difference of the
    operators, the generator intertwining residuals, the relation residual
    and the unitarity defect of the transported generators, all restricted
    to interior modes. The truncated generators are partial isometries, so
    the unitarity defect is 1 on the boundary. ``full_residual`` is the same quantity over all modes.
    ``spectral_residual`` compares sorted interior spectra.
    """
    p = params
    torus = build_torus_triple(p)
    product = compose(build_fibration(p), build_circle_triple(p.M))
    X = product.components["S_part"].matrix
    Y = product.components["lift"].matrix
    W = identification_map(p)
    W2 = np.kron(np.eye(2), W)
    D_fact = W2 @ assemble_odd_pair(X, Y).matrix @ W2.conj().T
    D_torus = torus.D.matrix
    d = p.dim
    mask = p.interior()
    mask2 = np.r_[mask, mask]

    u_fact = W @ product.generators["u"].matrix @ W.conj().T
    v_fact = W @ product.generators["v"].matrix @ W.conj().T
    u_t, v_t = torus.u.matrix[:d, :d], torus.v.matrix[:d, :d]

    def entrywise(A, B, m):
        diff = (A - B)[np.ix_(m, m)]
        return float(np.abs(diff).max()) if diff.size else 0.0

    def columns(A, B, m):
        diff = (A - B)[:, m]
        return float(np.abs(diff).max()) if diff.size else 0.0

    def unitarity(g, m):
        gram = (g.conj().T @ g)[np.ix_(m, m)]
        return float(np.abs(gram - np.eye(gram.shape[0])).max()) if gram.size else 0.0

    res_u_int = columns(u_fact, u_t, mask)
    res_v_int = columns(v_fact, v_t, mask)
    full = np.ones(d, dtype=bool)
    interior = max(
        entrywise(D_fact, D_torus, mask2),
        res_u_int,
        res_v_int,
        _relation_residual(u_fact, v_fact, p, interior=True),
        unitarity(u_fact, mask),
        unitarity(v_fact, mask),
    )
    full_res = max(
        entrywise(D_fact, D_torus, np.r_[full, full]),
        columns(u_fact, u_t, full),
        columns(v_fact, v_t, full),
        _relation_residual(u_fact, v_fact, p, interior=False),
        unitarity(u_fact, full),
        unitarity(v_fact, full),
    )
    ev_fact = np.linalg.eigvalsh(D_fact[np.ix_(mask2, mask2)])
    ev_torus = np.linalg.eigvalsh(D_torus[np.ix_(mask2, mask2)])
    spectral = float(np.abs(ev_fact - ev_torus).max()) if ev_fact.size else 0.0
    return FactorizationReport(
        p.theta, p.N, p.M, interior, full_res, spectral, res_u_int, res_v_int
    )
