"""Correspondences ``(E, S, nabla)``, spectral triples and their products.

Modules are free right modules ``E = C^r (x) B`` over a base model ``B``
(:class:`~kkcycle.algebras.CircleAlgebra` or
:class:`~kkcycle.algebras.FiniteAlgebra`). A module element is an array of
shape ``(r, dim B)``; a base-linear operator is an ``r x r`` matrix with
entries in ``B``, stored with shape ``(r, r, dim B)``.

The connection is stored by its values on the basis::

    nabla(e_n) = sum_m e_m (x) omega[m, n]

and extended by Leibniz, so on a column ``x`` it acts as ``omega x + dx``.

Realizing ``E (x)_B H`` for a ``B``-representation on ``H`` uses the basis
``e_n (x) h`` at position ``n * dim H + h`` (see :mod:`kkcycle.graded`).
Bases used in correspondences are trivially graded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .algebras import CircleAlgebra, FiniteAlgebra, universal_one_forms
from .graded import (
    DEFAULT_TOL,
    EVEN,
    ODD,
    GradedOperator,
    GradedSpace,
    graded_tensor,
    identity,
    operator_norm,
)

__all__ = [
    "OutOfBandError",
    "VERDICT_TOL",
    "SpectralTriple",
    "Correspondence",
    "IsoReport",
    "realize_base_matrix",
    "realize_connection",
    "connection_commutator",
    "check_leibniz",
    "check_hermitian",
    "module_axioms_report",
    "basis_samples",
    "inner",
    "lift_operator",
    "compose",
    "assemble_odd_pair",
    "doubled",
    "external_product",
    "compare_up_to_iso",
    "identity_correspondence",
    "reassociation",
    "random_composable",
]

VERDICT_TOL = 1e-8


class OutOfBandError(ValueError):
    """A sample would leave the truncation band."""


# ---------------------------------------------------------------------------
# spectral triples


@dataclass(frozen=True, eq=False)
class SpectralTriple:
    """Algebra generators, a graded space and an odd self-adjoint operator.

    Parameters
    ----------
    space : GradedSpace
    D : GradedOperator
        Odd and self-adjoint. On a trivially graded space the degree is
        formal and only enters Koszul signs.
    generators : dict of str to GradedOperator
    algebra : CircleAlgebra or FiniteAlgebra, optional
        Base model, required when the triple is the right factor of a
        composition.
    rep : ndarray, shape (dim B, n, n), optional
        Images of the basis of ``algebra``.
    components : dict, optional
        Named summands of ``D`` recorded by constructions such as
        :func:`compose`.
    """

    space: GradedSpace
    D: GradedOperator
    generators: dict = field(default_factory=dict)
    algebra: object = None
    rep: np.ndarray = None
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.D.space != self.space:
            raise ValueError("Dirac operator does not act on the triple's space")
        if self.D.degree != ODD:
            raise ValueError("Dirac operator must be odd")
        if not self.D.is_selfadjoint(DEFAULT_TOL):
            raise ValueError(
                f"Dirac operator is not self-adjoint (residual {self.D.selfadjoint_residual():.3e})"
            )
        for name, a in self.generators.items():
            if a.space != self.space:
                raise ValueError(f"generator {name!r} acts on a different space")
        if self.rep is not None:
            rep = np.array(self.rep, dtype=complex)
            n = self.space.dim
            if rep.ndim != 3 or rep.shape[1:] != (n, n):
                raise ValueError("rep must have shape (dim B, n, n)")
            if self.algebra is not None and rep.shape[0] != self.algebra.dim:
                raise ValueError("rep does not match the base algebra dimension")
            rep.setflags(write=False)
            object.__setattr__(self, "rep", rep)

    @property
    def dim(self):
        return self.space.dim

    def commutator_norms(self):
        """``||[D, a]||`` for every generator (graded commutator)."""
        from .graded import graded_commutator

        return {k: operator_norm(graded_commutator(self.D, a)) for k, a in self.generators.items()}

    def represent(self, b):
        """Image of a base element under ``rep``."""
        if self.rep is None:
            raise ValueError("this triple carries no base representation")
        return np.tensordot(np.asarray(b, dtype=complex), self.rep, axes=1)


# ---------------------------------------------------------------------------
# correspondences


@dataclass(frozen=True, eq=False)
class Correspondence:
    """Free right ``B``-module with odd operator ``S`` and a connection.

    Parameters
    ----------
    base : CircleAlgebra or FiniteAlgebra
        The right algebra ``B``; it must be trivially graded.
    S : ndarray, shape (r, r, dim B)
        Odd, self-adjoint, base-linear operator as a matrix over ``B``.
    nabla : ndarray, shape (r, r, forms_dim)
        ``nabla[m, n]`` is the coefficient of ``e_m`` in ``nabla(e_n)``.
    parity : array_like, optional
        Grading of the module basis (all even by default).
    graded : bool
        Whether the module is Z/2-graded. Ungraded modules model odd cycles.
    left : dict of str to ndarray, optional
        Named left-action generators as matrices over ``B``.
    source : FiniteAlgebra, optional
        Left algebra ``A`` when the left action is a full representation.
    left_rep : ndarray, shape (dim A, r, r, dim B), optional
        Images of the basis of ``source``.
    """

    base: object
    S: np.ndarray
    nabla: np.ndarray
    parity: np.ndarray = None
    graded: bool = True
    left: dict = field(default_factory=dict)
    source: object = None
    left_rep: np.ndarray = None
    name: str = ""

    def __post_init__(self):
        B = self.base
        if getattr(B, "graded", False):
            raise ValueError("correspondences need a trivially graded base algebra")
        S = np.array(self.S, dtype=complex)
        r = S.shape[0]
        if S.shape != (r, r, B.dim):
            raise ValueError(f"S must have shape (r, r, {B.dim}), got {S.shape}")
        nabla = np.array(self.nabla, dtype=complex)
        if nabla.shape != (r, r, B.forms_dim):
            raise ValueError(
                f"nabla must have shape ({r}, {r}, {B.forms_dim}), got {nabla.shape}"
            )
        parity = np.zeros(r, np.int8) if self.parity is None else np.array(self.parity, np.int8)
        if parity.shape != (r,):
            raise ValueError("parity needs one label per module basis vector")
        if not self.graded and parity.any():
            raise ValueError("an ungraded module has only even basis vectors")
        left = {k: np.array(v, dtype=complex) for k, v in self.left.items()}
        left_rep = None
        if self.left_rep is not None:
            left_rep = np.array(self.left_rep, dtype=complex)
            if self.source is None or left_rep.shape != (self.source.dim, r, r, B.dim):
                raise ValueError("left_rep must have shape (dim A, r, r, dim B)")
            for i in range(left_rep.shape[0]):
                left.setdefault(f"e{i}", left_rep[i])
        for k, v in left.items():
            if v.shape != (r, r, B.dim):
                raise ValueError(f"left generator {k!r} has shape {v.shape}")
        for name, val in (("S", S), ("nabla", nabla), ("parity", parity)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "left_rep", left_rep)
        if self.graded:
            odd_mask = (parity[:, None] + parity[None, :]) % 2 == 0
            if np.abs(S[odd_mask]).max(initial=0.0) > 1e-12:
                raise ValueError("S is not odd with respect to the module grading")
            even_mask = ~odd_mask
            if np.abs(nabla[even_mask]).max(initial=0.0) > 1e-12:
                raise ValueError("the connection is not even")
            for k, v in left.items():
                if np.abs(v[even_mask]).max(initial=0.0) > 1e-12:
                    raise ValueError(f"left generator {k!r} is not even")
        sa = np.abs(S - star_matrix(B, S)).max(initial=0.0)
        if sa > DEFAULT_TOL * max(1.0, np.abs(S).max(initial=0.0)):
            raise ValueError(f"S is not self-adjoint (residual {sa:.3e})")

    @property
    def rank(self):
        return self.S.shape[0]

    @property
    def signs(self):
        return 1 - 2 * self.parity.astype(float)

    def left_action(self, a):
        """Matrix over ``B`` of the left action of ``a`` in ``source``."""
        if self.left_rep is None:
            raise ValueError("this correspondence carries no left representation")
        return np.tensordot(np.asarray(a, dtype=complex), self.left_rep, axes=1)

    def with_connection(self, nabla):
        return Correspondence(
            self.base, self.S, nabla, self.parity, self.graded, dict(self.left),
            self.source, self.left_rep, self.name,
        )

    def apply_connection(self, x):
        """``nabla(x) = omega x + dx`` for a module element ``x``."""
        B = self.base
        x = np.asarray(x, dtype=complex)
        out = np.stack([B.d(x[m]) for m in range(self.rank)])
        for m in range(self.rank):
            for n in range(self.rank):
                if np.any(self.nabla[m, n]):
                    out[m] = out[m] + B.form_rmul(self.nabla[m, n], x[n])
        return out

    def apply_S(self, x):
        return base_matvec(self.base, self.S, x)

    def to_json(self):
        B = self.base
        base = (
            {"kind": "circle", "cutoff": B.cutoff}
            if isinstance(B, CircleAlgebra)
            else {"kind": "finite", "dim": B.dim, "name": B.name}
        )
        sparse = []
        for m in range(self.rank):
            for n in range(self.rank):
                if np.any(self.nabla[m, n]):
                    sparse.append({"row": m, "fiber": n, "coeffs": _pairs(self.nabla[m, n])})
        return {
            "fibers": self.rank,
            "base": base,
            "parity": [int(p) for p in self.parity],
            "graded": bool(self.graded),
            "left": {k: _pairs(v) for k, v in sorted(self.left.items())},
            "S": _pairs(self.S),
            "nabla": sparse,
        }

    @classmethod
    def from_json(cls, doc, base=None):
        """Inverse of :meth:`to_json`; finite bases must be passed explicitly."""
        kind = doc["base"]
        if kind["kind"] == "circle":
            base = CircleAlgebra(kind["cutoff"])
        elif base is None:
            raise ValueError("a FiniteAlgebra base must be supplied")
        r = doc["fibers"]
        nabla = np.zeros((r, r, base.forms_dim), dtype=complex)
        for entry in doc["nabla"]:
            nabla[entry["row"], entry["fiber"]] = _unpairs(entry["coeffs"])
        return cls(
            base,
            _unpairs(doc["S"]),
            nabla,
            doc["parity"],
            doc["graded"],
            {k: _unpairs(v) for k, v in doc["left"].items()},
        )

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def _pairs(arr):
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _unpairs(obj):
    arr = np.asarray(obj, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


# ---------------------------------------------------------------------------
# matrices over the base


def base_matvec(B, X, x):
    """``(X x)_m = sum_n X[m, n] x[n]`` with products in ``B``."""
    x = np.asarray(x, dtype=complex)
    r = X.shape[0]
    out = np.zeros((r, B.dim), dtype=complex)
    for m in range(r):
        for n in range(X.shape[1]):
            if np.any(X[m, n]) and np.any(x[n]):
                out[m] += B.mul(X[m, n], x[n])
    return out


def base_matmul(B, X, Y):
    """Product of two matrices over a finite algebra."""
    return np.einsum("mka,knb,abc->mnc", X, Y, B.structure)


def star_matrix(B, X):
    """Adjoint of a matrix over ``B``: transpose and apply the involution."""
    r, s = X.shape[:2]
    out = np.zeros((s, r, X.shape[2]), dtype=complex)
    for m in range(r):
        for n in range(s):
            out[n, m] = B.star(X[m, n])
    return out


def form_star_matrix(B, W):
    r, s = W.shape[:2]
    out = np.zeros((s, r, W.shape[2]), dtype=complex)
    for m in range(r):
        for n in range(s):
            out[n, m] = B.form_star(W[m, n])
    return out


def realize_base_matrix(B, X, rep):
    """``sum_mn E_mn (x) rho(X[m, n])`` on the realized space."""
    r, s = X.shape[:2]
    blocks = np.einsum("mnb,bij->minj", X, rep)
    return blocks.reshape(r * rep.shape[1], s * rep.shape[2])


def _form_matrix_realization(B, W, rep, T):
    r = W.shape[0]
    n = rep.shape[1]
    out = np.zeros((r * n, r * n), dtype=complex)
    for m in range(r):
        for k in range(r):
            if np.any(W[m, k]):
                out[m * n : (m + 1) * n, k * n : (k + 1) * n] = B.j(W[m, k], rep, T)
    return out


def _base_of(t):
    if t.algebra is None or t.rep is None:
        raise ValueError("the spectral triple carries no base algebra representation")
    return t.algebra


def realize_connection(c, t):
    """Matrix of ``e_n (x) h -> e_n (x) T h + sum_m e_m (x) j_T(omega[m, n]) h``.

    This is the connection paired with the operator of ``t`` without any
    Koszul sign; :func:`lift_operator` adds the signs.
    """
    if _base_of(t) != c.base:
        raise ValueError("the correspondence and the triple have different bases")
    T = t.D.matrix
    eye = np.eye(c.rank)
    return np.kron(eye, T) + _form_matrix_realization(c.base, c.nabla, t.rep, T)


def connection_commutator(c, X):
    """``[nabla, X] = dX + omega X - X omega`` for a matrix ``X`` over ``B``."""
    B = c.base
    X = np.asarray(X, dtype=complex)
    r = c.rank
    out = np.zeros((r, r, B.forms_dim), dtype=complex)
    for m in range(r):
        for n in range(r):
            out[m, n] = B.d(X[m, n])
            for k in range(r):
                if np.any(c.nabla[m, k]) and np.any(X[k, n]):
                    out[m, n] += B.form_rmul(c.nabla[m, k], X[k, n])
                if np.any(X[m, k]) and np.any(c.nabla[k, n]):
                    out[m, n] -= B.form_lmul(X[m, k], c.nabla[k, n])
    return out


# ---------------------------------------------------------------------------
# axioms


def _form_norm(B, w):
    w = np.asarray(w, dtype=complex)
    if isinstance(B, CircleAlgebra):
        return float(np.linalg.norm(B.realize(w, B.representation()), 2)) if np.any(w) else 0.0
    return float(np.linalg.norm(w))


def _element_norm(B, b):
    b = np.asarray(b, dtype=complex)
    if not np.any(b):
        return 0.0
    return float(np.linalg.norm(B.realize(b, B.representation()), 2))


def _module_band(B, x):
    return max(B.band(row) for row in np.atleast_2d(x))


def _connection_band(c):
    return max((c.base.form_band(w) for w in c.nabla.reshape(-1, c.base.forms_dim) if np.any(w)), default=0)


def _as_module(c, x):
    x = np.asarray(getattr(x, "coeffs", x), dtype=complex)
    if x.shape != (c.rank, c.base.dim):
        raise ValueError(f"module element must have shape ({c.rank}, {c.base.dim})")
    return x


def _as_base(c, b):
    return c.base.element(b)


def _require_band(c, total, what):
    if isinstance(c.base, CircleAlgebra) and total > c.base.cutoff:
        raise OutOfBandError(
            f"{what} reaches Fourier degree {total} beyond the cutoff {c.base.cutoff}"
        )


def check_leibniz(c, samples):
    """Largest ``nabla(xb) - nabla(x) b - x db`` over ``(x, b)`` samples.

    Each entry of the defect is measured by the operator norm of the
    realized form (circle) or the Euclidean norm in ``B (x) B`` (finite).
    Samples whose products would leave the truncation band are rejected.
    """
    B = c.base
    worst = 0.0
    cb = _connection_band(c)
    for x, b in samples:
        x = _as_module(c, x)
        b = _as_base(c, b)
        _require_band(c, _module_band(B, x) + B.band(b) + cb, "Leibniz sample")
        xb = np.stack([B.mul(row, b) for row in x])
        lhs = c.apply_connection(xb)
        nx = c.apply_connection(x)
        db = B.d(b)
        rhs = np.stack([B.form_rmul(nx[m], b) + B.form_lmul(x[m], db) for m in range(c.rank)])
        worst = max(worst, max(_form_norm(B, w) for w in lhs - rhs))
    return worst


def inner(c, x, y):
    """``<x, y> = sum_m x[m]* y[m]``."""
    B = c.base
    return sum(B.mul(B.star(x[m]), y[m]) for m in range(c.rank))


def check_hermitian(c, samples):
    """Largest ``<x, nabla y> - <nabla x, y> - d<x, y>`` over ``(x, y)`` pairs.

    Forms are adjointed as operators, so a base-linear perturbation ``A``
    of a Hermitian connection leaves the defect ``(A - A*)`` on basis pairs.
    """
    B = c.base
    worst = 0.0
    cb = _connection_band(c)
    for x, y in samples:
        x = _as_module(c, x)
        y = _as_module(c, y)
        _require_band(c, _module_band(B, x) + _module_band(B, y) + cb, "Hermitian sample")
        nx, ny = c.apply_connection(x), c.apply_connection(y)
        first = sum(B.form_lmul(B.star(x[m]), ny[m]) for m in range(c.rank))
        second = sum(B.form_rmul(B.form_star(nx[m]), y[m]) for m in range(c.rank))
        defect = first - second - B.d(inner(c, x, y))
        worst = max(worst, _form_norm(B, defect))
    return worst


def basis_samples(c, degree=0):
    """Pairs of basis-type module elements ``e_m z^j`` (circle) or ``e_m e_i``."""
    B = c.base
    elems = []
    if isinstance(B, CircleAlgebra):
        degs = range(-degree, degree + 1)
        for m in range(c.rank):
            for j in degs:
                x = np.zeros((c.rank, B.dim), dtype=complex)
                x[m, j + B.cutoff] = 1.0
                elems.append(x)
    else:
        for m in range(c.rank):
            for i in range(B.dim):
                x = np.zeros((c.rank, B.dim), dtype=complex)
                x[m, i] = 1.0
                elems.append(x)
    return elems


def module_axioms_report(c, samples, base_samples, tol=1e-12):
    """Inner-product axioms and base-linearity of ``S`` on samples.

    Returns a dict with ``base_linearity``, ``positivity`` (most negative
    eigenvalue of realized ``<x, x>``), ``right_linearity``, ``symmetry``
    and ``ok``.
    """
    B = c.base
    rep = B.representation()
    lin = pos = right = sym = 0.0
    neg = 0.0
    for x in samples:
        x = _as_module(c, x)
        gram = B.realize(inner(c, x, x), rep)
        if np.any(x):
            neg = min(neg, float(np.linalg.eigvalsh((gram + gram.conj().T) / 2).min()))
        for b in base_samples:
            b = B.element(b)
            _require_band(c, _module_band(B, x) + B.band(b) + _module_band(B, c.S.reshape(-1, B.dim)), "module sample")
            xb = np.stack([B.mul(row, b) for row in x])
            lin = max(lin, float(np.abs(c.apply_S(xb) - np.stack([B.mul(r, b) for r in c.apply_S(x)])).max()))
        for y in samples:
            y = _as_module(c, y)
            sym = max(sym, float(np.abs(inner(c, x, y) - B.star(inner(c, y, x))).max()))
            for b in base_samples:
                b = B.element(b)
                yb = np.stack([B.mul(row, b) for row in y])
                right = max(right, float(np.abs(inner(c, x, yb) - B.mul(inner(c, x, y), b)).max()))
    pos = neg
    ok = lin <= tol and pos >= -tol and right <= tol and sym <= tol
    return {
        "base_linearity": lin,
        "positivity": pos,
        "right_linearity": right,
        "symmetry": sym,
        "ok": bool(ok),
    }


# ---------------------------------------------------------------------------
# lift and composition


def _column_signs(c, dimH, degree):
    if degree % 2 == 0 or not c.graded:
        return np.ones(c.rank * dimH)
    return np.repeat(c.signs, dimH)


def _product_space(c, space):
    if c.graded and space.graded:
        return GradedSpace(((c.parity[:, None] + space.parity[None, :]) % 2).ravel())
    return GradedSpace.ungraded(c.rank * space.dim)


def lift_operator(c, t):
    """``1 (x)_nabla T`` on ``E (x)_B H`` as a GradedOperator.

    ``e_n (x) h -> (-1)^(deg e_n deg T) (e_n (x) T h + sum_m e_m (x) j_T(omega[m, n]) h)``.
    """
    mat = realize_connection(c, t) * _column_signs(c, t.dim, t.D.degree)[None, :]
    return GradedOperator(mat, t.D.degree, _product_space(c, t.space))


def _S_part(c, t):
    return GradedOperator(
        realize_base_matrix(c.base, c.S, t.rep), ODD, _product_space(c, t.space)
    )


def _compose_with_triple(c, t):
    _base_of(t)
    S_part = _S_part(c, t)
    lift = lift_operator(c, t)
    space = S_part.space
    D = GradedOperator(S_part.matrix + lift.matrix, ODD, space)
    gens = {
        k: GradedOperator(realize_base_matrix(c.base, v, t.rep), EVEN, space)
        for k, v in c.left.items()
    }
    rep = None
    if c.left_rep is not None:
        rep = np.stack([realize_base_matrix(c.base, X, t.rep) for X in c.left_rep])
    return SpectralTriple(
        space, D, gens, c.source, rep, {"S_part": S_part, "lift": lift}
    )


def _finite_j(B, W, rhoB, delta_vals, lmul):
    """``sum_ab W[a, b] rho(e_a) delta(e_b)`` with a supplied product."""
    out = None
    d = B.dim
    W = W.reshape(d, d)
    for a in range(d):
        for b in range(d):
            if W[a, b] != 0:
                term = W[a, b] * lmul(rhoB[a], delta_vals[b])
                out = term if out is None else out + term
    return out


def _compose_correspondences(c1, c2):
    if not isinstance(c1.base, FiniteAlgebra) or c2.source is None:
        raise ValueError(
            "correspondence composition needs a finite middle algebra and a "
            "left representation on the second factor"
        )
    if c2.source is not c1.base and not _same_algebra(c2.source, c1.base):
        raise ValueError("the middle algebras do not match")
    B, C = c1.base, c2.base
    r1, r2 = c1.rank, c2.rank
    rho2 = c2.left_rep  # (dB, r2, r2, dC)

    def rho(b):
        return np.tensordot(b, rho2, axes=1)

    def mm(X, Y):
        return base_matmul(C, X, Y)

    def lmul_forms(X, W):
        out = np.zeros((X.shape[0], W.shape[1], C.forms_dim), dtype=complex)
        for m in range(X.shape[0]):
            for n in range(W.shape[1]):
                for k in range(X.shape[1]):
                    if np.any(X[m, k]) and np.any(W[k, n]):
                        out[m, n] += C.form_lmul(X[m, k], W[k, n])
        return out

    # derivations of B into matrices over C
    eyeB = np.eye(B.dim)
    dS = np.stack([mm(c2.S, rho(eyeB[b])) - mm(rho(eyeB[b]), c2.S) for b in range(B.dim)])
    dN = np.stack([connection_commutator(c2, rho(eyeB[b])) for b in range(B.dim)])
    rhoB = np.stack([rho(eyeB[a]) for a in range(B.dim)])

    parity = ((c1.parity[:, None] + c2.parity[None, :]) % 2).ravel()
    graded = c1.graded and c2.graded
    S = np.zeros((r1 * r2, r1 * r2, C.dim), dtype=complex)
    nabla = np.zeros((r1 * r2, r1 * r2, C.forms_dim), dtype=complex)
    sig = c1.signs if c1.graded else np.ones(r1)
    for i in range(r1):
        for j in range(r1):
            blk = rho(c1.S[i, j])
            wblk = np.zeros((r2, r2, C.forms_dim), dtype=complex)
            if i == j:
                blk = blk + sig[j] * c2.S
                wblk = wblk + c2.nabla
            if np.any(c1.nabla[i, j]):
                blk = blk + sig[j] * _finite_j(B, c1.nabla[i, j], rhoB, dS, mm)
                wblk = wblk + _finite_j(B, c1.nabla[i, j], rhoB, dN, lmul_forms)
            S[i * r2 : (i + 1) * r2, j * r2 : (j + 1) * r2] = blk
            nabla[i * r2 : (i + 1) * r2, j * r2 : (j + 1) * r2] = wblk

    left = {}
    for k, X in c1.left.items():
        left[k] = _lift_base_matrix(X, rho, r2, C.dim)
    left_rep = None
    if c1.left_rep is not None:
        left_rep = np.stack([_lift_base_matrix(X, rho, r2, C.dim) for X in c1.left_rep])
    return Correspondence(C, S, nabla, parity if graded else None, graded, left, c1.source, left_rep)


def _lift_base_matrix(X, rho, r2, dC):
    r1 = X.shape[0]
    out = np.zeros((r1 * r2, r1 * r2, dC), dtype=complex)
    for i in range(r1):
        for j in range(r1):
            if np.any(X[i, j]):
                out[i * r2 : (i + 1) * r2, j * r2 : (j + 1) * r2] = rho(X[i, j])
    return out


def _same_algebra(A, B):
    return (
        isinstance(A, FiniteAlgebra)
        and isinstance(B, FiniteAlgebra)
        and A.dim == B.dim
        and np.allclose(A.structure, B.structure, atol=1e-14)
    )


def compose(c1, c2):
    """Product ``(E1 (x)_B E2, S1 (x) 1 + 1 (x)_nabla S2, 1 (x)_nabla nabla2)``.

    ``c2`` is a :class:`SpectralTriple` over the base of ``c1`` (result: a
    spectral triple, with summands recorded in ``components``) or a
    :class:`Correspondence` whose left algebra is that base (result: a
    correspondence). The composed connection uses the derivation
    ``b -> [nabla2, b]``.
    """
    if isinstance(c2, SpectralTriple):
        return _compose_with_triple(c1, c2)
    if isinstance(c2, Correspondence):
        return _compose_correspondences(c1, c2)
    raise TypeError(f"cannot compose with {type(c2).__name__}")


def assemble_odd_pair(X, Y):
    """``[[0, X - iY], [X + iY, 0]]`` on two copies, first copy even.

    Combines two anticommuting (or commuting, as for two ungraded odd
    cycles) self-adjoint parts into one odd operator whose square is
    ``(X^2 + Y^2)`` on each summand whenever ``[X, Y] = 0``.
    """
    X = X.matrix if isinstance(X, GradedOperator) else np.asarray(X)
    Y = Y.matrix if isinstance(Y, GradedOperator) else np.asarray(Y)
    n = X.shape[0]
    Z = np.zeros((n, n), dtype=complex)
    mat = np.block([[Z, X - 1j * Y], [X + 1j * Y, Z]])
    return GradedOperator(mat, ODD, GradedSpace.split(n, n))


def doubled(t):
    """``(H (+) H, [[0, D], [D, 0]], a (+) a)``: an odd triple made even."""
    n = t.dim
    Z = np.zeros((n, n))
    space = GradedSpace.split(n, n)
    D = GradedOperator(np.block([[Z, t.D.matrix], [t.D.matrix, Z]]), ODD, space)
    gens = {
        k: GradedOperator(np.kron(np.eye(2), a.matrix), EVEN, space)
        for k, a in t.generators.items()
    }
    rep = None if t.rep is None else np.stack([np.kron(np.eye(2), r) for r in t.rep])
    return SpectralTriple(space, D, gens, t.algebra, rep)


def external_product(t1, t2):
    """``(H1 (x) H2, D1 (x) 1 + 1 (x) D2)`` with the Koszul sign."""
    id1, id2 = identity(t1.space), identity(t2.space)
    S_part = graded_tensor(t1.D, id2)
    T_part = graded_tensor(id1, t2.D)
    D = GradedOperator(S_part.matrix + T_part.matrix, ODD, S_part.space)
    gens = {f"{k}(x)1": graded_tensor(a, id2) for k, a in t1.generators.items()}
    gens.update({f"1(x){k}": graded_tensor(id1, b) for k, b in t2.generators.items()})
    return SpectralTriple(S_part.space, D, gens, components={"S_part": S_part, "lift": T_part})


# ---------------------------------------------------------------------------
# isomorphisms


@dataclass(frozen=True)
class IsoReport:
    """Conjugation residuals of a candidate isomorphism.

    ``operator_verdict`` ignores connections; ``verdict`` also demands that
    connections are intertwined.
    """

    operator: float
    connection: float
    generators: dict
    tol: float

    @property
    def operator_verdict(self):
        return bool(
            self.operator <= self.tol
            and all(v <= self.tol for v in self.generators.values())
        )

    @property
    def verdict(self):
        return self.operator_verdict and self.connection <= self.tol

    def to_json(self):
        return {
            "operator": self.operator,
            "connection": self.connection,
            "generators": dict(sorted(self.generators.items())),
            "operator_verdict": self.operator_verdict,
            "verdict": self.verdict,
        }


def _inverse(g):
    g = g.matrix if isinstance(g, GradedOperator) else np.asarray(g, dtype=complex)
    if isinstance(g, np.ndarray) and g.ndim != 2:
        raise ValueError("the witness must be a square matrix")
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > 1e12:
        raise ValueError(f"the witness is singular (condition number {cond:.3e})")
    return g, np.linalg.inv(g)


def compare_up_to_iso(x, y, g, tol=VERDICT_TOL):
    """Residuals of ``g^-1 y g - x`` for operators, connections and generators.

    ``g`` maps the space of ``x`` to the space of ``y``.

    For spectral triples ``g`` acts on the Hilbert space; for
    correspondences it is a scalar matrix on the module basis, acting as
    ``g (x) 1_B``.
    """
    if isinstance(g, GradedOperator) and g.degree != EVEN:
        raise ValueError("the witness must be even")
    G, Gi = _inverse(g)
    if isinstance(x, SpectralTriple) and isinstance(y, SpectralTriple):
        if x.dim != y.dim or G.shape != (x.dim, x.dim):
            return IsoReport(np.inf, 0.0, {}, tol)
        op = float(np.abs(Gi @ y.D.matrix @ G - x.D.matrix).max())
        gens = {
            k: float(np.abs(Gi @ y.generators[k].matrix @ G - a.matrix).max())
            if k in y.generators
            else np.inf
            for k, a in x.generators.items()
        }
        return IsoReport(op, 0.0, gens, tol)
    if isinstance(x, Correspondence) and isinstance(y, Correspondence):
        if x.rank != y.rank or G.shape != (x.rank, x.rank):
            return IsoReport(np.inf, np.inf, {}, tol)

        def conj(X):
            return np.einsum("ij,jkb,kl->ilb", Gi, X, G)

        op = float(np.abs(conj(y.S) - x.S).max())
        conn = float(np.abs(conj(y.nabla) - x.nabla).max())
        gens = {
            k: float(np.abs(conj(y.left[k]) - a).max()) if k in y.left else np.inf
            for k, a in x.left.items()
        }
        return IsoReport(op, conn, gens, tol)
    raise TypeError("compare_up_to_iso needs two triples or two correspondences")


def reassociation(c1, c2, t):
    """Unitary from ``(E1 (x) E2) (x) H`` to ``E1 (x) (E2 (x) H)``.

    Both sides enumerate ``e_i (x) f_k (x) h`` with the last index fastest,
    so the map is the permutation taking ``((i, k), h)`` to ``(i, (k, h))``.
    """
    r1, r2, n = c1.rank, c2.rank, t.dim
    perm = np.empty(r1 * r2 * n, dtype=np.int64)
    for i in range(r1):
        for k in range(r2):
            for h in range(n):
                left = (i * r2 + k) * n + h
                right = i * (r2 * n) + (k * n + h)
                perm[left] = right
    P = np.zeros((perm.size, perm.size))
    P[perm, np.arange(perm.size)] = 1.0
    space = _product_space(c1, _product_space(c2, t.space))
    return GradedOperator(P, EVEN, space)


def identity_correspondence(B):
    """``(B, 0, d)``: rank one, zero operator, universal connection."""
    if not isinstance(B, FiniteAlgebra):
        raise TypeError("identity correspondences are built over finite algebras")
    eye = np.eye(B.dim)
    left_rep = eye[:, None, None, :]
    return Correspondence(
        B,
        np.zeros((1, 1, B.dim)),
        np.zeros((1, 1, B.forms_dim)),
        [0],
        True,
        source=B,
        left_rep=left_rep,
        name=f"id_{B.name}",
    )


# ---------------------------------------------------------------------------
# random instances


_ALGEBRAS = ("C2", "M2", "C3")


def _algebra(name):
    return {
        "C2": lambda: FiniteAlgebra.diagonal(2),
        "M2": lambda: FiniteAlgebra.matrix_algebra(2),
        "C3": lambda: FiniteAlgebra.diagonal(3),
    }[name]()


def _random_element(rng, B):
    return rng.standard_normal(B.dim) + 1j * rng.standard_normal(B.dim)


def _random_correspondence(rng, A, B, forms):
    """``E = C^(2n) (x) B`` with ``A`` acting through its matrices, twice."""
    mats = A.matrices
    n = mats.shape[1]
    r = 2 * n
    parity = np.r_[np.zeros(n, np.int8), np.ones(n, np.int8)]
    left_rep = np.zeros((A.dim, r, r, B.dim), dtype=complex)
    for a in range(A.dim):
        pa = np.kron(np.eye(2), mats[a])
        left_rep[a] = pa[:, :, None] * B.unit[None, None, :]
    S = np.zeros((r, r, B.dim), dtype=complex)
    for i in range(n):
        for j in range(n, r):
            s = _random_element(rng, B)
            S[i, j] = s
            S[j, i] = B.star(s)
    nabla = np.zeros((r, r, B.forms_dim), dtype=complex)
    if forms.dim:
        for i in range(r):
            for j in range(i, r):
                if parity[i] != parity[j]:
                    continue
                w = forms.basis @ (rng.standard_normal(forms.dim) + 1j * rng.standard_normal(forms.dim))
                w = 0.5 * w
                nabla[i, j] += w
                nabla[j, i] += B.form_star(w)
    return Correspondence(B, S, nabla, parity, True, source=A, left_rep=left_rep)


def _random_triple(rng, C):
    mats = C.matrices
    n = mats.shape[1]
    Y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Z = np.zeros((n, n))
    space = GradedSpace.split(n, n)
    D = GradedOperator(np.block([[Z, Y], [Y.conj().T, Z]]), ODD, space)
    rep = np.stack([np.kron(np.eye(2), m) for m in mats])
    gens = {f"e{i}": GradedOperator(rep[i], EVEN, space) for i in range(C.dim)}
    return SpectralTriple(space, D, gens, C, rep)


def random_composable(seed):
    """Seeded chain ``(c1, c2, t)`` over small finite algebras ``A -> B -> C``.

    Connections are random Hermitian universal forms; operators are random
    odd self-adjoint matrices over the base.
    """
    rng = np.random.default_rng(seed)
    names = [_ALGEBRAS[i] for i in rng.integers(0, len(_ALGEBRAS), size=3)]
    A, B, C = (_algebra(n) for n in names)
    c1 = _random_correspondence(rng, A, B, universal_one_forms(B))
    c2 = _random_correspondence(rng, B, C, universal_one_forms(C))
    t = _random_triple(rng, C)
    return c1, c2, t
