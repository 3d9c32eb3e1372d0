import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kkcycle.algebras import (
    AlgebraError,
    CircleAlgebra,
    FiniteAlgebra,
    LeibnizError,
    MatrixDerivation,
    TrigPoly,
    TruncationError,
    circle_derivative,
    factor_derivation,
    multiplication_matrix,
    multiply,
    universal_derivation,
    universal_one_forms,
)

from oracles import j_on_a_db, matrix_algebra_structure, omega1_dimension

M = 4


def z(k=1, M=M):
    return TrigPoly.monomial(k, M)


coeff_lists = st.lists(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    min_size=2 * M + 1,
    max_size=2 * M + 1,
)


class TestTrigPoly:
    def test_one(self):
        one = TrigPoly.one(3)
        assert one[0] == 1 and np.count_nonzero(one.coeffs) == 1

    def test_z_times_zinv(self):
        assert multiply(z(1), z(-1)).allclose(TrigPoly.one(M), 0.0)

    def test_binomial(self):
        f = TrigPoly.one(M) + z(1)
        assert multiply(f, f).allclose(TrigPoly.from_dict({0: 1, 1: 2, 2: 1}, M), 0.0)

    def test_drop_policy(self):
        assert multiply(z(1, 1), z(1, 1)).allclose(TrigPoly.zero(1), 0.0)

    def test_error_policy(self):
        with pytest.raises(TruncationError):
            multiply(z(1, 1), z(1, 1), policy="error")

    def test_wrap_policy(self):
        assert multiply(z(1, 1), z(1, 1), policy="wrap").allclose(z(-1, 1), 0.0)

    def test_cutoff_mismatch(self):
        with pytest.raises(TruncationError):
            multiply(z(1, 2), z(1, 3))

    def test_unknown_policy(self):
        with pytest.raises(ValueError):
            multiply(z(1), z(1), policy="clip")

    def test_real_function_symmetry(self):
        f = TrigPoly.from_dict({1: 2 + 1j, -1: 2 - 1j, 0: 3}, M)
        assert f.is_real()
        assert np.allclose(f(np.linspace(0, 1, 7)).imag, 0)

    def test_conj_is_pointwise(self):
        f = TrigPoly.from_dict({2: 1j, -1: 0.5}, M)
        x = np.linspace(0, 1, 5)
        assert np.allclose(f.conj()(x), np.conj(f(x)))

    def test_rotate(self):
        f = TrigPoly.from_dict({1: 1, 3: 2j}, M)
        assert np.allclose(f.rotate(0.3)(0.1), f(0.4))

    def test_json_roundtrip(self):
        f = TrigPoly.from_dict({1: 1 + 2j, -2: -0.5}, 2)
        doc = json.loads(json.dumps(f.to_json()))
        # entries run from mode -M upward
        assert doc[0] == [-0.5, 0.0] and doc[3] == [1.0, 2.0]
        assert TrigPoly.from_json(doc).allclose(f, 0.0)

    def test_even_length_rejected(self):
        with pytest.raises(TruncationError):
            TrigPoly(np.zeros(4))

    def test_degree(self):
        assert TrigPoly.zero(3).degree() == -1
        assert TrigPoly.from_dict({-2: 1, 1: 1}, 3).degree() == 2


class TestCircleDerivative:
    def test_constant(self):
        assert circle_derivative(TrigPoly.one(M)).allclose(TrigPoly.zero(M), 0.0)

    def test_monomial(self):
        assert circle_derivative(z(3)).allclose(3 * z(3), 0.0)

    def test_sum(self):
        f = z(1) + z(-1)
        assert circle_derivative(f).allclose(z(1) - z(-1), 0.0)

    def test_matches_calculus(self):
        f = TrigPoly.from_dict({1: 0.5, -2: 1j, 3: 2}, M)
        x, h = 0.3, 1e-6
        numeric = (f(x + h) - f(x - h)) / (2 * h) / (2j * np.pi)
        assert abs(circle_derivative(f)(x) - numeric) <= 1e-6

    def test_commutator_identity(self):
        f = TrigPoly.from_dict({1: 0.5, -2: 1j, 3: 2}, M)
        K = 6
        D = np.diag(np.arange(-K, K + 1))
        Mf = multiplication_matrix(f, K)
        assert np.abs(D @ Mf - Mf @ D - multiplication_matrix(circle_derivative(f), K)).max() == 0

    @settings(max_examples=50, deadline=None)
    @given(coeff_lists, coeff_lists, st.integers(0, M))
    def test_product_rule_in_band(self, a, b, half):
        # restrict the supports so that every product mode stays in band
        ks = np.arange(-M, M + 1)
        fa = np.where(np.abs(ks) <= half, a, 0)
        fb = np.where(np.abs(ks) <= M - half, b, 0)
        f, g = TrigPoly(fa), TrigPoly(fb)
        lhs = circle_derivative(multiply(f, g))
        rhs = multiply(circle_derivative(f), g) + multiply(f, circle_derivative(g))
        assert np.abs(lhs.coeffs - rhs.coeffs).max() <= 1e-10


class TestCircleAlgebra:
    def test_representation_is_shift(self):
        B = CircleAlgebra(2)
        rep = B.representation()
        assert np.array_equal(rep[B.cutoff], np.eye(5))
        assert np.array_equal(rep[B.cutoff + 1], np.eye(5, k=-1))

    def test_j_requires_derivative(self):
        B = CircleAlgebra(2)
        rep = B.representation()
        with pytest.raises(ValueError):
            B.j(B.unit(), rep, np.zeros((5, 5)))
        w = z(1, 2).coeffs
        assert np.array_equal(B.j(w, rep, np.diag(np.arange(-2, 3))), rep[3])


def matrix_units(n):
    return [np.outer(np.eye(n)[i], np.eye(n)[j]) for i in range(n) for j in range(n)]


class TestFiniteAlgebra:
    def test_structure_matches_oracle(self):
        B = FiniteAlgebra.matrix_algebra(2)
        C, unit = matrix_algebra_structure(matrix_units(2))
        assert np.abs(B.structure - C).max() <= 1e-14
        assert np.abs(B.unit - unit).max() <= 1e-14

    def test_non_associative_rejected(self):
        C = np.zeros((2, 2, 2))
        C[0, 0, 0] = C[0, 1, 1] = C[1, 0, 1] = 1
        C[1, 1, 0] = 1
        C[1, 1, 1] = 1  # e1 e1 = e0 + e1 breaks nothing yet
        FiniteAlgebra(C, [1, 0])
        bad = C.copy()
        bad[1, 1] = [0, 0]
        bad[1, 0, 1] = 2
        with pytest.raises(AlgebraError):
            FiniteAlgebra(bad, [1, 0])

    def test_non_unital_rejected(self):
        with pytest.raises(AlgebraError):
            FiniteAlgebra.from_matrices([np.array([[0.0, 1.0], [0.0, 0.0]])])

    def test_not_closed_rejected(self):
        with pytest.raises(AlgebraError):
            FiniteAlgebra.from_matrices([np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]),
                                         np.array([[0.0, 0.0], [1.0, 0.0]])])

    def test_grading_must_be_multiplicative(self):
        with pytest.raises(AlgebraError):
            FiniteAlgebra.from_matrices([np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]])], parity=[1, 0])

    def test_gamma_is_homomorphism(self):
        B = FiniteAlgebra.matrix_algebra(2, n_odd=1)
        for i in range(B.dim):
            for j in range(B.dim):
                a, b = B.basis(i), B.basis(j)
                assert np.allclose(B.gamma(B.mul(a, b)), B.mul(B.gamma(a), B.gamma(b)))

    def test_star_from_matrices(self):
        B = FiniteAlgebra.matrix_algebra(2)
        x = np.array([1, 2j, 3, 4 - 1j])
        assert np.allclose(B.realize(B.star(x)), B.realize(x).conj().T)


ALGEBRAS = [
    ("C", FiniteAlgebra.scalars, [np.ones((1, 1))], [0], 0),
    ("C2", lambda: FiniteAlgebra.diagonal(2), [np.diag([1.0, 0]), np.diag([0, 1.0])], [0, 0], 2),
    ("M2", lambda: FiniteAlgebra.matrix_algebra(2), matrix_units(2), [0] * 4, 12),
    ("Cl1", FiniteAlgebra.clifford1, [np.eye(2), np.array([[0, 1.0], [1.0, 0]])], [0, 1], None),
]


class TestUniversalForms:
    @pytest.mark.parametrize("name,make,mats,parity,expected", ALGEBRAS, ids=[a[0] for a in ALGEBRAS])
    def test_dimension(self, name, make, mats, parity, expected):
        forms = universal_one_forms(make())
        oracle = omega1_dimension(mats, parity)
        assert forms.dim == oracle
        if expected is not None:
            assert forms.dim == expected

    @pytest.mark.parametrize("name,make,mats,parity,expected", ALGEBRAS, ids=[a[0] for a in ALGEBRAS])
    def test_kernel_and_actions(self, name, make, mats, parity, expected):
        B = make()
        forms = universal_one_forms(B)
        m = B.multiplication_map()
        assert np.abs(m @ forms.basis).max(initial=0) <= 1e-12
        for b in range(B.dim):
            w = B.form_lmul(B.basis(b), forms.basis[:, 0]) if forms.dim else None
            if w is not None:
                assert forms.contains(w)
                assert forms.contains(B.form_rmul(forms.basis[:, 0], B.basis(b)))

    def test_d_of_one(self):
        B = FiniteAlgebra.matrix_algebra(2)
        assert np.abs(universal_derivation(B, B.unit)).max() == 0

    def test_d_even(self):
        B = FiniteAlgebra.matrix_algebra(2)
        b = B.basis(1)
        assert np.array_equal(universal_derivation(B, b), np.kron(B.unit, b) - np.kron(b, B.unit))

    def test_d_odd(self):
        B = FiniteAlgebra.clifford1()
        e = B.basis(1)
        db = universal_derivation(B, e)
        assert np.allclose(db, np.kron(B.unit, e) + np.kron(e, B.unit))
        assert np.abs(B.multiplication_map() @ db).max() == 0

    @pytest.mark.parametrize("make", [FiniteAlgebra.clifford1, lambda: FiniteAlgebra.matrix_algebra(2, 1),
                                      lambda: FiniteAlgebra.diagonal(3)])
    def test_m_of_d_vanishes_and_leibniz(self, make):
        B = make()
        m = B.multiplication_map()
        for i in range(B.dim):
            assert np.abs(m @ B.d(B.basis(i))).max() == 0
            for j in range(B.dim):
                a, b = B.basis(i), B.basis(j)
                lhs = B.d(B.mul(a, b))
                rhs = B.form_rmul(B.d(a), b) + B.form_lmul(B.gamma(a), B.d(b))
                assert np.abs(lhs - rhs).max() <= 1e-14

    def test_form_star_matches_operator_adjoint(self):
        B = FiniteAlgebra.matrix_algebra(2)
        rng = np.random.default_rng(0)
        forms = universal_one_forms(B)
        w = forms.basis @ (rng.standard_normal(forms.dim) + 1j * rng.standard_normal(forms.dim))
        T = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        T = T + T.conj().T
        rep = B.matrices
        assert np.allclose(B.j(w, rep, T).conj().T, B.j(B.form_star(w), rep, T))


class TestFactorDerivation:
    def setup_method(self):
        self.B = FiniteAlgebra.matrix_algebra(2)
        rng = np.random.default_rng(11)
        self.T = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        self.delta = MatrixDerivation.commutator(self.B, self.T)

    def test_identity_commutator_is_zero(self):
        delta = MatrixDerivation.commutator(self.B, np.eye(2))
        forms = universal_one_forms(self.B)
        for a in range(forms.dim):
            assert np.abs(factor_derivation(delta, forms.basis[:, a])).max() <= 1e-14

    def test_on_exact_forms(self):
        for i in range(self.B.dim):
            b = self.B.basis(i)
            got = factor_derivation(self.delta, universal_derivation(self.B, b))
            assert np.abs(got - self.delta(b)).max() <= 1e-12

    def test_on_a_db_against_oracle(self):
        B = self.B
        a, b = B.basis(1), B.basis(2)
        w = B.form_lmul(a, B.d(b))
        ref = j_on_a_db(B.realize(a), B.realize(b), self.T)
        assert np.abs(factor_derivation(self.delta, w) - ref).max() <= 1e-12

    def test_graded_commutator_derivation(self):
        B = FiniteAlgebra.clifford1()
        T = np.array([[0.0, 2.0], [-1.0, 0.0]])
        delta = MatrixDerivation.commutator(B, T, degree=1)
        res, _ = delta.leibniz_residual()
        assert res <= 1e-14
        e = B.basis(1)
        assert np.allclose(factor_derivation(delta, B.d(e)), T @ B.realize(e) + B.realize(e) @ T)

    def test_non_derivation_rejected(self):
        vals = np.array(self.delta.values)
        vals[0] = np.eye(2)  # delta(1) != 0
        bad = MatrixDerivation(self.B, self.B.matrices, vals)
        with pytest.raises(LeibnizError) as info:
            factor_derivation(bad, self.B.d(self.B.basis(1)))
        assert info.value.pair is not None and info.value.residual > 0

    def test_non_form_rejected(self):
        with pytest.raises(ValueError):
            factor_derivation(self.delta, np.kron(self.B.unit, self.B.unit))
