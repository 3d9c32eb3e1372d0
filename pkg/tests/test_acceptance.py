"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints a single ``PASS``/``FAIL`` line with the measured values.
"""

import json
import time

import numpy as np
import pytest

from kkcycle.algebras import (
    FiniteAlgebra,
    MatrixDerivation,
    TrigPoly,
    factor_derivation,
    multiplication_matrix,
    universal_one_forms,
)
from kkcycle.analysis import (
    bounded_transform,
    circle_problem,
    connes_distance,
    projection_residuals,
    relative_boundedness_norms,
    two_point_problem,
    woronowicz_projection,
)
from kkcycle.cli import main
from kkcycle.correspondences import (
    basis_samples,
    check_hermitian,
    check_leibniz,
    compare_up_to_iso,
    compose,
    connection_commutator,
    doubled,
    external_product,
    random_composable,
    reassociation,
)
from kkcycle.graded import operator_norm
from kkcycle.nctorus import (
    GOLDEN,
    TorusParams,
    build_circle_triple,
    build_clock_shift,
    build_fibration,
    build_torus_triple,
    verify_factorization,
)

import oracles

pytestmark = pytest.mark.acceptance


@pytest.fixture
def verdict(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
        assert ok, detail

    return emit


def random_set():
    rng = np.random.default_rng(2024)
    out = []
    for _ in range(100):
        n = int(rng.integers(1, 65))
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        out.append(5.0 * (A + A.conj().T) / 2)
    return out


def test_1_torus_relation(verdict):
    start = time.perf_counter()
    crossed = {}
    for theta in (0.0, 0.5, 1 / 3, GOLDEN):
        crossed[theta] = build_torus_triple(TorusParams(theta, 16, 16)).relation_residual()
    clock = {(q, p): build_clock_shift(q, p).relation_residual()
             for q, p in [(2, 1), (3, 1), (4, 1), (5, 2), (7, 3), (16, 5)]}
    elapsed = time.perf_counter() - start
    worst_c, worst_q = max(crossed.values()), max(clock.values())
    ok = worst_c <= 1e-12 and worst_q <= 1e-14 and elapsed < 5
    verdict(1, ok, f"crossed {worst_c:.2e} <= 1e-12, clock-shift {worst_q:.2e} <= 1e-14, {elapsed:.2f}s < 5s")


def test_2_factorization(verdict):
    worst_int = worst_spec = 0.0
    slowest = 0.0
    for N in (8, 16):
        for theta in (0.0, 1 / 3, GOLDEN):
            start = time.perf_counter()
            rep = verify_factorization(TorusParams(theta, N, N))
            if N == 16:
                slowest = max(slowest, time.perf_counter() - start)
            worst_int = max(worst_int, rep.interior_residual)
            worst_spec = max(worst_spec, rep.spectral_residual)
    ok = worst_int <= 1e-12 and worst_spec <= 1e-10 and slowest < 30
    verdict(2, ok, f"interior {worst_int:.2e} <= 1e-12, spectral {worst_spec:.2e} <= 1e-10, "
                   f"N=M=16 run {slowest:.1f}s < 30s")


def test_3_external_product(verdict):
    M = 8
    prod = external_product(doubled(build_circle_triple(M)), build_circle_triple(M))
    D = prod.D.matrix
    S, T = prod.components["S_part"].matrix, prod.components["lift"].matrix
    square = operator_norm(D @ D - (S @ S + T @ T))
    n, k = np.meshgrid(np.arange(-M, M + 1), np.arange(-M, M + 1), indexing="ij")
    r = np.hypot(n, k).ravel()
    ev_err = float(np.abs(np.linalg.eigvalsh(D) - np.sort(np.r_[-r, r])).max())
    ok = square <= 1e-12 and ev_err <= 1e-10
    verdict(3, ok, f"square residual {square:.2e} <= 1e-12, spectrum {ev_err:.2e} <= 1e-10")


def test_4_woronowicz(verdict):
    worst = {"idempotent": 0.0, "selfadjoint": 0.0, "range": 0.0, "complement": 0.0}
    for D in random_set():
        res = projection_residuals(D, woronowicz_projection(D))
        for key in worst:
            worst[key] = max(worst[key], res[key])
    ok = max(worst.values()) <= 1e-10
    verdict(4, ok, ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + " (all <= 1e-10)")


def test_5_bounded_transform(verdict):
    norm = sa = comm = eig = 0.0
    for D in random_set():
        F = bounded_transform(D).matrix
        norm = max(norm, operator_norm(F))
        sa = max(sa, operator_norm(F - F.conj().T))
        comm = max(comm, operator_norm(F @ D - D @ F))
        lam = np.linalg.eigvalsh(D)
        eig = max(eig, float(np.abs(np.linalg.eigvalsh(F) - lam / np.sqrt(1 + lam**2)).max()))
    ok = norm < 1 and sa <= 1e-12 and comm <= 1e-10 and eig <= 1e-12
    verdict(5, ok, f"||F|| {norm:.6f} < 1, ||F-F*|| {sa:.2e}, ||[F,D]|| {comm:.2e}, eigen map {eig:.2e}")


def _matrix_units(n):
    return [np.outer(np.eye(n)[i], np.eye(n)[j]) for i in range(n) for j in range(n)]


def test_6_universal_calculus(verdict):
    algebras = [FiniteAlgebra.scalars(), FiniteAlgebra.diagonal(2), FiniteAlgebra.diagonal(3),
                FiniteAlgebra.diagonal(4), FiniteAlgebra.matrix_algebra(2)]
    md = 0.0
    factor = 0.0
    rng = np.random.default_rng(6)
    for B in algebras:
        m = B.multiplication_map()
        for i in range(B.dim):
            md = max(md, float(np.abs(m @ B.d(B.basis(i))).max()))
        n = B.matrices.shape[1]
        for _ in range(3):
            T = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            delta = MatrixDerivation.commutator(B, T)
            for i in range(B.dim):
                b = B.basis(i)
                factor = max(factor, float(np.abs(factor_derivation(delta, B.d(b)) - delta(b)).max()))
    dims = {
        "C": (universal_one_forms(FiniteAlgebra.scalars()).dim, oracles.omega1_dimension([np.eye(1)], [0])),
        "C2": (universal_one_forms(FiniteAlgebra.diagonal(2)).dim,
               oracles.omega1_dimension([np.diag([1.0, 0]), np.diag([0, 1.0])], [0, 0])),
        "M2": (universal_one_forms(FiniteAlgebra.matrix_algebra(2)).dim,
               oracles.omega1_dimension(_matrix_units(2), [0] * 4)),
    }
    dims_ok = all(a == b for a, b in dims.values())
    ok = md == 0.0 and factor <= 1e-12 and dims_ok
    verdict(6, ok, f"m.d {md:.1e} == 0, delta - j.d {factor:.2e} <= 1e-12, "
                   f"dim Omega1 {[v[0] for v in dims.values()]} vs rank formula {[int(v[1]) for v in dims.values()]}")


def test_7_connection_axioms(verdict):
    c = build_fibration(TorusParams(GOLDEN, 8, 8))
    B = c.base
    samples = basis_samples(c, degree=3)
    bases = [np.eye(B.dim)[B.cutoff + j] for j in range(-3, 4)]
    leib = check_leibniz(c, [(x, b) for x in samples for b in bases])
    herm = check_hermitian(c, [(x, y) for x in samples for y in samples])
    comm = float(np.abs(connection_commutator(c, c.S)).max())
    ok = leib <= 1e-12 and herm <= 1e-12 and comm == 0.0
    verdict(7, ok, f"Leibniz {leib:.2e}, Hermitian {herm:.2e} (<= 1e-12), [nabla,S] {comm:.1e} == 0")


def test_8_composition(verdict):
    worst = 0.0
    verdicts = True
    for seed in range(20):
        c1, c2, t = random_composable(seed)
        left = compose(compose(c1, c2), t)
        right = compose(c1, compose(c2, t))
        rep = compare_up_to_iso(left, right, reassociation(c1, c2, t), 1e-8)
        worst = max(worst, rep.operator, *rep.generators.values())
        verdicts = verdicts and rep.verdict
    p = TorusParams(GOLDEN, 8, 8)
    prod = compose(build_fibration(p), build_circle_triple(p.M))
    split = float(np.abs(prod.D.matrix - prod.components["S_part"].matrix
                         - prod.components["lift"].matrix).max())
    fact = verify_factorization(p)
    ok = verdicts and worst <= 1e-8 and split == 0.0 and fact.interior_residual <= 1e-12 \
        and fact.spectral_residual <= 1e-10
    verdict(8, ok, f"associativity residual {worst:.2e} <= 1e-8 on 20 seeds, "
                   f"fibration x circle interior {fact.interior_residual:.2e}")


CIRCLE_PAIRS = [(0.0, 0.125), (0.0, 0.25), (0.0, 0.5), (0.1, 0.2),
                (0.05, 0.3), (0.2, 0.9), (0.75, 0.4), (0.3, 0.65)]


def test_9_connes_distance(verdict):
    start = time.perf_counter()
    two_point = {}
    feasible = 0.0
    for lam in (0.5, 1.0, 2.0):
        res = connes_distance(two_point_problem(lam))
        two_point[lam] = abs(res.value - 1 / lam)
        feasible = max(feasible, res.constraint_norm - 1)
    # calibration: ratio of computed to analytic two-point distances
    scale = float(np.mean([connes_distance(two_point_problem(lam)).value * lam for lam in (0.5, 1.0, 2.0)]))
    rel = []
    for x, y in CIRCLE_PAIRS:
        res = connes_distance(circle_problem(x, y, 32))
        ref = oracles.circle_geodesic(x, y)
        rel.append(abs(res.value / scale - ref) / ref)
        feasible = max(feasible, res.constraint_norm - 1)
    elapsed = time.perf_counter() - start
    ok = max(two_point.values()) <= 1e-6 and max(rel) <= 0.05 and feasible <= 1e-9 and elapsed < 60
    verdict(9, ok, f"two-point error {max(two_point.values()):.2e} <= 1e-6, calibration {scale:.9f}, "
                   f"circle max rel error {max(rel):.3%} <= 5%, feasibility {feasible:.1e}, {elapsed:.1f}s < 60s")


def test_10_sobolev(verdict):
    t = build_circle_triple(16)
    unit = max(r["max"] for r in relative_boundedness_norms(np.eye(t.dim), t.D, 4))
    z = relative_boundedness_norms(t.generators["z"], t.D, 1)[0]["max"]
    saw = {}
    for M in (8, 16, 32, 64):
        f = TrigPoly.from_dict({k: 1.0 / k for k in range(-M, M + 1) if k}, M)
        D = np.diag(np.arange(-M, M + 1.0))
        saw[M] = relative_boundedness_norms(multiplication_matrix(f), D, 1)[0]["max"]
    vals = [saw[M] for M in sorted(saw)]
    increasing = all(a < b for a, b in zip(vals, vals[1:]))
    growth = saw[64] / saw[8]
    ok = unit == 0.0 and abs(z - 1) <= 1e-12 and increasing and growth >= 2
    verdict(10, ok, f"a=1 ladder max {unit}, a=z level 1 {z:.15f}, sawtooth {[round(v, 3) for v in vals]} "
                    f"growth {growth:.2f} >= 2")


def test_11_determinism(verdict, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"pairs": [[0.0, 0.25], [0.1, 0.2]], "max_iter": 200, "count": 4}))
    same = {}
    for command in ("factorize", "distance", "sobolev", "external", "compose"):
        outs = []
        for run in range(2):
            dest = tmp_path / f"{command}-{run}.out"
            main([command, "--N", "4", "--M", "4", "--seed", "3", "--config", str(cfg), "--out", str(dest)])
            outs.append(dest.read_bytes())
        same[command] = outs[0] == outs[1] and len(outs[0]) > 0
    verdict(11, all(same.values()), "byte-identical reruns: " + ", ".join(f"{k} {v}" for k, v in same.items()))
