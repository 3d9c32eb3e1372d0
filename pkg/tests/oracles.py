"""Independent reference computations used to freeze expected values.

Nothing here imports from ``kkcycle``; every construction is written
directly from its defining formula with explicit loops.
"""

import cmath
import math

import numpy as np
import scipy.linalg


def koszul_tensor(S, T, pE, pF, degT):
    """``(S (x) T)(e_i (x) f_j) = (-1)^(degT * p_i) S e_i (x) T f_j`` column by column."""
    dE, dF = len(pE), len(pF)
    out = np.zeros((dE * dF, dE * dF), dtype=complex)
    for i in range(dE):
        for j in range(dF):
            sign = (-1) ** (degT * pE[i])
            col = np.zeros(dE * dF, dtype=complex)
            for a in range(dE):
                for b in range(dF):
                    col[a * dF + b] = sign * S[a, i] * T[b, j]
            out[:, i * dF + j] = col
    return out


def torus_operators(N, M, theta):
    """``u``, ``v`` on modes ``(n, k)`` and the Dirac blocks, by explicit loops."""
    modes = [(n, k) for n in range(-N, N + 1) for k in range(-M, M + 1)]
    index = {m: i for i, m in enumerate(modes)}
    d = len(modes)
    u = np.zeros((d, d), dtype=complex)
    v = np.zeros((d, d), dtype=complex)
    D = np.zeros((2 * d, 2 * d), dtype=complex)
    for (n, k), i in index.items():
        if (n + 1, k) in index:
            u[index[(n + 1, k)], i] = cmath.exp(2j * math.pi * k * theta)
        if (n, k + 1) in index:
            v[index[(n, k + 1)], i] = 1.0
        D[i, d + i] = n - 1j * k
        D[d + i, i] = n + 1j * k
    return u, v, D, modes


def interior_modes(N, M):
    return [(n, k) for n in range(-N, N + 1) for k in range(-M, M + 1) if abs(n) < N and abs(k) < M]


def sampled_convolution(f, g, N, M, theta, L=64):
    """Crossed-product convolution evaluated on a grid, then Fourier-analysed.

    ``f[n + N, k + M]`` is the coefficient of ``delta_n (x) z^k``.
    """
    xs = np.arange(L) / L

    def evaluate(c, n, x):
        return sum(c[n + N, k + M] * np.exp(2j * np.pi * k * x) for k in range(-M, M + 1))

    out = np.zeros((2 * N + 1, 2 * M + 1), dtype=complex)
    for n in range(-N, N + 1):
        vals = np.zeros(L, dtype=complex)
        for m in range(-N, N + 1):
            if abs(n - m) > N:
                continue
            vals += evaluate(f, m, xs) * evaluate(g, n - m, xs + m * theta)
        coeffs = np.fft.fft(vals) / L
        for k in range(-M, M + 1):
            out[n + N, k + M] = coeffs[k % L]
    return out


def matrix_algebra_structure(mats):
    """Structure constants and unit of the span of ``mats`` by least squares."""
    d = len(mats)
    A = np.array([m.ravel() for m in mats]).T
    C = np.zeros((d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            C[i, j] = np.linalg.lstsq(A, (mats[i] @ mats[j]).ravel(), rcond=None)[0]
    unit = np.linalg.lstsq(A, np.eye(mats[0].shape[0]).ravel(), rcond=None)[0]
    return C, unit


def omega1_dimension(mats, parity):
    """``dim B (x) B - rank m`` with ``m(e_i (x) e_j) = e_i gamma(e_j)``."""
    C, _ = matrix_algebra_structure(mats)
    d = len(mats)
    m = np.zeros((d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            m[:, i * d + j] = (-1) ** parity[j] * C[i, j]
    return d * d - np.linalg.matrix_rank(m, tol=1e-10)


def j_on_a_db(rho_a, rho_b, T):
    """``j_delta(a db) = a [T, b]`` for ``delta = [T, .]`` (even ``b``)."""
    return rho_a @ (T @ rho_b - rho_b @ T)


def bounded_transform(D):
    n = D.shape[0]
    root = scipy.linalg.sqrtm(np.eye(n) + D @ D)
    return D @ np.linalg.inv(root)


def woronowicz(D):
    n = D.shape[0]
    R = np.linalg.inv(np.eye(n) + D @ D)
    return np.block([[R, D @ R], [D @ R, D @ D @ R]])


def circle_geodesic(x, y):
    """Connes distance on the circle for ``D = (1/2 pi i) d/dx``."""
    t = abs(x - y) % 1.0
    return 2 * math.pi * min(t, 1 - t)


def toeplitz_commutator_norm(coeffs, M):
    """``||[diag(k), T_f]||`` on modes ``|k| <= M`` built entry by entry."""
    K = (len(coeffs) - 1) // 2
    n = 2 * M + 1
    A = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            diff = (a - M) - (b - M)
            if abs(diff) <= K:
                A[a, b] = ((a - M) - (b - M)) * coeffs[diff + K]
    return np.linalg.norm(A, 2)


def kasparov_decay(N, M, theta):
    """``sigma_(dim/4) / sigma_1`` of ``[F, u (+) u]`` for the torus triple."""
    u, _, D, _ = torus_operators(N, M, theta)
    w, V = np.linalg.eigh(D)
    F = (V * (w / np.sqrt(1 + w**2))) @ V.conj().T
    U = np.kron(np.eye(2), u)
    s = np.linalg.svd(F @ U - U @ F, compute_uv=False)
    k = len(s) // 4
    return s[k - 1] / s[0]
