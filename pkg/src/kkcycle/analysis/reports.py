"""Kasparov-module conditions and serializable norm ladders."""

from __future__ import annotations

import numpy as np

from ..graded import GradedOperator, operator_norm
from ..io import csv_text
from .transform import bounded_transform

__all__ = ["kasparov_conditions_report", "ladder_csv", "ladder_json"]


def kasparov_conditions_report(t, a):
    """Compactness diagnostics of ``[F, a]`` and ``a (F^2 - 1)``.

    Parameters
    ----------
    t : SpectralTriple
    a : str or GradedOperator
        A generator name of ``t`` or an operator on its space.

    Returns
    -------
    dict
        ``selfadjoint`` (``||F - F*||``), ``norm`` (``||F||``),
        ``commutator_sv`` and ``resolvent_sv`` (singular values in
        decreasing order) and ``decay`` (``sigma_k / sigma_1`` at
        ``k = dim / 4`` for each list, 0 when ``sigma_1 = 0``).
    """
    A = t.generators[a] if isinstance(a, str) else a
    A = A.matrix if isinstance(A, GradedOperator) else np.asarray(A)
    F = bounded_transform(t.D).matrix
    comm = F @ A - A @ F
    res = A @ (F @ F - np.eye(F.shape[0]))
    sv_c = np.linalg.svd(comm, compute_uv=False)
    sv_r = np.linalg.svd(res, compute_uv=False)
    k = max(1, F.shape[0] // 4)

    def ratio(sv):
        return float(sv[k - 1] / sv[0]) if sv[0] > 0 else 0.0

    return {
        "selfadjoint": operator_norm(F - F.conj().T),
        "norm": operator_norm(F),
        "commutator_sv": sv_c,
        "resolvent_sv": sv_r,
        "decay": {"commutator": ratio(sv_c), "resolvent": ratio(sv_r), "k": k},
    }


def ladder_csv(rows):
    """CSV text of a norm ladder; columns follow the keys of the first row."""
    if not rows:
        return ""
    keys = list(rows[0])
    return csv_text(keys, [[row[k] for k in keys] for row in rows])


def ladder_json(rows):
    return [{k: row[k] for k in row} for row in rows]
