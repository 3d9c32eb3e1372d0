"""Command-line experiment runner.

Usage::

    kkcycle [COMMAND] [--theta T] [--N N] [--M M] [--depth K] [--tol TOL]
            [--seed S] [--out PATH] [--config FILE.json]

Commands are ``factorize`` (default), ``distance``, ``sobolev``,
``external`` and ``compose``. Values from ``--config`` override flags.
Without ``--out`` the report goes to ``$KKCYCLE_OUT_DIR/<command>.<ext>``
when that variable is set and to standard output otherwise.

Exit codes: 0 success, 1 tolerance failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import io as kio
from .algebras import TrigPoly, multiplication_matrix
from .analysis import (
    SolverOptions,
    circle_problem,
    connes_distance,
    relative_boundedness_norms,
    two_point_problem,
)
from .correspondences import (
    compare_up_to_iso,
    compose,
    doubled,
    external_product,
    random_composable,
    reassociation,
)
from .nctorus import GOLDEN, TorusParams, build_circle_triple, verify_factorization

__all__ = ["ExperimentConfig", "UsageError", "main", "run", "COMMANDS", "OUT_DIR_ENV"]

OUT_DIR_ENV = "KKCYCLE_OUT_DIR"
EXIT_OK, EXIT_TOL, EXIT_USAGE = 0, 1, 2

DEFAULT_PAIRS = (
    (0.0, 0.0),
    (0.0, 0.125),
    (0.0, 0.25),
    (0.0, 0.5),
    (0.1, 0.2),
    (0.05, 0.3),
    (0.2, 0.9),
    (0.75, 0.4),
)

DEFAULT_TOLS = {
    "factorize": 1e-12,
    "distance": 1e-9,
    "sobolev": 0.0,
    "external": 1e-10,
    "compose": 1e-8,
}


class UsageError(ValueError):
    """Invalid configuration; maps to exit code 2."""


@dataclass
class ExperimentConfig:
    """Every knob of a run, each with a default."""

    command: str = "factorize"
    theta: float = GOLDEN
    N: int = 8
    M: int = 8
    depth: int = 3
    tol: float = None
    seed: int = 0
    out: str = None
    # distance
    model: str = "circle"
    lam: float = 1.0
    pairs: list = field(default_factory=lambda: [list(p) for p in DEFAULT_PAIRS])
    max_iter: int = 1000
    # sobolev
    element: str = "z"
    sweep: list = None
    # compose
    count: int = 20

    def tolerance(self):
        return DEFAULT_TOLS[self.command] if self.tol is None else float(self.tol)

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        try:
            TorusParams(self.theta, self.N, self.M)
        except (TypeError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
        if int(self.depth) < 0:
            raise UsageError("depth must be non-negative")
        if self.tol is not None and not float(self.tol) >= 0:
            raise UsageError("tolerance must be non-negative")
        if self.model not in ("circle", "two-point"):
            raise UsageError("model must be 'circle' or 'two-point'")
        if not float(self.lam) > 0:
            raise UsageError("lam must be positive")
        if self.element not in ("1", "z", "sawtooth"):
            raise UsageError("element must be '1', 'z' or 'sawtooth'")
        if int(self.count) < 1 or int(self.max_iter) < 1:
            raise UsageError("count and max_iter must be positive")
        try:
            pairs = [(float(x), float(y)) for x, y in self.pairs]
        except (TypeError, ValueError) as exc:
            raise UsageError("pairs must be a list of [x, y] points") from exc
        if self.sweep is not None and any(int(m) < 1 for m in self.sweep):
            raise UsageError("sweep cutoffs must be at least 1")
        return pairs


# ---------------------------------------------------------------------------
# commands


def run_factorize(cfg):
    report = verify_factorization(TorusParams(cfg.theta, cfg.N, cfg.M)).to_json()
    ok = report["interior_residual"] <= cfg.tolerance()
    return (EXIT_OK if ok else EXIT_TOL), kio.dumps(report), "json"


def run_distance(cfg):
    opts = SolverOptions(max_iter=int(cfg.max_iter))
    tol = cfg.tolerance()
    rows = []
    if cfg.model == "two-point":
        problems = [((0, 1), two_point_problem(float(cfg.lam), opts))]
    else:
        problems = [((x, y), circle_problem(x, y, cfg.M, options=opts)) for x, y in cfg.validate()]
    ok = True
    for (x, y), prob in problems:
        res = connes_distance(prob)
        excess = max(0.0, res.constraint_norm - 1.0)
        ok = ok and excess <= tol
        rows.append([float(x), float(y), res.value, excess])
    text = kio.csv_text(["x", "y", "distance", "constraint_residual"], rows)
    return (EXIT_OK if ok else EXIT_TOL), text, "csv"


def _sobolev_element(name, M):
    if name == "1":
        return TrigPoly.one(M)
    if name == "z":
        return TrigPoly.monomial(1, M)
    return TrigPoly.from_dict({k: 1.0 / k for k in range(-M, M + 1) if k}, M)


def run_sobolev(cfg):
    sweep = cfg.sweep or [cfg.M]
    rows = []
    for M in sweep:
        M = int(M)
        t = build_circle_triple(M)
        a = multiplication_matrix(_sobolev_element(cfg.element, M))
        for row in relative_boundedness_norms(a, t.D, max(1, int(cfg.depth))):
            rows.append(
                [M, row["level"], row["plus"], row["minus"], row["adjoint_plus"], row["adjoint_minus"]]
            )
    header = ["M", "level", "norm_plus", "norm_minus", "adjoint_plus", "adjoint_minus"]
    return EXIT_OK, kio.csv_text(header, rows), "csv"


def run_external(cfg):
    t1 = doubled(build_circle_triple(cfg.N))
    t2 = build_circle_triple(cfg.M)
    prod = external_product(t1, t2)
    D = prod.D.matrix
    X = prod.components["S_part"].matrix
    Y = prod.components["lift"].matrix
    square = float(np.abs(D @ D - (X @ X + Y @ Y)).max())
    ev = np.linalg.eigvalsh(D)
    n, k = np.meshgrid(np.arange(-cfg.N, cfg.N + 1), np.arange(-cfg.M, cfg.M + 1), indexing="ij")
    r = np.sqrt(n**2 + k**2).ravel()
    expected = np.sort(np.r_[-r, r])
    spectral = float(np.abs(ev - expected).max())
    ok = max(square, spectral) <= cfg.tolerance()
    report = {
        "N": cfg.N,
        "M": cfg.M,
        "square_residual": square,
        "spectral_residual": spectral,
        "spectrum": [float(x) for x in ev],
    }
    return (EXIT_OK if ok else EXIT_TOL), kio.dumps(report), "json"


def run_compose(cfg):
    tol = cfg.tolerance()
    rows = []
    ok = True
    for i in range(int(cfg.count)):
        seed = int(cfg.seed) + i
        c1, c2, t = random_composable(seed)
        left = compose(compose(c1, c2), t)
        right = compose(c1, compose(c2, t))
        rep = compare_up_to_iso(left, right, reassociation(c1, c2, t), tol)
        ok = ok and rep.verdict
        rows.append({"seed": seed, "dim": left.dim, **rep.to_json()})
    report = {"instances": rows, "all_verdicts": ok}
    return (EXIT_OK if ok else EXIT_TOL), kio.dumps(report), "json"


COMMANDS = {
    "factorize": run_factorize,
    "distance": run_distance,
    "sobolev": run_sobolev,
    "external": run_external,
    "compose": run_compose,
}


# ---------------------------------------------------------------------------
# entry point


def _parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--theta", type=float, help="rotation angle in [0, 1)")
    common.add_argument("--N", type=int, help="cutoff of the crossed-product direction")
    common.add_argument("--M", type=int, help="Fourier cutoff")
    common.add_argument("--depth", type=int, help="Sobolev depth / ladder length")
    common.add_argument("--tol", type=float, help="pass/fail tolerance")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--out", help="output file")
    common.add_argument("--config", help="JSON file overriding flags")
    parser = argparse.ArgumentParser(
        prog="kkcycle", description="Finite-truncation KK-cycle experiments.", parents=[common]
    )
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], argument_default=argparse.SUPPRESS)
    return parser


def build_config(argv):
    """Parse ``argv`` into an :class:`ExperimentConfig`; raises UsageError."""
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise UsageError("invalid command line") from exc
    values = {k: v for k, v in vars(ns).items() if v is not None}
    values.setdefault("command", "factorize")
    path = values.pop("config", None)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(overrides, dict):
            raise UsageError("config file must hold a JSON object")
        values.update(overrides)
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(values) - names)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc
    cfg.validate()
    return cfg


def run(cfg):
    """Execute a validated config; returns ``(exit code, text, extension)``."""
    return COMMANDS[cfg.command](cfg)


def _destination(cfg, ext):
    if cfg.out:
        return cfg.out
    root = os.environ.get(OUT_DIR_ENV)
    if root:
        return os.path.join(root, f"{cfg.command}.{ext}")
    return None


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = build_config(argv)
        code, text, ext = run(cfg)
    except UsageError as exc:
        print(f"kkcycle: {exc}", file=sys.stderr)
        return EXIT_USAGE
    dest = _destination(cfg, ext)
    if dest is None:
        sys.stdout.write(text)
    else:
        parent = os.path.dirname(dest)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
