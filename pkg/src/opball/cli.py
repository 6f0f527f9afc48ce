"""Command-line entry point.

Matrices travel as JSON documents {"rows", "cols", "data"} with data a
row-major list of [re, im] pairs; representations live in a directory of
``table.json``, ``sig.json`` and ``elem_<k>.json`` files.  Every command
emits a single JSON document on stdout.  Exit codes: 0 success, 1 domain
error (the error class name appears verbatim in the ``error`` field),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import checksuite
from .errors import OperatorBallError, ParseError, ShapeError, ZeroInput
from .fixedpoint import find_fixed_point, group_closure
from .hyperbolic import GeodesicLine, distance, geodesic_point
from .mobius import BallAutomorphism, BallPoint, mobius_apply
from .opcore import spectral_norm
from .pontryagin import (
    PontryaginSignature,
    Representation,
    dual_pair,
    make_test_representation,
    max_principal_angle,
    unitarize,
)


@dataclass
class RunConfig:
    """Tolerances and limits; documented defaults apply when absent."""

    boundary_tol: float = 1e-8
    herm_tol: float = 1e-10
    psd_tol: float = 1e-10
    rank_tol: float = 1e-12
    eig_tol: float = 1e-9
    aut_tol: float = 1e-8
    group_tol: float = 1e-8
    fp_tol: float = 1e-9
    elliptic_margin: float = 1e-6
    cheb_tol: float = 1e-7
    unit_tol: float = 1e-7
    rep_tol: float = 1e-8
    pair_tol: float = 1e-7
    split_tol: float = 1e-10
    seed: int = 0
    max_iter: int = 5000
    max_elements: int = 256
    solver_mode: str = "midpoint-descent"

    def __post_init__(self):
        for f in fields(self):
            if f.name.endswith(("_tol", "_margin")):
                if getattr(self, f.name) <= 0:
                    raise ValueError(f"{f.name} must be positive")
        if self.solver_mode not in ("midpoint-descent", "chebyshev-iterate"):
            raise ValueError(f"unknown solver mode {self.solver_mode!r}")
        env_seed = os.environ.get("OPBALL_SEED")
        if env_seed is not None:
            self.seed = int(env_seed)


# --- matrix and representation I/O -------------------------------------------


def load_matrix(path) -> np.ndarray:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected an object with rows/cols/data")
    try:
        rows, cols, data = int(doc["rows"]), int(doc["cols"]), doc["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: missing or malformed field ({exc})") from exc
    if rows < 1 or cols < 1:
        raise ShapeError(f"{path}: rows and cols must be positive")
    if not isinstance(data, list) or len(data) != rows * cols:
        raise ShapeError(f"{path}: data length "
                         f"{len(data) if isinstance(data, list) else '?'} "
                         f"!= rows*cols = {rows * cols}")
    out = np.empty((rows, cols), dtype=np.complex128)
    for k, entry in enumerate(data):
        try:
            re, im = float(entry[0]), float(entry[1])
        except (TypeError, ValueError, IndexError) as exc:
            raise ParseError(f"{path}: entry {k} is not an [re, im] pair") from exc
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ParseError(f"{path}: non-finite entry at index {k}")
        out[k // cols, k % cols] = complex(re, im)
    return out


def matrix_document(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]),
            "data": [[float(z.real), float(z.imag)] for z in m.ravel()]}


def save_matrix(m: np.ndarray, path):
    Path(path).write_text(json.dumps(matrix_document(m), sort_keys=True) + "\n")


def _load_sig(dirpath: Path, override: str | None) -> PontryaginSignature:
    if override:
        try:
            p, q = (int(x) for x in override.split(","))
        except ValueError as exc:
            raise ParseError(f"--sig must be P,Q integers: {override!r}") from exc
        return PontryaginSignature(p, q)
    sig_file = dirpath / "sig.json"
    if not sig_file.exists():
        raise ParseError(f"{dirpath}: no sig.json and no --sig given")
    doc = json.loads(sig_file.read_text())
    return PontryaginSignature(int(doc["n_plus"]), int(doc["n_minus"]))


def _load_elements(dirpath: Path) -> list:
    elems = sorted(dirpath.glob("elem_*.json"),
                   key=lambda p: int(p.stem.split("_")[1]))
    if not elems:
        raise ParseError(f"{dirpath}: no elem_<k>.json files")
    return [load_matrix(p) for p in elems]


def load_representation(dirpath, sig_override: str | None = None) -> Representation:
    dirpath = Path(dirpath)
    sig = _load_sig(dirpath, sig_override)
    table_file = dirpath / "table.json"
    if not table_file.exists():
        raise ParseError(f"{dirpath}: no table.json")
    table = np.asarray(json.loads(table_file.read_text())["table"], dtype=int)
    return Representation(sig, table, _load_elements(dirpath))


def save_representation(rep: Representation, dirpath):
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    sig = rep.signature
    (dirpath / "sig.json").write_text(json.dumps(
        {"n_plus": sig.n_plus, "n_minus": sig.n_minus}, sort_keys=True) + "\n")
    (dirpath / "table.json").write_text(json.dumps(
        {"order": rep.group_order, "table": rep.table.tolist()},
        sort_keys=True) + "\n")
    for k, m in enumerate(rep.images):
        save_matrix(m, dirpath / f"elem_{k}.json")


# --- subcommands --------------------------------------------------------------


def _emit(doc) -> int:
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    return 0


def _cmd_distance(args, cfg: RunConfig) -> int:
    a = BallPoint(load_matrix(args.a), boundary_tol=cfg.boundary_tol)
    b = BallPoint(load_matrix(args.b), boundary_tol=cfg.boundary_tol)
    return _emit({"rho": distance(a, b)})


def _cmd_mobius(args, cfg: RunConfig) -> int:
    a = BallPoint(load_matrix(args.a), boundary_tol=cfg.boundary_tol)
    x = BallPoint(load_matrix(args.x), boundary_tol=cfg.boundary_tol)
    return _emit(matrix_document(mobius_apply(a, x).matrix))


def _cmd_geodesic(args, cfg: RunConfig) -> int:
    base = BallPoint(load_matrix(args.a), boundary_tol=cfg.boundary_tol)
    direction = load_matrix(args.d)
    norm = spectral_norm(direction)
    if norm == 0.0:
        raise ZeroInput("direction matrix is zero")
    line = GeodesicLine(base, direction / norm)
    ts = [float(t) for t in args.t]
    points = [matrix_document(geodesic_point(line, t).matrix) for t in ts]
    return _emit({"t": ts, "points": points})


def _cmd_fixpoint(args, cfg: RunConfig) -> int:
    dirpath = Path(args.group)
    sig = _load_sig(dirpath, args.sig)
    gens = [BallAutomorphism(m, sig.n_plus, sig.n_minus, aut_tol=cfg.aut_tol)
            for m in _load_elements(dirpath)]
    group = group_closure(gens, max_elements=cfg.max_elements,
                          group_tol=cfg.group_tol)
    result = find_fixed_point(group, fp_tol=cfg.fp_tol, max_iter=cfg.max_iter,
                              mode=args.mode or cfg.solver_mode,
                              elliptic_margin=cfg.elliptic_margin)
    return _emit({
        "group_order": len(group),
        "fixed_point": matrix_document(result.point.matrix),
        "displacement": result.displacement,
        "iterations": result.iterations,
        "converged": result.converged,
    })


def _cmd_unitarize(args, cfg: RunConfig) -> int:
    rep = load_representation(args.rep, args.sig)
    res = unitarize(rep, fp_tol=cfg.fp_tol, unit_tol=cfg.unit_tol,
                    rep_tol=cfg.rep_tol, max_iter=cfg.max_iter,
                    mode=cfg.solver_mode)
    eye = np.eye(rep.signature.dim)
    unit_defect = max(spectral_norm(m.conj().T @ m - eye)
                      for m in res.unitary_rep.images)
    return _emit({
        "fixed_point": matrix_document(res.fixed_point.matrix),
        "similarity": matrix_document(res.similarity),
        "unitary_images": [matrix_document(m) for m in res.unitary_rep.images],
        "max_unitarity_defect": unit_defect,
    })


def _cmd_dualpair(args, cfg: RunConfig) -> int:
    rep = load_representation(args.rep, args.sig)
    pair = dual_pair(rep, split_tol=cfg.split_tol, unit_tol=cfg.unit_tol,
                     rep_tol=cfg.rep_tol, max_iter=cfg.max_iter,
                     mode=cfg.solver_mode)
    angle = 0.0
    for m in rep.images:
        angle = max(angle,
                    max_principal_angle(pair.positive_basis,
                                        m @ pair.positive_basis),
                    max_principal_angle(pair.negative_basis,
                                        m @ pair.negative_basis))
    return _emit({
        "positive_basis": matrix_document(pair.positive_basis),
        "negative_basis": matrix_document(pair.negative_basis),
        "negative_dim": int(pair.negative_basis.shape[1]),
        "max_invariance_angle": angle,
    })


def _cmd_check(args, cfg: RunConfig) -> int:
    summary = checksuite.run_checks(suite=args.suite, trials=args.trials,
                                    seed=args.seed if args.seed is not None
                                    else cfg.seed)
    _emit(summary)
    return 0 if summary["passed"] else 1


def _cmd_gen(args, cfg: RunConfig) -> int:
    try:
        p, q = (int(x) for x in args.sig.split(","))
    except ValueError as exc:
        raise ParseError(f"--sig must be P,Q integers: {args.sig!r}") from exc
    sig = PontryaginSignature(p, q)
    seed = args.seed if args.seed is not None else cfg.seed
    rep = make_test_representation(args.group, sig, conditioning=args.cond,
                                   seed=seed)
    save_representation(rep, args.out)
    return _emit({
        "group": args.group,
        "order": rep.group_order,
        "sig": [sig.n_plus, sig.n_minus],
        "conditioning": args.cond,
        "seed": seed,
        "bound": rep.bound,
        "eta_defect": rep.eta_defect,
        "out": str(args.out),
    })


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opball",
        description="Hyperbolic geometry of the operator ball: distances, "
                    "Mobius maps, geodesics, fixed points, unitarization.")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("distance", help="rho-distance between two ball points")
    d.add_argument("a")
    d.add_argument("b")

    m = sub.add_parser("mobius", help="apply the Mobius transform M_A to X")
    m.add_argument("a")
    m.add_argument("x")

    g = sub.add_parser("geodesic",
                       help="points of the line through A with direction D "
                            "(D is normalized to unit spectral norm)")
    g.add_argument("a")
    g.add_argument("d")
    g.add_argument("--t", action="append", required=True,
                   help="parameter value; repeatable")

    f = sub.add_parser("fixpoint",
                       help="common fixed point of the group generated by "
                            "the block matrices in a directory")
    f.add_argument("--group", required=True)
    f.add_argument("--sig", help="P,Q when the directory has no sig.json")
    f.add_argument("--mode", choices=["midpoint-descent", "chebyshev-iterate"])

    u = sub.add_parser("unitarize",
                       help="similarity of an eta-preserving representation "
                            "onto a unitary one")
    u.add_argument("--rep", required=True)
    u.add_argument("--sig", help="P,Q when the directory has no sig.json")

    dp = sub.add_parser("dualpair",
                        help="invariant dual pair of a bounded J-unitary group")
    dp.add_argument("--rep", required=True)
    dp.add_argument("--sig", help="P,Q when the directory has no sig.json")

    c = sub.add_parser("check", help="run named property suites")
    c.add_argument("--suite", choices=["appendix", "all"], default="appendix")
    c.add_argument("--trials", type=int, default=200)
    c.add_argument("--seed", type=int)

    ge = sub.add_parser("gen", help="generate a test representation directory")
    ge.add_argument("--group", required=True,
                    help="C<n>, S3 or Q8")
    ge.add_argument("--sig", required=True, help="P,Q")
    ge.add_argument("--cond", type=float, default=2.0)
    ge.add_argument("--seed", type=int)
    ge.add_argument("--out", required=True)
    return parser


_HANDLERS = {
    "distance": _cmd_distance,
    "mobius": _cmd_mobius,
    "geodesic": _cmd_geodesic,
    "fixpoint": _cmd_fixpoint,
    "unitarize": _cmd_unitarize,
    "dualpair": _cmd_dualpair,
    "check": _cmd_check,
    "gen": _cmd_gen,
}


def run(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig()
        return _HANDLERS[args.command](args, cfg)
    except OperatorBallError as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)})
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))
