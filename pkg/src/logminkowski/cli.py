"""Command-line front end.

Exit codes: 0 success / strict, 1 verification mismatch, 2 input errors,
3 geometric degeneracy, 10 equality case, 11 condition violated,
12 divergence.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import formats
from .errors import (
    ConditionViolated,
    DivergenceDetected,
    GeometryError,
    MeasureError,
)
from .geometry import (
    DirectionSet,
    apply_linear_map,
    build_wulff_body,
    cone_volume_measure,
    facet_area_atoms,
    lp_surface_measure,
)
from .measures import Status, check_first_moment, check_subspace_concentration
from .solver import SolveConfig, measure_residual, solve

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_PARSE = 2
EXIT_DEGENERATE = 3
EXIT_EQUALITY = 10
EXIT_VIOLATED = 11
EXIT_DIVERGED = 12

_STATUS_EXIT = {Status.STRICT: EXIT_OK, Status.EQUALITY: EXIT_EQUALITY, Status.VIOLATED: EXIT_VIOLATED}

log = logging.getLogger("logminkowski")


def _tool_version() -> str:
    try:
        return version("logminkowski")
    except PackageNotFoundError:
        return "unknown"


@dataclass
class RunManifest:
    command: str
    inputs: list[str]
    config: dict
    outputs: list[str] = field(default_factory=list)
    started_at: str = ""
    wall_time: float = 0.0
    tool_version: str = ""
    exit_status: int = 0


def _parse_matrix(text: str) -> np.ndarray:
    """``"1,0,0;0,1,0"`` -> 2x3 array; also accepts a path to a JSON file."""
    p = Path(text)
    if p.suffix == ".json" and p.exists():
        return np.asarray(formats.read_json(p), dtype=float)
    try:
        rows = [[float(v) for v in row.split(",")] for row in text.split(";") if row.strip()]
        return np.array(rows, dtype=float)
    except ValueError as exc:
        raise formats.FormatError(f"cannot parse matrix {text!r}") from exc


def _emit(doc, out: str | None, manifest: RunManifest) -> None:
    text = formats.dumps(doc)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        manifest.outputs.append(out)
    else:
        sys.stdout.write(text)


# --- commands --------------------------------------------------------------

def cmd_conevol(args, manifest: RunManifest) -> int:
    if args.polytope:
        P = formats.polytope_from_dict(formats.read_json(args.polytope))
    elif args.dirs and args.support:
        dirs = _parse_matrix(args.dirs)
        support = _parse_matrix(args.support).reshape(-1)
        P = build_wulff_body(DirectionSet.from_vectors(dirs), support)
    else:
        raise formats.FormatError("give a polytope JSON file or both --dirs and --support")
    mu = cone_volume_measure(P) if args.p is None else lp_surface_measure(P, args.p)
    moment, ok = check_first_moment(facet_area_atoms(P))
    total_area = sum(f.area for f in P.facets)
    doc = formats.measure_to_dict(mu)
    doc["diagnostics"] = {
        "measure": "cone-volume" if args.p is None else f"L_p surface area, p={_fmt(args.p)}",
        "volume": P.volume,
        "first_moment": moment.tolist(),
        "first_moment_residual": float(np.linalg.norm(moment)) / total_area,
        "first_moment_pass": ok,
    }
    _emit(doc, args.output, manifest)
    return EXIT_OK


def _fmt(x: float) -> str:
    return format(x, "g")


def _check_one(path: str, equality_tol: float):
    mu = formats.measure_from_dict(formats.read_json(path))
    return check_subspace_concentration(mu, equality_tol)


def cmd_check(args, manifest: RunManifest) -> int:
    if len(args.measure) == 1:
        reports = [_check_one(args.measure[0], args.equality_tol)]
    else:
        with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
            reports = list(pool.map(lambda p: _check_one(p, args.equality_tol), args.measure))
    docs = [formats.report_to_dict(r) for r in reports]
    _emit(docs[0] if len(docs) == 1 else docs, args.output, manifest)
    for r in reports:
        print(f"status: {r.status.value}", file=sys.stderr)
    return max(_STATUS_EXIT[r.status] for r in reports)


def cmd_solve(args, manifest: RunManifest) -> int:
    mu = formats.measure_from_dict(formats.read_json(args.measure))
    cfg = SolveConfig(
        tol_residual=args.tol,
        max_iters=args.max_iter,
        armijo_c=args.armijo_c,
        backtrack_ratio=args.backtrack_ratio,
        divergence_ratio=args.divergence_ratio,
        equality_tol=args.equality_tol,
        direction=args.direction,
    )
    manifest.config.update(asdict(cfg))
    try:
        res = solve(mu, cfg)
    except ConditionViolated as exc:
        print(f"condition violated: {exc}; witness {exc.witness}", file=sys.stderr)
        _emit({"error": "ConditionViolated", "witness": formats.subspace_to_dict(exc.witness)}, args.output, manifest)
        return EXIT_VIOLATED
    except DivergenceDetected as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        _emit({"error": "DivergenceDetected", "message": str(exc), "witness": formats.subspace_to_dict(exc.witness)},
              args.output, manifest)
        return EXIT_DIVERGED
    _emit(formats.result_to_dict(res), args.output, manifest)
    if args.trace:
        Path(args.trace).write_text(formats.trace_csv(res.trace), encoding="utf-8")
        manifest.outputs.append(args.trace)
    if args.off:
        if res.body.dim != 3:
            log.warning("OFF export skipped: body is %d-dimensional", res.body.dim)
        else:
            formats.write_off(args.off, res.body)
            manifest.outputs.append(args.off)
    print(f"path: {res.path}; residual: {res.residual:.3e}; iterations: {res.iterations}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args, manifest: RunManifest) -> int:
    mu = formats.measure_from_dict(formats.read_json(args.measure))
    doc = formats.read_json(args.result)
    if "polytope" not in doc:
        raise formats.FormatError("result document has no polytope")
    P = formats.polytope_from_dict(doc["polytope"])
    if P.dim != mu.dim:
        print(f"dimension mismatch: body {P.dim}, measure {mu.dim}")
        return EXIT_MISMATCH
    residual = measure_residual(mu, cone_volume_measure(P))
    print(f"max residual: {residual:.3e} (tol {args.tol:g})")
    manifest.config["residual"] = residual
    return EXIT_OK if residual <= args.tol else EXIT_MISMATCH


def cmd_transform(args, manifest: RunManifest) -> int:
    P = formats.polytope_from_dict(formats.read_json(args.polytope))
    phi = _parse_matrix(args.matrix)
    _emit(formats.polytope_to_dict(apply_linear_map(P, phi)), args.output, manifest)
    return EXIT_OK


# --- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logmink", description="Cone-volume measures and the even log-Minkowski problem.")
    parser.add_argument("--manifest", help="where to write the run manifest (default: next to --output)")
    parser.add_argument("--seed", type=int, default=None, help="reserved; no command samples yet")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("conevol", help="cone-volume (or L_p surface area) measure of a polytope")
    p.add_argument("polytope", nargs="?", help="polytope JSON")
    p.add_argument("--dirs", help='direction representatives, e.g. "1,0,0;0,1,0;0,0,1"')
    p.add_argument("--support", help='support numbers, e.g. "1,1,1"')
    p.add_argument("--p", type=float, default=None, help="emit the L_p surface area measure instead")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_conevol)

    p = sub.add_parser("check", help="subspace concentration check")
    p.add_argument("measure", nargs="+")
    p.add_argument("--equality-tol", type=float, default=SolveConfig.equality_tol)
    p.add_argument("--jobs", type=int, default=1, help="check several measure files in parallel")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="reconstruct a body from its cone-volume measure")
    p.add_argument("measure")
    p.add_argument("--tol", type=float, default=SolveConfig.tol_residual)
    p.add_argument("--max-iter", type=int, default=SolveConfig.max_iters)
    p.add_argument("--armijo-c", type=float, default=SolveConfig.armijo_c)
    p.add_argument("--backtrack-ratio", type=float, default=SolveConfig.backtrack_ratio)
    p.add_argument("--divergence-ratio", type=float, default=SolveConfig.divergence_ratio)
    p.add_argument("--equality-tol", type=float, default=SolveConfig.equality_tol)
    p.add_argument("--direction", choices=("bfgs", "steepest"), default=SolveConfig.direction)
    p.add_argument("--trace", help="write the iteration trace as CSV")
    p.add_argument("--off", help="write the body as an OFF mesh (3-d only)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="recompute a result's cone-volume measure and compare")
    p.add_argument("measure")
    p.add_argument("result")
    p.add_argument("--tol", type=float, default=SolveConfig.tol_residual)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("transform", help="apply a linear map to a polytope")
    p.add_argument("polytope")
    p.add_argument("--matrix", required=True, help='row-major, e.g. "2,0,0;0,0.5,0;0,0,1"')
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_transform)
    return parser


def _inputs(args) -> list[str]:
    out = []
    for name in ("polytope", "measure", "result"):
        v = getattr(args, name, None)
        if v:
            out.extend(v if isinstance(v, list) else [v])
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    skip = {"func", "command", "manifest", "verbose", "output", "trace", "off", "polytope", "measure", "result"}
    config = {k: v for k, v in vars(args).items() if k not in skip}
    manifest = RunManifest(
        command=args.command,
        inputs=_inputs(args),
        config=config,
        started_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        tool_version=_tool_version(),
    )
    t0 = time.perf_counter()
    try:
        code = args.func(args, manifest)
    except (formats.FormatError, MeasureError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_PARSE
    except GeometryError as exc:
        print(f"geometric degeneracy: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_DEGENERATE
    manifest.wall_time = time.perf_counter() - t0
    manifest.exit_status = code

    target = args.manifest or (f"{args.output}.manifest.json" if getattr(args, "output", None) else None)
    if target:
        formats.write_json(target, asdict(manifest))
    else:
        sys.stderr.write(formats.dumps(asdict(manifest)))
    return code


if __name__ == "__main__":
    sys.exit(main())
