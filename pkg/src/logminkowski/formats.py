"""JSON, OFF and CSV readers/writers.

Floats are written with 17 significant digits and keys in a fixed order, so
identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .geometry import DirectionSet, Polytope, build_wulff_body
from .measures import ConcentrationReport, DiscreteMeasure, measure_from_pairs
from .subspace import Subspace


class FormatError(ValueError):
    pass


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not np.isfinite(x):
        raise FormatError(f"cannot serialise non-finite value {x}")
    return format(x, ".17g")


def _is_scalar(v) -> bool:
    return v is None or isinstance(v, (bool, int, float, str, np.number, np.bool_))


def _encode(obj, indent: int, level: int) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, int, float, np.number, np.bool_)):
        return _num(obj)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(_is_scalar(v) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise FormatError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


# --- measures --------------------------------------------------------------

def measure_to_dict(mu: DiscreteMeasure) -> dict:
    return {
        "dim": mu.dim,
        "pairs": [{"u": u, "mass": m} for u, m in zip(mu.reps.tolist(), mu.masses.tolist())],
    }


def measure_from_dict(doc) -> DiscreteMeasure:
    try:
        dim = int(doc["dim"])
        pairs = [(np.asarray(p["u"], dtype=float), float(p["mass"])) for p in doc["pairs"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed measure document: {exc!r}") from exc
    return measure_from_pairs(dim, pairs)


def subspace_to_dict(xi: Subspace | None):
    if xi is None:
        return None
    return {"dim": xi.dim, "basis": xi.basis.tolist()}


def report_to_dict(report: ConcentrationReport) -> dict:
    return {
        "status": report.status.value,
        "total": report.total,
        "witness": subspace_to_dict(report.witness),
        "equality_pairs": [
            {"xi": subspace_to_dict(a), "complement": subspace_to_dict(b)} for a, b in report.equality_pairs
        ],
        "records": [
            {
                "dim": r.subspace.dim,
                "basis": r.subspace.basis.tolist(),
                "members": list(r.members),
                "mass": r.mass,
                "bound": r.bound,
                "verdict": r.verdict.value,
            }
            for r in report.records
        ],
    }


# --- polytopes -------------------------------------------------------------

def polytope_to_dict(P: Polytope) -> dict:
    return {
        "dim": P.dim,
        "reps": P.directions.reps.tolist(),
        "support": P.support.tolist(),
        "vertices": P.vertices.tolist(),
        "volume": P.volume,
    }


def polytope_from_dict(doc) -> Polytope:
    """Rebuild a polytope from its representatives and support numbers; the
    stored vertices and volume are informational and not trusted."""
    try:
        dim = int(doc["dim"])
        reps = np.asarray(doc["reps"], dtype=float).reshape(-1, dim)
        support = np.asarray(doc["support"], dtype=float).reshape(-1)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed polytope document: {exc!r}") from exc
    return build_wulff_body(DirectionSet.from_vectors(reps, dim), support)


def write_off(path, P: Polytope) -> None:
    """ASCII OFF mesh of a 3-polytope; faces listed counter-clockwise as seen
    from outside."""
    if P.dim != 3:
        raise ValueError("OFF export needs a 3-dimensional polytope")
    faces = P.active_facets()
    lines = ["OFF", f"{len(P.vertices)} {len(faces)} 0"]
    lines += [" ".join(_num(c) for c in v) for v in P.vertices]
    lines += [" ".join([str(len(f.vertices))] + [str(i) for i in f.vertices]) for f in faces]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_off(path) -> tuple[np.ndarray, list[list[int]]]:
    tokens = Path(path).read_text(encoding="utf-8").split()
    if not tokens or tokens[0] != "OFF":
        raise FormatError("not an OFF file")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        k = int(tokens[pos])
        faces.append([int(t) for t in tokens[pos + 1:pos + 1 + k]])
        pos += 1 + k
    return verts, faces


# --- solve results ---------------------------------------------------------

def result_to_dict(res) -> dict:
    node = res.node
    tree = None
    if node is not None:
        tree = {
            "xi": subspace_to_dict(node.xi),
            "complement": subspace_to_dict(node.xi_complement),
            "a": node.a,
            "r": node.r,
            "normalization": node.normalization(res.target.total),
            "child": result_to_dict(node.child),
            "child_complement": result_to_dict(node.child_complement),
        }
    return {
        "path": res.path,
        "converged": res.converged,
        "residual": res.residual,
        "objective": res.objective,
        "iterations": res.iterations,
        "target_total": res.target.total,
        "polytope": polytope_to_dict(res.body),
        "achieved_measure": measure_to_dict(res.achieved_measure),
        "tree": tree,
    }


def trace_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "objective", "residual", "step"])
    for row in trace:
        w.writerow([row.iteration, _num(row.objective), _num(row.residual), _num(row.step)])
    return buf.getvalue()
