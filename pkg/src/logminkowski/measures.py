"""Discrete even measures on the unit sphere and the subspace concentration
checker.

A :class:`DiscreteMeasure` stores one representative ``u`` per antipodal
pair together with the mass sitting on *each* of ``u`` and ``-u``; the total
mass therefore counts every stored mass twice.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyMeasure,
    PreconditionViolated,
    VectorOutsideSubspace,
    ZeroMass,
    ZeroVector,
)
from .subspace import RANK_TOL, Subspace, numerical_rank

UNIT_TOL = 1e-12
DUPLICATE_TOL = 1e-12
MEMBER_TOL = 1e-9
EQUALITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    dim: int
    reps: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        reps = np.array(self.reps, dtype=float).reshape(-1, self.dim)
        masses = np.array(self.masses, dtype=float).reshape(-1)
        if reps.shape[0] != masses.shape[0]:
            raise ValueError("reps and masses differ in length")
        if np.any(np.abs(np.linalg.norm(reps, axis=1) - 1.0) > UNIT_TOL):
            raise ValueError("measure support vectors must be unit vectors")
        if np.any(masses <= 0.0):
            raise ZeroMass("measure masses must be strictly positive")
        if reps.shape[0] > 1:
            g = np.abs(reps @ reps.T)
            np.fill_diagonal(g, 0.0)
            if np.any(g > 1.0 - DUPLICATE_TOL):
                raise ValueError("duplicate or antipodal support vectors; use measure_from_pairs to merge")
        reps.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "reps", reps)
        object.__setattr__(self, "masses", masses)

    def __len__(self):
        return self.masses.shape[0]

    @property
    def total(self) -> float:
        return 2.0 * float(np.sum(self.masses))

    def scaled(self, factor: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.dim, self.reps, self.masses * factor)

    def even_atoms(self) -> tuple[np.ndarray, np.ndarray]:
        """All atoms of the even extension: ``(vectors, masses)`` for u and -u."""
        return np.vstack([self.reps, -self.reps]), np.concatenate([self.masses, self.masses])

    def mass_in(self, xi: Subspace, tol: float = MEMBER_TOL) -> float:
        inside = [i for i, u in enumerate(self.reps) if xi.contains(u, tol)]
        return 2.0 * float(np.sum(self.masses[inside]))

    def index_of(self, u, tol: float = 1e-9) -> int | None:
        """Index of the rep parallel or antiparallel to ``u``, if any."""
        u = np.asarray(u, dtype=float)
        u = u / np.linalg.norm(u)
        if len(self) == 0:
            return None
        dots = np.abs(self.reps @ u)
        i = int(np.argmax(dots))
        return i if dots[i] > 1.0 - tol else None


def measure_from_pairs(dim: int, pairs: Iterable[tuple[Sequence[float], float]]) -> DiscreteMeasure:
    """Build an even measure from ``(vector, mass)`` pairs.

    Vectors are normalised; pairs whose vectors coincide up to sign are merged
    by summing their masses, the first occurrence fixing the orientation of
    the stored representative.
    """
    reps: list[np.ndarray] = []
    masses: list[float] = []
    for u, mass in pairs:
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.shape[0] != dim:
            raise ValueError(f"vector {u.tolist()} is not {dim}-dimensional")
        norm = float(np.linalg.norm(u))
        if not norm > 0.0 or not np.isfinite(norm):
            raise ZeroVector("zero or non-finite support vector")
        mass = float(mass)
        if not mass > 0.0:
            raise ZeroMass(f"mass {mass} is not positive")
        if abs(norm - 1.0) > 4 * np.finfo(float).eps:
            u = u / norm
        for j, r in enumerate(reps):
            if abs(float(r @ u)) > 1.0 - DUPLICATE_TOL:
                masses[j] += mass
                break
        else:
            reps.append(u)
            masses.append(mass)
    if not reps:
        raise EmptyMeasure("no pairs given")
    return DiscreteMeasure(dim, np.array(reps), np.array(masses))


class Status(str, enum.Enum):
    STRICT = "StrictlySatisfied"
    EQUALITY = "SatisfiedWithEquality"
    VIOLATED = "Violated"


class Verdict(str, enum.Enum):
    STRICT = "strict"
    EQUALITY = "equality"
    VIOLATION = "violation"


@dataclass(frozen=True, eq=False)
class SubspaceRecord:
    subspace: Subspace
    members: tuple[int, ...]
    mass: float
    bound: float
    verdict: Verdict

    @property
    def ratio(self) -> float:
        return self.mass / self.bound


@dataclass(frozen=True, eq=False)
class ConcentrationReport:
    status: Status
    records: list[SubspaceRecord]
    equality_pairs: list[tuple[Subspace, Subspace]] = field(default_factory=list)
    witness: Subspace | None = None
    total: float = 0.0

    def most_concentrated(self) -> SubspaceRecord | None:
        if not self.records:
            return None
        return max(self.records, key=lambda r: r.ratio)


def _flats(reps: np.ndarray, n: int, member_tol: float, rank_tol: float):
    """Distinct spans of support subsets with 0 < dim < n, keyed by the set of
    support indices each contains (equal member sets <=> equal projectors)."""
    k = reps.shape[0]
    found: dict[tuple[int, ...], Subspace] = {}
    for d in range(1, n):
        for subset in itertools.combinations(range(k), d):
            vecs = reps[list(subset)]
            if numerical_rank(vecs, rank_tol) < d:
                continue
            xi = Subspace.span(vecs, n, rank_tol)
            resid = np.linalg.norm(reps - reps @ xi.projector, axis=1)
            members = tuple(int(i) for i in np.flatnonzero(resid <= member_tol))
            if members not in found:
                found[members] = xi
    return found


def check_subspace_concentration(
    mu: DiscreteMeasure,
    equality_tol: float = EQUALITY_TOL,
    member_tol: float = MEMBER_TOL,
    rank_tol: float = RANK_TOL,
) -> ConcentrationReport:
    """Test the subspace concentration condition for a discrete even measure.

    Only spans of subsets of the support need checking: for any subspace the
    span of the support vectors it contains carries the same mass and has no
    larger dimension. Equality is declared within ``equality_tol * |mu|``.
    An equality subspace whose remaining support does not span a complement
    is a violation of the condition even though the inequality holds.

    Records are ordered by dimension, then by the sorted member indices.
    """
    total = mu.total
    if len(mu) == 0 or not total > 0.0:
        raise EmptyMeasure("measure has no mass")
    n = mu.dim
    slack = equality_tol * total
    flats = _flats(mu.reps, n, member_tol, rank_tol)

    records: list[SubspaceRecord] = []
    pairs: list[tuple[Subspace, Subspace]] = []
    for members, xi in sorted(flats.items(), key=lambda kv: (kv[1].dim, kv[0])):
        mass = 2.0 * float(np.sum(mu.masses[list(members)]))
        bound = xi.dim / n * total
        if mass > bound + slack:
            verdict = Verdict.VIOLATION
        elif mass >= bound - slack:
            rest = [i for i in range(len(mu)) if i not in members]
            comp = Subspace.span(mu.reps[rest], n, rank_tol) if rest else None
            if comp is not None and comp.dim == n - xi.dim and xi.is_complementary_to(comp):
                verdict = Verdict.EQUALITY
                pairs.append((xi, comp))
            else:
                verdict = Verdict.VIOLATION
        else:
            verdict = Verdict.STRICT
        records.append(SubspaceRecord(xi, members, mass, bound, verdict))

    violations = [r for r in records if r.verdict is Verdict.VIOLATION]
    if violations:
        status = Status.VIOLATED
        witness = max(violations, key=lambda r: r.ratio).subspace
    elif pairs:
        status = Status.EQUALITY
        witness = pairs[0][0]
    else:
        status = Status.STRICT
        witness = None
    return ConcentrationReport(status, records, pairs, witness, total)


def check_first_moment(mu, tol: float = 1e-9) -> tuple[np.ndarray, bool]:
    """Sum of ``mass * u`` over all atoms.

    ``mu`` is either a :class:`DiscreteMeasure` (summed over its even
    extension, so the result vanishes identically) or a raw sequence of
    ``(vector, mass)`` atoms, e.g. the signed facet areas of a polytope.
    Passes iff the residual norm is at most ``tol`` times the total mass.
    """
    if isinstance(mu, DiscreteMeasure):
        vecs, masses = mu.even_atoms()
    else:
        atoms = list(mu)
        if not atoms:
            raise EmptyMeasure("no atoms")
        vecs = np.array([np.asarray(u, dtype=float) for u, _ in atoms])
        masses = np.array([float(m) for _, m in atoms])
    moment = masses @ vecs
    total = float(np.sum(masses))
    return moment, bool(np.linalg.norm(moment) <= tol * total)


def restrict_measure(
    mu: DiscreteMeasure,
    xi: Subspace,
    indices: Sequence[int] | None = None,
    member_tol: float = MEMBER_TOL,
) -> DiscreteMeasure:
    """Restriction of ``mu`` to the great subsphere of ``xi``, written in the
    coordinates of ``xi``'s orthonormal basis.

    With ``indices`` given, exactly those atoms are restricted and each must
    lie in ``xi``; otherwise every atom lying in ``xi`` is kept.
    """
    if indices is None:
        indices = [i for i, u in enumerate(mu.reps) if xi.contains(u, member_tol)]
        if not indices:
            raise VectorOutsideSubspace("no mass of the measure lies in the subspace")
    else:
        for i in indices:
            if not xi.contains(mu.reps[i], member_tol):
                raise VectorOutsideSubspace(f"support vector {i} is not in the subspace")
    coords = xi.coords(mu.reps[list(indices)])
    coords /= np.linalg.norm(coords, axis=1, keepdims=True)
    return DiscreteMeasure(xi.dim, coords, mu.masses[list(indices)])


@dataclass(frozen=True)
class AlphaBetaResult:
    t: float
    lam: float
    beta: np.ndarray
    i_o: int | None


def alpha_beta(alpha: Sequence[float], tol: float = 1e-12) -> AlphaBetaResult:
    """Shift weights so that every proper prefix sum becomes nonpositive.

    Given nonnegative ``alpha`` summing to 1 whose proper prefix averages all
    stay below ``1/n``, take ``lam`` as the largest prefix average,
    ``t = 1 - n*lam``, and subtract ``lam`` from each entry (and ``t`` more from
    the last one). ``i_o`` is the 1-based length of the maximising prefix.
    """
    a = np.asarray(alpha, dtype=float).reshape(-1)
    n = a.shape[0]
    if n == 0:
        raise PreconditionViolated("empty alpha")
    if np.any(a < 0.0):
        raise PreconditionViolated("alpha entries must be nonnegative")
    if abs(float(np.sum(a)) - 1.0) > tol:
        raise PreconditionViolated(f"alpha sums to {np.sum(a)!r}, not 1")
    averages = np.cumsum(a)[:-1] / np.arange(1, n)
    if np.any(averages >= 1.0 / n):
        i = int(np.argmax(averages >= 1.0 / n)) + 1
        raise PreconditionViolated(f"prefix average of length {i} is {averages[i - 1]!r} >= 1/{n}")
    if n == 1:
        i_o, lam = None, 0.0
    else:
        i_o = int(np.argmax(averages)) + 1
        lam = float(averages[i_o - 1])
    t = 1.0 - n * lam
    beta = a - lam
    beta[-1] -= t
    return AlphaBetaResult(t, lam, beta, i_o)
