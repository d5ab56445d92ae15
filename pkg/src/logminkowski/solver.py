"""Reconstruct an origin-symmetric body from its cone-volume measure.

Strictly concentrated measures are handled by minimising the scale-free
functional

    m0(h) = V(h)^(-1/n) * exp(sum_u (mu(u)/|mu|) log h(u))

over support numbers, in the chart ``y = log h``. Measures meeting the
concentration bound with equality are split along a complementary pair of
subspaces, solved in each subspace, and glued back as a Minkowski sum.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConditionViolated,
    DegenerateBody,
    DivergenceDetected,
    LiftDegenerate,
    NotComplementary,
    OriginNotInterior,
    UnboundedBody,
)
from .geometry import (
    DirectionSet,
    Polytope,
    SupportVector,
    build_wulff_body,
    cone_volume_measure,
    direct_sum,
    support_eval,
)
from .measures import (
    ConcentrationReport,
    DiscreteMeasure,
    Status,
    check_subspace_concentration,
    restrict_measure,
)
from .subspace import Subspace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveConfig:
    tol_residual: float = 1e-8
    max_iters: int = 10000
    armijo_c: float = 1e-4
    backtrack_ratio: float = 0.5
    divergence_ratio: float = 1e8
    equality_tol: float = 1e-9
    # "bfgs" (quasi-Newton) or "steepest"; both use Armijo backtracking
    direction: str = "bfgs"
    max_log_step: float = 1.0
    max_backtracks: int = 60

    def __post_init__(self):
        for name in ("tol_residual", "max_iters", "armijo_c", "divergence_ratio", "equality_tol", "max_log_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.backtrack_ratio < 1.0:
            raise ValueError("backtrack_ratio must lie in (0, 1)")
        if self.direction not in ("bfgs", "steepest"):
            raise ValueError(f"unknown descent direction {self.direction!r}")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    objective: float
    residual: float
    step: float


@dataclass(eq=False)
class DecompositionNode:
    xi: Subspace
    xi_complement: Subspace
    a: float
    r: float
    child: "SolveResult"
    child_complement: "SolveResult"
    lift: np.ndarray
    lift_complement: np.ndarray

    @property
    def lifted(self) -> np.ndarray:
        """Vertices of D (the first child lifted along xi-perp), in R^n."""
        return self.child.body.vertices @ self.lift.T

    @property
    def lifted_complement(self) -> np.ndarray:
        return self.child_complement.body.vertices @ self.lift_complement.T

    def normalization(self, total: float) -> float:
        n = self.xi.ambient_dim
        m = self.xi.dim
        return m * (n - m) / n**2 * self.r * self.a**2 * total


@dataclass(eq=False)
class SolveResult:
    target: DiscreteMeasure
    body: Polytope
    achieved_measure: DiscreteMeasure
    residual: float
    objective: float
    iterations: int
    path: str
    node: DecompositionNode | None = None
    trace: list[TraceRow] = field(default_factory=list)
    support: np.ndarray | None = None
    residual_tol: float = 1e-8

    @property
    def converged(self) -> bool:
        return self.residual <= self.residual_tol


def measure_residual(target: DiscreteMeasure, achieved: DiscreteMeasure) -> float:
    """``max |achieved - target| / |target|`` over all directions of either."""
    worst = 0.0
    used = set()
    for i, u in enumerate(target.reps):
        j = achieved.index_of(u)
        got = 0.0 if j is None else float(achieved.masses[j])
        if j is not None:
            used.add(j)
        worst = max(worst, abs(got - float(target.masses[i])))
    for j, m in enumerate(achieved.masses):
        if j not in used:
            worst = max(worst, float(m))
    return worst / target.total


# --- functionals -----------------------------------------------------------

def log_functional(mu: DiscreteMeasure, P: Polytope) -> float:
    """Integral of ``log h_P`` against the even extension of ``mu``."""
    if P.dim != mu.dim:
        raise ValueError("dimension mismatch")
    h = np.array([support_eval(P, u) for u in mu.reps])
    if np.any(h <= 0.0):
        raise OriginNotInterior("support function is not positive on the measure's support")
    return 2.0 * float(mu.masses @ np.log(h))


def _aligned_values(mu: DiscreteMeasure, h: SupportVector) -> np.ndarray:
    reps = h.directions.reps
    if reps.shape != mu.reps.shape or not np.allclose(np.abs(np.sum(reps * mu.reps, axis=1)), 1.0, atol=1e-9):
        raise ValueError("support vector is not indexed by the measure's support")
    return np.asarray(h.values)


def m0_functional(mu: DiscreteMeasure, h: SupportVector) -> float:
    values = _aligned_values(mu, h)
    weights = 2.0 * mu.masses / mu.total
    V = build_wulff_body(h.directions, values).volrep_volume
    return float(V ** (-1.0 / mu.dim) * math.exp(float(weights @ np.log(values))))


def volume_gradient(dirs: DirectionSet, h) -> np.ndarray:
    """``dV/dh_i`` for the Wulff body, with ``h(-u_i)`` tied to ``h(u_i)``."""
    return 2.0 * build_wulff_body(dirs, h).areas


# --- strict case -----------------------------------------------------------

class _Objective:
    """``log m0`` and its gradient in the chart ``y = log h``."""

    def __init__(self, mu: DiscreteMeasure):
        self.n = mu.dim
        self.dirs = DirectionSet(mu.dim, mu.reps)
        self.weights = 2.0 * mu.masses / mu.total

    def __call__(self, y: np.ndarray):
        h = np.exp(y)
        S = build_wulff_body(self.dirs, h).areas
        V = 2.0 * float(h @ S) / self.n
        value = -math.log(V) / self.n + float(self.weights @ y)
        grad = self.weights - 2.0 * h * S / (self.n * V)
        return value, grad


def _segment(mu: DiscreteMeasure) -> Polytope:
    """A 1-d even measure with pair mass v is the cone-volume measure of [-v, v]."""
    if len(mu) != 1:
        raise ValueError("a one-dimensional measure has a single antipodal pair")
    return build_wulff_body(DirectionSet(1, mu.reps), mu.masses)


def _finish(mu: DiscreteMeasure, body: Polytope, path: str, **kw) -> SolveResult:
    achieved = cone_volume_measure(body)
    return SolveResult(
        target=mu,
        body=body,
        achieved_measure=achieved,
        residual=measure_residual(mu, achieved),
        objective=log_functional(mu, body),
        path=path,
        **kw,
    )


def minimize_strict(
    mu: DiscreteMeasure,
    cfg: SolveConfig = SolveConfig(),
    report: ConcentrationReport | None = None,
) -> SolveResult:
    """Minimise ``log m0`` for a strictly concentrated measure.

    Descent in ``y = log h`` from ``h = 1`` with Armijo backtracking; the
    gradient component for pair ``i`` is ``2 c_i - 2 h_i S_i / (n V)`` with
    ``c_i`` the pair's share of ``|mu|``, so half its sup-norm is exactly the
    relative cone-volume residual. The converged body is rescaled to volume
    ``|mu|``.

    Raises :class:`DivergenceDetected` when ``max h / min h`` exceeds
    ``cfg.divergence_ratio``, when the iteration budget runs out, or when the
    line search stalls.
    """
    n = mu.dim
    if not DirectionSet(n, mu.reps).spans():
        raise UnboundedBody("support of the measure does not span the ambient space")
    if n == 1:
        return _finish(mu, _segment(mu), "strict", iterations=0, residual_tol=cfg.tol_residual)

    def hint():
        rep = report if report is not None else check_subspace_concentration(mu, cfg.equality_tol)
        top = rep.most_concentrated()
        return None if top is None else top.subspace

    objective = _Objective(mu)
    k = len(mu)
    y = np.zeros(k)
    F, g = objective(y)
    H = np.eye(k)
    trace = [TraceRow(0, math.exp(F), 0.5 * float(np.max(np.abs(g))), 0.0)]
    step = 1.0
    it = 0
    while True:
        residual = 0.5 * float(np.max(np.abs(g)))
        if residual <= cfg.tol_residual:
            break
        if it >= cfg.max_iters:
            raise DivergenceDetected(
                f"no convergence after {it} iterations (residual {residual:.3e})",
                witness=hint(), iterations=it,
            )
        d = -H @ g if cfg.direction == "bfgs" else -g
        if not g @ d < 0.0:
            H = np.eye(k)
            d = -g
        a = step if cfg.direction == "steepest" else 1.0
        accepted = False
        for _ in range(cfg.max_backtracks):
            a = min(a, cfg.max_log_step / float(np.max(np.abs(d))))
            y_new = y + a * d
            try:
                F_new, g_new = objective(y_new)
            except DegenerateBody:
                F_new = math.inf
            if F_new <= F + cfg.armijo_c * a * float(g @ d):
                accepted = True
                break
            a *= cfg.backtrack_ratio
        if not accepted:
            if cfg.direction == "bfgs" and not np.array_equal(H, np.eye(k)):
                H = np.eye(k)
                continue
            raise DivergenceDetected(
                f"line search stalled at iteration {it} (residual {residual:.3e})",
                witness=hint(), iterations=it,
            )
        s, dg = y_new - y, g_new - g
        sy = float(s @ dg)
        if cfg.direction == "bfgs" and sy > 1e-300:
            rho = 1.0 / sy
            A = np.eye(k) - rho * np.outer(s, dg)
            H = A @ H @ A.T + rho * np.outer(s, s)
        # m0 is scale invariant: keep log h centred
        y = y_new - np.mean(y_new)
        F, g = F_new, g_new
        step = min(2.0 * a, 1e3)
        it += 1
        ratio = math.exp(float(np.ptp(y)))
        trace.append(TraceRow(it, math.exp(F), 0.5 * float(np.max(np.abs(g))), a))
        if ratio > cfg.divergence_ratio:
            raise DivergenceDetected(
                f"support anisotropy {ratio:.3e} exceeds {cfg.divergence_ratio:.1e}",
                witness=hint(), iterations=it, ratio=ratio,
            )

    h = np.exp(y)
    V = build_wulff_body(objective.dirs, h).volrep_volume
    h = h * (mu.total / V) ** (1.0 / n)
    body = build_wulff_body(objective.dirs, h)
    logger.debug("strict solve converged in %d iterations", it)
    return _finish(mu, body, "strict", iterations=it, trace=trace, support=h, residual_tol=cfg.tol_residual)


# --- equality case ---------------------------------------------------------

def split_constants(xi: Subspace, xi_complement: Subspace, total: float) -> tuple[float, float]:
    """Scaling ``a`` and lift ratio ``r`` for gluing bodies in ``xi`` and a
    complement ``xi'``.

    ``r`` is the factor by which lifting from ``xi`` into ``xi'``-perp scales
    m-volume; ``a`` is chosen so that ``m(n-m)/n^2 * r * a^2 * total == 1``.
    """
    n, m = xi.ambient_dim, xi.dim
    M = xi.basis @ xi_complement.orthogonal_complement().basis.T
    det = abs(float(np.linalg.det(M)))
    if det < 1e-12:
        raise LiftDegenerate("projection onto the subspace is singular on the complement's orthogonal space")
    r = 1.0 / det
    a = n / math.sqrt(m * (n - m) * r * total)
    return a, r


def _lift(xi: Subspace, other: Subspace) -> np.ndarray:
    """``n x m`` matrix taking xi-coordinates to the point of ``other``-perp
    that projects orthogonally onto them."""
    target = other.orthogonal_complement()
    M = xi.basis @ target.basis.T
    if abs(float(np.linalg.det(M))) < 1e-12:
        raise LiftDegenerate("lift is singular")
    return target.basis.T @ np.linalg.inv(M)


def direct_sum_combine(
    child: Polytope,
    child_complement: Polytope,
    xi: Subspace,
    xi_complement: Subspace,
) -> tuple[Polytope, np.ndarray, np.ndarray]:
    """Lift ``child`` (in ``xi`` coordinates) into ``xi'``-perp and
    ``child_complement`` into ``xi``-perp, and return their Minkowski sum
    together with both lift matrices."""
    if not xi.is_complementary_to(xi_complement):
        raise NotComplementary("subspaces are not complementary")
    L = _lift(xi, xi_complement)
    L2 = _lift(xi_complement, xi)
    return direct_sum(child, L, child_complement, L2), L, L2


def _decompose(mu: DiscreteMeasure, report: ConcentrationReport, cfg: SolveConfig) -> SolveResult:
    xi, xi2 = report.equality_pairs[0]
    if not xi.is_complementary_to(xi2):
        raise NotComplementary("equality subspace has no complement in the support (internal error)")
    total = mu.total
    a, r = split_constants(xi, xi2, total)
    inside = [i for i, u in enumerate(mu.reps) if xi.contains(u)]
    inside2 = [i for i, u in enumerate(mu.reps) if xi2.contains(u)]
    if len(inside) + len(inside2) != len(mu):
        raise NotComplementary("measure is not concentrated on the two subspaces (internal error)")
    child = solve(restrict_measure(mu, xi, inside).scaled(a), cfg)
    child2 = solve(restrict_measure(mu, xi2, inside2).scaled(a), cfg)
    body, L, L2 = direct_sum_combine(child.body, child2.body, xi, xi2)
    node = DecompositionNode(xi, xi2, a, r, child, child2, L, L2)
    iterations = child.iterations + child2.iterations
    return _finish(mu, body, "decomposed", iterations=iterations, node=node, residual_tol=cfg.tol_residual)


def solve(mu: DiscreteMeasure, cfg: SolveConfig = SolveConfig()) -> SolveResult:
    """Find an origin-symmetric body whose cone-volume measure is ``mu``.

    Routes on the concentration report: violated measures raise
    :class:`ConditionViolated` carrying the witness subspace; strict ones are
    minimised directly; equality cases are split along the first reported
    complementary pair and solved recursively, a 1-d measure being realised
    by a segment.
    """
    if not mu.total > 0.0:
        raise ValueError("measure has no mass")
    if mu.dim == 1:
        return _finish(mu, _segment(mu), "strict", iterations=0, residual_tol=cfg.tol_residual)
    report = check_subspace_concentration(mu, cfg.equality_tol)
    if report.status is Status.VIOLATED:
        raise ConditionViolated("measure violates the subspace concentration condition", report.witness)
    if report.status is Status.STRICT:
        return minimize_strict(mu, cfg, report)
    return _decompose(mu, report, cfg)
