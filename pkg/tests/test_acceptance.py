"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line; the lines are collected in the
"acceptance criteria" section of the pytest summary.
"""
import numpy as np

from helpers import cube_measure, random_polytope, random_unimodular
from logminkowski.errors import ConditionViolated
from logminkowski.geometry import (
    DirectionSet,
    SupportVector,
    apply_linear_map,
    build_wulff_body,
    cone_volume_measure,
    lp_surface_measure,
)
from logminkowski.measures import Status, alpha_beta, check_subspace_concentration, measure_from_pairs
from logminkowski.solver import SolveConfig, m0_functional, measure_residual, minimize_strict, solve, volume_gradient
from logminkowski.subspace import Subspace


def _random_dims(rng, count, dims=(1, 2, 3, 4), max_pairs=10):
    for _ in range(count):
        n = int(rng.choice(dims))
        if n == 1:
            yield 1, 1
            continue
        m = int(rng.integers(n, max(n + 1, min(max_pairs, 3 * n)) + 1))
        yield n, m


def test_ac01_volume_identity(rng, criterion):
    worst = 0.0
    for n, m in _random_dims(rng, 100):
        P = random_polytope(rng, n, m)
        worst = max(worst, abs(P.volrep_volume - P.volume) / P.volume)
    criterion("AC1 volume identity (100 bodies, n=1..4)", worst <= 1e-9, f"max rel err {worst:.2e} (tol 1e-9)")


def test_ac02_necessity(rng, criterion):
    bad = 0
    for n, m in _random_dims(rng, 100, dims=(2, 3, 4), max_pairs=9):
        mu = cone_volume_measure(random_polytope(rng, n, m))
        rep = check_subspace_concentration(mu, equality_tol=1e-9)
        bad += rep.status is Status.VIOLATED
    criterion("AC2 necessity (100 polytopes)", bad == 0, f"{bad} Violated verdicts")


def test_ac03_gradient(rng, criterion):
    worst, checked = 0.0, 0
    for n, m in _random_dims(rng, 50, dims=(2, 3, 4), max_pairs=9):
        P = random_polytope(rng, n, m)
        g = volume_gradient(P.directions, P.support)
        for i in np.flatnonzero(P.areas > 0.0):
            dh = 1e-6 * P.support[i]
            hp, hm = P.support.copy(), P.support.copy()
            hp[i] += dh
            hm[i] -= dh
            fd = (build_wulff_body(P.directions, hp).volume - build_wulff_body(P.directions, hm).volume) / (2 * dh)
            worst = max(worst, abs(fd - g[i]) / abs(g[i]))
            checked += 1
    criterion("AC3 gradient vs central differences (50 bodies)", worst <= 1e-4,
              f"max rel err {worst:.2e} over {checked} active components (tol 1e-4)")


def _strict_measure(rng, n, m):
    while True:
        mu = cone_volume_measure(random_polytope(rng, n, m))
        mu = measure_from_pairs(n, list(zip(mu.reps, mu.masses * rng.uniform(0.9, 1.1, size=len(mu)))))
        if check_subspace_concentration(mu).status is Status.STRICT:
            return mu


def test_ac04_round_trip(rng, criterion):
    worst, iters = 0.0, 0
    for k in range(50):
        n = 2 + k % 2
        # three pairs in R^3 bound a parallelepiped, never a strict case
        m = int(rng.integers(3 if n == 2 else 4, 9))
        mu = _strict_measure(rng, n, m)
        res = solve(mu)
        worst = max(worst, measure_residual(mu, res.achieved_measure))
        iters = max(iters, res.iterations)
    criterion("AC4 round-trip reconstruction (50 measures)", worst <= 1e-7,
              f"max residual {worst:.2e}*|mu| (tol 1e-7), max iterations {iters}")


def test_ac05_equality_pipeline(criterion):
    mu = cube_measure()
    res = solve(mu)
    node = res.node
    ok = (
        res.path == "decomposed"
        and abs(node.a - 0.75) <= 1e-15
        and abs(node.r - 1.0) <= 1e-15
        and res.residual <= 1e-8
    )
    criterion("AC5 cube equality pipeline", ok,
              f"path {res.path}, a={node.a!r}, r={node.r!r}, residual {res.residual:.2e}*|mu| (tol 1e-8)")


def _violator(rng):
    n = int(rng.choice((2, 3)))
    d = int(rng.integers(1, n))
    delta = rng.uniform(0.05, 0.3)
    basis = np.linalg.qr(rng.normal(size=(n, n)))[0].T[:d]
    inside = rng.normal(size=(1 if d == 1 else d + 1, d)) @ basis
    outside = rng.normal(size=(n + 2, n))
    f = d / n * (1 + delta)
    pairs = [(u, f / len(inside)) for u in inside] + [(u, (1 - f) / len(outside)) for u in outside]
    return measure_from_pairs(n, pairs), Subspace(n, basis), f, d / n


def test_ac06_violation_detection(rng, criterion):
    hits = 0
    for _ in range(20):
        mu, xi, share, bound = _violator(rng)
        assert share >= 1.05 * bound
        try:
            solve(mu)
        except ConditionViolated as exc:
            hits += exc.witness is not None and exc.witness.same_as(xi, tol=1e-9)
    criterion("AC6 violation detection (20 measures)", hits == 20, f"{hits}/20 raised with the planted witness")


def test_ac07_unimodular_invariance(rng, criterion):
    worst = 0.0
    for k in range(20):
        n = 2 + k % 3
        P = random_polytope(rng, n, int(rng.integers(n + 1, 2 * n + 3)))
        A = random_unimodular(rng, n)
        mu, nu = cone_volume_measure(P), cone_volume_measure(apply_linear_map(P, A))
        Ainv = np.linalg.inv(A)
        for u, v in zip(mu.reps, mu.masses):
            j = nu.index_of(u @ Ainv / np.linalg.norm(u @ Ainv), tol=1e-7)
            worst = max(worst, np.inf if j is None else abs(nu.masses[j] - v) / v)
        if len(mu) != len(nu):
            worst = np.inf
    criterion("AC7 SL(n) invariance (20 maps)", worst <= 1e-7, f"max rel mass err {worst:.2e} (tol 1e-7)")


def test_ac08_lp_homogeneity(rng, criterion):
    worst = 0.0
    for n, m in _random_dims(rng, 30, dims=(2, 3, 4), max_pairs=8):
        P = random_polytope(rng, n, m)
        P2 = build_wulff_body(P.directions, 2 * P.support)
        for p in (0.0, 1.0, 2.0):
            a, b = lp_surface_measure(P, p).masses, lp_surface_measure(P2, p).masses
            worst = max(worst, float(np.max(np.abs(b - 2 ** (n - p) * a) / (2 ** (n - p) * a))))
    criterion("AC8 L_p homogeneity (p=0,1,2)", worst <= 1e-9, f"max rel err {worst:.2e} (tol 1e-9)")


def _admissible_alpha(rng):
    while True:
        n = int(rng.integers(1, 11))
        a = rng.dirichlet(np.full(n, rng.uniform(0.2, 3.0)))
        if rng.random() < 0.5:
            a = np.sort(a)
        a[-1] = 1.0 - a[:-1].sum()
        if a[-1] >= 0 and np.all(np.cumsum(a)[:-1] / np.arange(1, n) < 1.0 / n):
            return a


def test_ac09_alpha_beta(rng, criterion):
    worst = 0.0
    for _ in range(1000):
        a = _admissible_alpha(rng)
        n = len(a)
        r = alpha_beta(a)
        expected = a - r.lam
        expected[-1] -= r.t
        errs = [
            float(np.max(np.abs(r.beta - expected))),
            abs(float(r.beta.sum())),
            max(0.0, float(np.max(np.cumsum(r.beta)[:-1], initial=0.0))),
            abs(r.lam - (1 - r.t) / n),
            max(0.0, -r.lam),
        ]
        if not 0.0 < r.t <= 1.0:
            errs.append(np.inf)
        worst = max(worst, *errs)
    criterion("AC9 alpha/beta invariants (1000 vectors)", worst <= 1e-12, f"max violation {worst:.2e} (tol 1e-12)")


def test_ac10_reduction_audit(rng, criterion):
    beaten, samples = 0, 0
    per_measure = 500
    for k in range(20):
        n = 2 + k % 2
        mu = measure_from_pairs(n, [(rng.normal(size=n), rng.uniform(0.1, 1.0)) for _ in range(int(rng.integers(n, 6)))])
        best = max((r.ratio for r in check_subspace_concentration(mu).records), default=0.0)
        vecs = np.vstack([mu.reps, -mu.reps])
        masses = np.r_[mu.masses, mu.masses]
        for _ in range(per_measure):
            d = int(rng.integers(1, n))
            j = int(rng.integers(0, d + 1))
            picks = vecs[rng.choice(len(vecs), size=j, replace=False)] if j else np.zeros((0, n))
            Q = np.linalg.qr(np.vstack([picks, rng.normal(size=(d - j, n))]).T)[0][:, :d]
            if np.linalg.matrix_rank(Q, tol=1e-9) < d:
                continue
            inside = np.linalg.norm(vecs - (vecs @ Q) @ Q.T, axis=1) <= 1e-9
            ratio = masses[inside].sum() / (d / n * masses.sum())
            beaten += ratio > best + 1e-9
            samples += 1
    criterion("AC10 checker reduction audit", beaten == 0 and samples >= 10_000 - 100,
              f"{beaten} of {samples} random subspaces beat the subset-span maximum")


def test_ac11_local_minimality(rng, criterion):
    worst = np.inf
    for k in range(5):
        n = 2 + k % 2
        mu = _strict_measure(rng, n, int(rng.integers(4, 8)))
        res = minimize_strict(mu, SolveConfig())
        dirs = DirectionSet(n, mu.reps)
        base = m0_functional(mu, SupportVector(dirs, res.support))
        for _ in range(20):
            g = rng.uniform(-1.0, 1.0, size=len(mu))
            g /= np.max(np.abs(g))
            val = m0_functional(mu, SupportVector(dirs, res.support * np.exp(1e-4 * g)))
            worst = min(worst, val - base)
    criterion("AC11 local minimality probe (5 solutions x 20 perturbations)", worst >= -1e-12,
              f"min m0 change {worst:.2e} (slack 1e-12)")
