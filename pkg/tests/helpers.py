"""Shared constructors for test bodies and measures."""
import itertools

import numpy as np

from logminkowski.errors import GeometryError
from logminkowski.geometry import DirectionSet, build_wulff_body
from logminkowski.measures import measure_from_pairs

SQRT3 = np.sqrt(3.0)


def cube(n=3, h=1.0):
    return build_wulff_body(DirectionSet.from_vectors(np.eye(n)), np.full(n, h))


def octahedron():
    reps = np.array([s for s in itertools.product((1.0, -1.0), repeat=3) if s[0] > 0])
    return build_wulff_body(DirectionSet.from_vectors(reps), np.full(4, 1 / SQRT3))


def hexagon(h=1.0):
    ang = np.arange(3) * np.pi / 3
    return build_wulff_body(DirectionSet.from_vectors(np.c_[np.cos(ang), np.sin(ang)]), np.full(3, h))


def cube_measure():
    return measure_from_pairs(3, [(e, 4 / 3) for e in np.eye(3)])


def octahedron_measure():
    reps = [s for s in itertools.product((1.0, -1.0), repeat=3) if s[0] > 0]
    return measure_from_pairs(3, [(u, 1 / 6) for u in reps])


def hexagon_measure(masses=None):
    ang = np.arange(3) * np.pi / 3
    masses = np.full(3, 1 / SQRT3) if masses is None else masses
    return measure_from_pairs(2, [((np.cos(t), np.sin(t)), m) for t, m in zip(ang, masses)])


def random_polytope(rng, n, m, spread=(0.5, 1.5)):
    """Random Wulff body with ``m`` direction pairs in R^n."""
    while True:
        U = rng.normal(size=(m, n))
        h = rng.uniform(*spread, size=m)
        try:
            return build_wulff_body(DirectionSet.from_vectors(U), h)
        except (GeometryError, ValueError):
            continue


def random_unimodular(rng, n):
    while True:
        A = rng.normal(size=(n, n))
        d = np.linalg.det(A)
        if abs(d) > 0.2:
            break
    if d < 0:
        A[0] *= -1
    return A / abs(d) ** (1.0 / n)


def shoelace(poly):
    """Area of a convex polygon given by unordered vertices."""
    c = poly.mean(axis=0)
    p = poly[np.argsort(np.arctan2(poly[:, 1] - c[1], poly[:, 0] - c[0]))]
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)
