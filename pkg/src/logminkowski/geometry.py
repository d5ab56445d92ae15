"""Origin-symmetric polytopes given by support numbers.

Bodies are built as Wulff shapes ``{x : |x . u_i| <= h_i}``. Vertices come
from solving every n-subset of active hyperplanes: for ``m`` direction pairs
that is ``C(m, n)`` matrix inversions, each reused for the ``2**n`` sign
patterns, i.e. ``O(C(2m, n))`` candidate points overall. This is meant for
desk-scale inputs (``m <= 30``, ``n <= 5``); beyond that the enumeration
grows quickly.

Facet ``(n-1)``-volumes are computed recursively from vertex incidences:
a face's volume is the sum of cone volumes over its sub-faces, measured from
the face's vertex centroid, bottoming out at segment length (1-d) and the
shoelace formula (2-d).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import ConvexHull, cKDTree

from .errors import (
    DegenerateBody,
    NotComplementary,
    OriginNotInterior,
    SingularMap,
    UnboundedBody,
    ZeroDirection,
)
from .measures import DiscreteMeasure
from .subspace import Subspace, numerical_rank


@dataclass(frozen=True)
class Tolerances:
    unit: float = 1e-12
    duplicate: float = 1e-12
    # the next three apply after rescaling so that max(h) == 1
    dedup: float = 1e-9
    feasibility: float = 1e-9
    incidence: float = 1e-9
    area_cutoff: float = 1e-12  # relative to diameter**(n-1)
    degenerate_volume: float = 1e-12
    singular: float = 1e-12


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """One unit vector per antipodal pair of facet normals."""

    dim: int
    reps: np.ndarray

    def __post_init__(self):
        reps = np.array(self.reps, dtype=float).reshape(-1, self.dim)
        norms = np.linalg.norm(reps, axis=1)
        if np.any(np.abs(norms - 1.0) > DEFAULT_TOL.unit):
            raise ValueError("direction representatives must be unit vectors")
        if reps.shape[0] > 1:
            g = np.abs(reps @ reps.T)
            np.fill_diagonal(g, 0.0)
            if np.any(g > 1.0 - DEFAULT_TOL.duplicate):
                raise ValueError("duplicate or antipodal direction representatives")
        reps.setflags(write=False)
        object.__setattr__(self, "reps", reps)

    @classmethod
    def from_vectors(cls, vectors, dim: int | None = None) -> "DirectionSet":
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        if dim is not None:
            v = v.reshape(-1, dim)
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise ZeroDirection("zero direction vector")
        # leave vectors that are already unit untouched so round trips are exact
        norms[np.abs(norms - 1.0) <= 4 * np.finfo(float).eps] = 1.0
        return cls(v.shape[1], v / norms)

    def __len__(self):
        return self.reps.shape[0]

    def spans(self) -> bool:
        return len(self) > 0 and numerical_rank(self.reps) == self.dim


@dataclass(frozen=True, eq=False)
class SupportVector:
    directions: DirectionSet
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.shape[0] != len(self.directions):
            raise ValueError("one support value per direction representative is required")
        if np.any(~(v > 0.0)) or not np.all(np.isfinite(v)):
            raise ValueError("support values must be finite and strictly positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class Facet:
    rep: int
    sign: int
    normal: np.ndarray
    offset: float
    area: float
    vertices: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Polytope:
    """Origin-symmetric polytope with its facet structure.

    ``facets`` holds two records per direction representative (sign +1 and
    -1), including inactive ones with zero area. ``volume`` is computed
    independently of the facet data, by qhull on the vertex set.
    """

    dim: int
    directions: DirectionSet
    support: np.ndarray
    vertices: np.ndarray
    facets: tuple[Facet, ...]

    @property
    def areas(self) -> np.ndarray:
        """Facet area ``S_i`` per representative (the +u_i side)."""
        out = np.zeros(len(self.directions))
        for f in self.facets:
            if f.sign > 0:
                out[f.rep] = f.area
        return out

    @cached_property
    def volume(self) -> float:
        if self.dim == 1:
            return float(np.ptp(self.vertices[:, 0]))
        return float(ConvexHull(self.vertices).volume)

    @property
    def volrep_volume(self) -> float:
        """``(1/n) * sum h_i S_i`` over the facets of both signs."""
        return sum(f.offset * f.area for f in self.facets) / self.dim

    @property
    def diameter(self) -> float:
        return 2.0 * float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def active_facets(self):
        return [f for f in self.facets if f.area > 0.0]


# --- Wulff construction ----------------------------------------------------

def _shoelace(p: np.ndarray) -> float:
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(x[:-1] @ y[1:] - y[:-1] @ x[1:] + x[-1] * y[0] - y[-1] * x[0]))


def _polygon_area(pts2: np.ndarray) -> float:
    c = pts2.mean(axis=0)
    order = np.argsort(np.arctan2(pts2[:, 1] - c[1], pts2[:, 0] - c[0]))
    return _shoelace(pts2[order])


def _face_volume(V: np.ndarray, incidence: np.ndarray, vids: np.ndarray, d: int, eps: float) -> float:
    if len(vids) < d + 1:
        return 0.0
    pts = V[vids]
    c = pts.mean(axis=0)
    _, s, vt = np.linalg.svd(pts - c)
    if s.shape[0] < d or s[d - 1] <= eps:
        return 0.0
    coords = (pts - c) @ vt[:d].T
    if d == 1:
        return float(np.ptp(coords[:, 0]))
    if d == 2:
        return _polygon_area(coords)
    total = 0.0
    seen = set()
    inside = incidence[vids]
    for k in range(incidence.shape[1]):
        mask = inside[:, k]
        cnt = int(mask.sum())
        if cnt < d or cnt == len(vids):
            continue
        key = mask.tobytes()
        if key in seen:
            continue
        seen.add(key)
        rc = coords[mask]
        rcent = rc.mean(axis=0)
        _, rs, rvt = np.linalg.svd(rc - rcent)
        if rs.shape[0] < d - 1 or rs[d - 2] <= eps:
            continue
        height = abs(float(rvt[d - 1] @ rcent))
        total += height * _face_volume(V, incidence, vids[mask], d - 1, eps) / d
    return total


def _plane_facet(V: np.ndarray, vids: np.ndarray, normal: np.ndarray) -> tuple[float, tuple[int, ...]]:
    """Area of a facet of a 3-polytope and its vertices ordered
    counter-clockwise as seen from outside."""
    if len(vids) < 3:
        return 0.0, ()
    pts = V[vids]
    a = np.zeros(3)
    a[int(np.argmin(np.abs(normal)))] = 1.0
    e1 = a - (a @ normal) * normal
    e1 /= np.linalg.norm(e1)
    e2 = np.array([
        normal[1] * e1[2] - normal[2] * e1[1],
        normal[2] * e1[0] - normal[0] * e1[2],
        normal[0] * e1[1] - normal[1] * e1[0],
    ])
    q = pts @ np.column_stack([e1, e2])
    q -= q.mean(axis=0)
    order = np.argsort(np.arctan2(q[:, 1], q[:, 0]))
    return _shoelace(q[order]), tuple(int(i) for i in vids[order])


def _enumerate_vertices(U: np.ndarray, h: np.ndarray, tol: Tolerances) -> np.ndarray:
    m, n = U.shape
    combos = np.array(list(itertools.combinations(range(m), n)), dtype=int)
    A = U[combos]
    det = np.linalg.det(A)
    ok = np.abs(det) > tol.singular
    combos, A, det = combos[ok], A[ok], det[ok]
    if combos.shape[0] == 0:
        raise UnboundedBody("directions do not span the ambient space")
    Ainv = np.linalg.inv(A)
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    rhs = signs[None, :, :] * h[combos][:, None, :]
    X = np.einsum("cij,csj->csi", Ainv, rhs).reshape(-1, n)
    weight = np.repeat(np.abs(det), signs.shape[0])

    feasible = np.all(np.abs(X @ U.T) <= h + tol.feasibility, axis=1)
    X, weight = X[feasible], weight[feasible]
    if X.shape[0] == 0:
        raise DegenerateBody("no feasible vertices")

    pairs = cKDTree(X).query_pairs(tol.dedup, output_type="ndarray")
    N = X.shape[0]
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(N, N))
    _, labels = connected_components(graph, directed=False)
    # one representative per cluster: the best-conditioned solve
    order = np.lexsort((-weight, labels))
    first = np.ones(N, dtype=bool)
    first[1:] = labels[order][1:] != labels[order][:-1]
    verts = X[order[first]]
    return verts[np.lexsort(verts.T[::-1])]


def build_wulff_body(dirs: DirectionSet, h, tol: Tolerances = DEFAULT_TOL) -> Polytope:
    """Intersection of the slabs ``|x . u_i| <= h_i``.

    Raises :class:`UnboundedBody` when the representatives do not span R^n
    and :class:`DegenerateBody` when the resulting volume is below
    ``tol.degenerate_volume`` (measured after rescaling to ``max(h) == 1``).
    Directions whose facet has (relative) area below ``tol.area_cutoff`` are
    kept with area 0.
    """
    if isinstance(h, SupportVector):
        h = h.values
    h = np.asarray(h, dtype=float).reshape(-1)
    n = dirs.dim
    U = dirs.reps
    if h.shape[0] != U.shape[0]:
        raise ValueError("one support value per direction representative is required")
    if np.any(~(h > 0.0)):
        raise OriginNotInterior("support values must be strictly positive")
    if not dirs.spans():
        raise UnboundedBody("directions do not span the ambient space")

    scale = float(h.max())
    hn = h / scale
    if n == 1:
        V = np.array([[hn[0]], [-hn[0]]])
    else:
        V = _enumerate_vertices(U, hn, tol)

    normals = np.vstack([U, -U])
    offsets = np.concatenate([hn, hn])
    incidence = np.abs(V @ normals.T - offsets) <= tol.incidence

    m = U.shape[0]
    areas = np.zeros(2 * m)
    ordered: list[tuple[int, ...]] = []
    for j in range(2 * m):
        vids = np.flatnonzero(incidence[:, j])
        if n == 1:
            areas[j] = 1.0 if len(vids) else 0.0
            ordered.append(tuple(int(k) for k in vids))
        elif n == 3:
            areas[j], order = _plane_facet(V, vids, normals[j])
            ordered.append(order)
        else:
            areas[j] = _face_volume(V, incidence, vids, n - 1, tol.incidence)
            ordered.append(tuple(int(k) for k in vids))
    diam = 2.0 * float(np.max(np.linalg.norm(V, axis=1)))
    if n > 1:
        areas[areas < tol.area_cutoff * diam ** (n - 1)] = 0.0
    if float(offsets @ areas) / n < tol.degenerate_volume:
        raise DegenerateBody("body has (numerically) zero volume")

    facets = []
    for j in range(2 * m):
        i, sign = (j, 1) if j < m else (j - m, -1)
        verts_j = ordered[j] if areas[j] > 0.0 else ()
        facets.append(Facet(i, sign, normals[j].copy(), float(h[i]), float(areas[j] * scale ** (n - 1)), verts_j))

    verts = V * scale
    verts.setflags(write=False)
    support = h.copy()
    support.setflags(write=False)
    return Polytope(n, dirs, support, verts, tuple(facets))


# --- measures of a polytope ------------------------------------------------

def _check_origin_interior(P: Polytope):
    if np.any(P.support <= 0.0):
        raise OriginNotInterior("some facet offset is not positive")


def cone_volume_measure(P: Polytope) -> DiscreteMeasure:
    """Mass ``h_i S_i / n`` on each active direction (and its antipode)."""
    _check_origin_interior(P)
    S = P.areas
    active = S > 0.0
    masses = P.support[active] * S[active] / P.dim
    return DiscreteMeasure(P.dim, P.directions.reps[active], masses)


def lp_surface_measure(P: Polytope, p: float) -> DiscreteMeasure:
    """Mass ``h_i**(1-p) * S_i`` per active direction; ``p=0`` gives n times
    the cone-volume measure and ``p=1`` the surface area measure."""
    _check_origin_interior(P)
    S = P.areas
    active = S > 0.0
    masses = P.support[active] ** (1.0 - p) * S[active]
    return DiscreteMeasure(P.dim, P.directions.reps[active], masses)


def facet_area_atoms(P: Polytope) -> list[tuple[np.ndarray, float]]:
    """Surface area measure as raw signed atoms, one per active facet."""
    return [(f.normal, f.area) for f in P.facets if f.area > 0.0]


# --- transformations -------------------------------------------------------

def apply_linear_map(P: Polytope, phi, tol: Tolerances = DEFAULT_TOL) -> Polytope:
    """Image ``phi P``. Representative ``i`` of the result is the renormalised
    ``phi^{-t} u_i``, with offset ``h_i / |phi^{-t} u_i|``."""
    phi = np.asarray(phi, dtype=float)
    n = P.dim
    if phi.shape != (n, n):
        raise ValueError(f"map must be {n}x{n}")
    if abs(np.linalg.det(phi)) <= tol.singular:
        raise SingularMap("linear map is singular")
    W = P.directions.reps @ np.linalg.inv(phi)
    norms = np.linalg.norm(W, axis=1)
    dirs = DirectionSet(n, W / norms[:, None])
    return build_wulff_body(dirs, P.support / norms, tol)


def product(P: Polytope, Q: Polytope, tol: Tolerances = DEFAULT_TOL) -> Polytope:
    """Cartesian product ``P x Q`` in ``R^(p+q)``."""
    p, q = P.dim, Q.dim
    reps = np.vstack([
        np.hstack([P.directions.reps, np.zeros((len(P.directions), q))]),
        np.hstack([np.zeros((len(Q.directions), p)), Q.directions.reps]),
    ])
    return build_wulff_body(DirectionSet(p + q, reps), np.concatenate([P.support, Q.support]), tol)


def _embedding(E, k: int) -> np.ndarray:
    if isinstance(E, Subspace):
        return E.basis.T
    E = np.asarray(E, dtype=float)
    if E.ndim == 1:
        E = E[:, None]
    if E.shape[1] != k:
        raise ValueError("embedding has the wrong number of columns")
    return E


def direct_sum(P: Polytope, sigma, Q: Polytope, tau, tol: Tolerances = DEFAULT_TOL) -> Polytope:
    """Minkowski sum of ``P`` placed in ``sigma`` and ``Q`` placed in ``tau``.

    ``P`` and ``Q`` are given in their own coordinates; ``sigma`` and ``tau``
    map those coordinates into R^n, either as a :class:`Subspace` (its
    orthonormal basis) or as an injective ``n x dim`` matrix. The sum is the
    image of ``P x Q`` under ``[sigma | tau]``.
    """
    Es, Et = _embedding(sigma, P.dim), _embedding(tau, Q.dim)
    n = Es.shape[0]
    if Et.shape[0] != n or P.dim + Q.dim != n:
        raise NotComplementary("dimensions of the summands do not add up to the ambient dimension")
    G = np.hstack([Es, Et])
    scale = np.prod(np.linalg.norm(G, axis=0))
    if abs(np.linalg.det(G)) <= tol.singular * scale:
        raise NotComplementary("subspaces intersect nontrivially")
    return apply_linear_map(product(P, Q, tol), G, tol)


# --- evaluations -----------------------------------------------------------

def support_eval(P: Polytope, x) -> float:
    return float(np.max(P.vertices @ np.asarray(x, dtype=float)))


def radial_eval(P: Polytope, x) -> float:
    """Largest ``lam`` with ``lam * x`` in ``P``."""
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise ZeroDirection("radial function needs a nonzero vector")
    _check_origin_interior(P)
    dots = np.abs(P.directions.reps @ x)
    hit = dots > 0.0
    return float(np.min(P.support[hit] / dots[hit]))
