"""Linear subspaces with orthonormal bases, plus the rank test shared by
the checker and the geometry kernel."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

RANK_TOL = 1e-10


def numerical_rank(vectors, rel_tol: float = RANK_TOL) -> int:
    """Rank of the row stack ``vectors`` by column-pivoted QR.

    Pivots below ``rel_tol`` times the largest column norm are treated as zero.
    """
    a = np.atleast_2d(np.asarray(vectors, dtype=float))
    if a.size == 0:
        return 0
    _, r, _ = scipy.linalg.qr(a.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.count_nonzero(diag > rel_tol * diag[0]))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^n stored as ``dim`` orthonormal row vectors."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float).reshape(-1, self.ambient_dim)
        if b.shape[0] and not np.allclose(b @ b.T, np.eye(b.shape[0]), atol=1e-12, rtol=0.0):
            raise ValueError("subspace basis is not orthonormal")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def span(cls, vectors, ambient_dim: int | None = None, rel_tol: float = RANK_TOL) -> "Subspace":
        a = np.atleast_2d(np.asarray(vectors, dtype=float))
        n = a.shape[1] if ambient_dim is None else ambient_dim
        if a.size == 0:
            return cls(n, np.zeros((0, n)))
        q, r, _ = scipy.linalg.qr(a.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        rank = int(np.count_nonzero(diag > rel_tol * diag[0])) if diag[0] > 0 else 0
        basis = q[:, :rank].T
        # re-orthonormalise so the 1e-12 invariant holds after QR round-off
        if rank:
            u, _, vt = np.linalg.svd(basis, full_matrices=False)
            basis = u @ vt
        return cls(n, basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def contains(self, u, tol: float = 1e-9) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.linalg.norm(u - self.projector @ u) <= tol * max(1.0, np.linalg.norm(u)))

    def coords(self, x) -> np.ndarray:
        """Coordinates of ``x`` (or rows of ``x``) in this subspace's basis."""
        return np.asarray(x, dtype=float) @ self.basis.T

    def orthogonal_complement(self) -> "Subspace":
        n = self.ambient_dim
        if self.dim == 0:
            return Subspace(n, np.eye(n))
        _, _, vt = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(n, vt[self.dim:])

    def same_as(self, other: "Subspace", tol: float = 1e-9) -> bool:
        return self.dim == other.dim and np.allclose(self.projector, other.projector, atol=tol, rtol=0.0)

    def is_complementary_to(self, other: "Subspace") -> bool:
        if self.dim + other.dim != self.ambient_dim:
            return False
        return numerical_rank(np.vstack([self.basis, other.basis])) == self.ambient_dim

    def __repr__(self):
        return f"Subspace(dim={self.dim}, basis={np.round(self.basis, 6).tolist()})"
