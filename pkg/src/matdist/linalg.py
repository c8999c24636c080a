"""Dense rank-revealing linear algebra shared by the solvers."""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch

DEFAULT_REL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Subspace:
    ambient_dim: int
    basis: np.ndarray  # (ambient_dim, k), orthonormal columns

    def __post_init__(self):
        b = np.array(self.basis, dtype=float).reshape(self.ambient_dim, -1)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self):
        return self.basis.shape[1]

    def project(self, v):
        return self.basis @ (self.basis.T @ v)

    @classmethod
    def from_spanning(cls, M, rel_tol=1e-6):
        """Orthonormal basis of the column span of ``M`` (columns below rel_tol of the
        largest singular value, or below ``rel_tol`` absolutely, are dropped)."""
        M = np.asarray(M, dtype=float)
        if M.size == 0:
            return cls(M.shape[0], np.zeros((M.shape[0], 0)))
        U, s, _ = np.linalg.svd(M, full_matrices=False)
        keep = s > rel_tol * max(s[0], 1.0) if s.size else np.zeros(0, bool)
        return cls(M.shape[0], U[:, keep])

    @classmethod
    def full(cls, dim):
        return cls(dim, np.eye(dim))


def nullspace(A, rel_tol=DEFAULT_REL_TOL):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    p = A.shape[1]
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    if s.size == 0 or s[0] == 0:
        return Subspace(p, np.eye(p))
    rank = int(np.sum(s >= rel_tol * s[0]))
    return Subspace(p, Vt[rank:].T)


def numerical_rank(A, rel_tol=DEFAULT_REL_TOL):
    s = np.linalg.svd(np.atleast_2d(A), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s >= rel_tol * s[0]))


def least_squares(A, b):
    """Minimum-norm minimizer of ``||A v + b||``; returns ``(v, residual_norm)``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"A has {A.shape[0]} rows, b has {b.shape[0]}")
    v = np.linalg.lstsq(A, -b, rcond=None)[0]
    res = float(np.linalg.norm(A @ v + b))
    # lstsq can land a hair above ||b|| when A is numerically zero
    return v, min(res, float(np.linalg.norm(b)))


def principal_sines(U, V):
    """Sine of the largest principal angle from span(U) into span(V)."""
    if U.dim == 0:
        return 0.0
    R = U.basis - V.basis @ (V.basis.T @ U.basis)
    return float(np.linalg.norm(R, 2))


def subspace_compare(U, V, tol=1e-6):
    """One of ``equal``, ``U_subset_V``, ``V_subset_U``, ``incomparable``."""
    if U.ambient_dim != V.ambient_dim:
        raise DimensionMismatch(f"ambient dimensions {U.ambient_dim} and {V.ambient_dim} differ")
    u_in_v = U.dim <= V.dim and principal_sines(U, V) < tol
    v_in_u = V.dim <= U.dim and principal_sines(V, U) < tol
    if u_in_v and v_in_u:
        return "equal"
    if u_in_v:
        return "U_subset_V"
    if v_in_u:
        return "V_subset_U"
    return "incomparable"
