"""Pointwise material equations for Cosserat laws.

Unknowns are the constant coefficients of a left-invariant field on the
groupoid.  The flat layout of a :class:`CoefficientVector` is
``[theta (n) | thetaA (n*n, row-major (l, i)) | thetaB (n*n) | thetaC (n**3, (l, i, k))]``
and of a :class:`HolonomicCoefficientVector`
``[theta (n) | D (n*n) | S (n * n(n+1)/2, pairs i <= k in lexicographic order)]``.

Sign convention.  The non-holonomic field moves the source along ``+theta`` and
its equation carries ``+dW/dx``; the holonomic field is a complete lift that
moves the source along ``-theta`` and its equation carries ``-dW/dx``.  The
embedding :func:`embedding_matrix` maps ``theta -> -theta`` so that
``A_h = A_nh @ E`` holds exactly.  Dimensions and classifications do not
depend on this choice; flows of null-space fields stay material only with it.
"""

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import NotAdmissible, RankNotSaturated, SourceMismatch
from .jets import TOL_MATCH, Jet, TangentJet, compose, coordinate_slices, random_blocks
from .laws import evaluate, evaluate_batch, evaluate_values, jets_to_array
from .linalg import DEFAULT_REL_TOL, Subspace, nullspace, subspace_compare


def p_dim(n):
    return n + 2 * n * n + n ** 3


def q_dim(n):
    return n + n * n + n * n * (n + 1) // 2


def symmetric_pairs(n):
    return [(i, k) for i in range(n) for k in range(i, n)]


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    theta: np.ndarray
    thetaA: np.ndarray
    thetaB: np.ndarray
    thetaC: np.ndarray

    @property
    def n(self):
        return len(self.theta)

    def as_vector(self):
        return np.concatenate([np.ravel(self.theta), np.ravel(self.thetaA),
                               np.ravel(self.thetaB), np.ravel(self.thetaC)])

    @classmethod
    def from_vector(cls, vec, n):
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (p_dim(n),):
            raise ValueError(f"coefficient vector for n={n} has length {p_dim(n)}, got {vec.shape}")
        a, b = n, n + n * n
        return cls(vec[:a].copy(), vec[a:b].reshape(n, n).copy(),
                   vec[b:b + n * n].reshape(n, n).copy(), vec[b + n * n:].reshape(n, n, n).copy())

    @classmethod
    def zero(cls, n):
        return cls.from_vector(np.zeros(p_dim(n)), n)


@dataclass(frozen=True, eq=False)
class HolonomicCoefficientVector:
    theta: np.ndarray
    D: np.ndarray
    S: np.ndarray  # (n, n(n+1)/2)

    @property
    def n(self):
        return len(self.theta)

    def S_full(self):
        n = self.n
        out = np.zeros((n, n, n))
        for col, (i, k) in enumerate(symmetric_pairs(n)):
            out[:, i, k] = out[:, k, i] = self.S[:, col]
        return out

    def as_vector(self):
        return np.concatenate([np.ravel(self.theta), np.ravel(self.D), np.ravel(self.S)])

    @classmethod
    def from_vector(cls, vec, n):
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (q_dim(n),):
            raise ValueError(f"holonomic vector for n={n} has length {q_dim(n)}, got {vec.shape}")
        return cls(vec[:n].copy(), vec[n:n + n * n].reshape(n, n).copy(),
                   vec[n + n * n:].reshape(n, -1).copy())

    def embed(self):
        return CoefficientVector.from_vector(embedding_matrix(self.n) @ self.as_vector(), self.n)


def embedding_matrix(n):
    """Linear map from holonomic to non-holonomic coefficients (p x q)."""
    p, q = p_dim(n), q_dim(n)
    E = np.zeros((p, q))
    E[:n, :n] = -np.eye(n)
    nn = n * n
    E[n:n + nn, n:n + nn] = np.eye(nn)
    E[n + nn:n + 2 * nn, n:n + nn] = np.eye(nn)
    c0 = n + 2 * nn
    npairs = n * (n + 1) // 2
    for l in range(n):
        for col, (i, k) in enumerate(symmetric_pairs(n)):
            j = n + nn + l * npairs + col
            E[c0 + (l * n + i) * n + k, j] = 1.0
            E[c0 + (l * n + k) * n + i, j] = 1.0
    return E


def sample_jet_array(x, count, rng):
    """Flat coordinates of ``count`` generic jets with source ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    u = rng.uniform(-1.0, 1.0, size=(count, n))
    A = random_blocks(rng, n, count)
    B = random_blocks(rng, n, count)
    C = rng.uniform(-1.0, 1.0, size=(count, n, n, n))
    return np.concatenate([np.broadcast_to(x, (count, n)), x + u, A.reshape(count, -1),
                           B.reshape(count, -1), C.reshape(count, -1)], axis=1)


def sample_jets_at(x, count, seed, n=None):
    x = np.asarray(x, dtype=float)
    if n is not None and x.shape != (n,):
        raise ValueError(f"point must have length {n}")
    if count < 1:
        raise ValueError("count must be at least 1")
    X = sample_jet_array(x, count, np.random.default_rng(seed))
    return [Jet.from_vector(row, x.shape[0]) for row in X]


def _blocks(X, n):
    s = coordinate_slices(n)
    B = X.shape[0]
    return (X[:, s["yA"]].reshape(B, n, n), X[:, s["yB"]].reshape(B, n, n),
            X[:, s["yC"]].reshape(B, n, n, n))


def _grad_blocks(G, n):
    s = coordinate_slices(n)
    B, d = G.shape[:2]
    return (G[..., s["x"]], G[..., s["yA"]].reshape(B, d, n, n),
            G[..., s["yB"]].reshape(B, d, n, n), G[..., s["yC"]].reshape(B, d, n, n, n))


def nonholonomic_rows(X, G, n, x_sign=1.0):
    """Rows of the non-holonomic equation from jet coordinates ``X`` (B, N) and law
    gradients ``G`` (B, d, N); returns (B*d, p)."""
    yA, yB, yC = _blocks(X, n)
    Wx, WA, WB, WC = _grad_blocks(G, n)
    B, d = G.shape[:2]
    cA = np.einsum("bjl,baji->bali", yA, WA) + np.einsum("bjlk,bajik->bali", yC, WC)
    cB = np.einsum("bjl,baji->bali", yB, WB) + np.einsum("bjml,bajmi->bali", yC, WC)
    cC = np.einsum("bjl,bajik->balik", yA, WC)
    return np.concatenate([x_sign * Wx, cA.reshape(B, d, -1), cB.reshape(B, d, -1),
                           cC.reshape(B, d, -1)], axis=2).reshape(B * d, -1)


def holonomic_rows(X, G, n):
    yA, yB, yC = _blocks(X, n)
    Wx, WA, WB, WC = _grad_blocks(G, n)
    B, d = G.shape[:2]
    D = (np.einsum("bjl,baji->bali", yA, WA) + np.einsum("bjl,baji->bali", yB, WB)
         + np.einsum("bjlk,bajik->bali", yC, WC) + np.einsum("bjml,bajmi->bali", yC, WC))
    Sfull = np.einsum("bjl,bajik->balik", yA, WC)
    pairs = symmetric_pairs(n)
    S = np.stack([Sfull[..., i, k] + Sfull[..., k, i] if i != k else Sfull[..., i, i]
                  for i, k in pairs], axis=-1)
    return np.concatenate([-Wx, D.reshape(B, d, -1), S.reshape(B, d, -1)], axis=2).reshape(B * d, -1)


def _jets_at(x, jets):
    x = np.asarray(x, dtype=float)
    X = jets_to_array(jets) if not isinstance(jets, np.ndarray) else np.atleast_2d(jets)
    n = x.shape[0]
    gap = np.max(np.abs(X[:, :n] - x)) if len(X) else 0.0
    if gap > TOL_MATCH:
        raise SourceMismatch(f"a jet's source differs from the point {x.tolist()} by {gap:.3e}")
    return X, n


def assemble_nonholonomic(law, x, jets, x_sign=1.0):
    """Constraint matrix (len(jets) * d, p).  ``x_sign`` selects the sign of the
    dW/dx column; only the default is consistent with the field's flow."""
    X, n = _jets_at(x, jets)
    _, G = evaluate_batch(law, X)
    return nonholonomic_rows(X, G, n, x_sign)


def assemble_holonomic(law, x, jets):
    X, n = _jets_at(x, jets)
    _, G = evaluate_batch(law, X)
    return holonomic_rows(X, G, n)


@dataclass(frozen=True)
class SolverConfig:
    seed: int = 0
    rel_tol: float = DEFAULT_REL_TOL
    batch_size: int | None = None  # None means 4 * p
    max_batches: int = 20
    stable_batches: int = 3
    base_tol: float = 1e-6

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.max_batches < self.stable_batches + 1:
            raise ValueError("max_batches must exceed stable_batches")


@dataclass(frozen=True, eq=False)
class DistributionSample:
    """Solution spaces at one body point.

    ``system`` holds an SVD-compressed copy (at most p x p) of the assembled
    non-holonomic system: it has the same row space and singular values as the
    ``row_count`` rows actually assembled.
    """

    point: np.ndarray
    system: np.ndarray
    row_count: int
    null_nh: Subspace
    null_h: Subspace
    base_nh: Subspace
    base_h: Subspace
    sample_count: int
    rank_saturated: bool
    rank_history: tuple = field(default=())

    @property
    def n(self):
        return len(self.point)

    @property
    def dim_nh(self):
        return self.base_nh.dim

    @property
    def dim_h(self):
        return self.base_h.dim

    def embedded_holonomic(self):
        return Subspace.from_spanning(embedding_matrix(self.n) @ self.null_h.basis)

    def second_grade_relation(self, tol=1e-6):
        return subspace_compare(self.embedded_holonomic(), self.null_nh, tol)


def _compress(M):
    if M.shape[0] == 0:
        return M, np.zeros(0)
    _, s, Vt = np.linalg.svd(M, full_matrices=False)
    return s[:, None] * Vt, s


def _rank(s, rel_tol):
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s >= rel_tol * s[0]))


def solve_point(law, x, cfg=None, point_index=0, warn=True):
    cfg = cfg or SolverConfig()
    x = np.asarray(x, dtype=float)
    n = law.n
    if x.shape != (n,):
        raise ValueError(f"point must have length {n}")
    p = p_dim(n)
    E = embedding_matrix(n)
    batch = cfg.batch_size or 4 * p
    system = np.zeros((0, p))
    rows = 0
    history = []
    saturated = False
    for b in range(cfg.max_batches):
        rng = np.random.default_rng([cfg.seed, point_index, b])
        X = sample_jet_array(x, batch, rng)
        _, G = evaluate_batch(law, X)
        system, s = _compress(np.vstack([system, nonholonomic_rows(X, G, n)]))
        rows += batch * law.d
        s_h = np.linalg.svd(system @ E, compute_uv=False)
        history.append((_rank(s, cfg.rel_tol), _rank(s_h, cfg.rel_tol)))
        k = cfg.stable_batches
        if len(history) > k and all(h == history[-1] for h in history[-k - 1:]):
            saturated = True
            break
    if not saturated and warn:
        warnings.warn(RankNotSaturated(f"rank still changing after {len(history)} batches at point {x.tolist()}"),
                      stacklevel=2)
    null_nh = nullspace(system, cfg.rel_tol)
    null_h = nullspace(system @ E, cfg.rel_tol)
    return DistributionSample(
        point=x, system=system, row_count=rows, null_nh=null_nh, null_h=null_h,
        base_nh=Subspace.from_spanning(null_nh.basis[:n], cfg.base_tol),
        base_h=Subspace.from_spanning(null_h.basis[:n], cfg.base_tol),
        sample_count=len(history) * batch, rank_saturated=saturated,
        rank_history=tuple(history))


def admissible_field_at(c, g):
    """Value at ``g`` of the left-invariant field with constant coefficients ``c``."""
    dyC = (np.einsum("jlk,li->jik", g.yC, c.thetaA) + np.einsum("jil,lk->jik", g.yC, c.thetaB)
           + np.einsum("jl,lik->jik", g.yA, c.thetaC))
    return TangentJet(g, np.array(c.theta, dtype=float), np.zeros(g.n), g.yA @ c.thetaA,
                      g.yB @ c.thetaB, dyC)


def directional_derivative(law, v):
    ev = evaluate(law, v.base)
    return ev.gradient @ v.as_vector()


def check_admissible(law, x, c, cfg=None, tol=1e-7, count=50):
    """Raise NotAdmissible unless ``c`` annihilates fresh sampled rows at ``x``."""
    cfg = cfg or SolverConfig()
    rng = np.random.default_rng([cfg.seed, 7919])
    X = sample_jet_array(np.asarray(x, dtype=float), count, rng)
    _, G = evaluate_batch(law, X)
    A = nonholonomic_rows(X, G, law.n)
    scale = max(1.0, float(np.max(np.abs(G))))
    worst = float(np.max(np.abs(A @ c.as_vector()))) if len(A) else 0.0
    if worst > tol * scale * max(1.0, np.linalg.norm(c.as_vector())):
        raise NotAdmissible(f"coefficients violate the material equation at {np.asarray(x).tolist()} "
                            f"(residual {worst:.3e})")
    return worst


class IsoResult(NamedTuple):
    is_iso: bool
    deviation: float


def probe_jets(x, probes, seed):
    return sample_jet_array(np.asarray(x, dtype=float), probes, np.random.default_rng([seed, 104729]))


def is_material_isomorphism(law, g, probes=20, seed=0, tol=1e-8):
    """Compare W(h . g) with W(h) over probe jets h sourced at the target of g."""
    if probes < 1:
        raise ValueError("probes must be at least 1")
    H = probe_jets(g.y, probes, seed)
    n = g.n
    HG = np.stack([compose(Jet.from_vector(h, n), g).as_vector() for h in H])
    dev = float(np.max(np.abs(evaluate_values(law, HG) - evaluate_values(law, H))))
    return IsoResult(dev <= tol, dev)
