"""Elements of the second-order non-holonomic groupoid in local coordinates.

A jet is stored as ``(x; y, yA, yB, yC)`` where ``x`` is the source point,
``y`` the target point, ``yA[j, i] = y^j_i`` the frame block, ``yB[j, i] = y^j_{,i}``
the base block and ``yC[j, i, k] = y^j_{i,k}`` the second-order block.  All
index orders are (upper, lower, derivative); arrays are 0-based.

Concretely, the jet is the first-order data at ``x`` of the equivariant bundle
map ``x' -> (y + yB (x' - x), yA + yC . (x' - x))``: a base map together with a
frame field.  Composition is composition of such maps.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import SingularJet, SourceTargetMismatch

TOL_MATCH = 1e-9
SINGULAR_RTOL = 1e-12


def _frozen(a, shape, name):
    arr = np.array(a, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


def _check_invertible(*blocks):
    sv = np.linalg.svd(np.array(blocks), compute_uv=False)
    if (sv[:, -1] < SINGULAR_RTOL * sv[:, 0]).any() or (sv[:, 0] == 0).any():
        raise SingularJet("matrix block is numerically singular")


def coordinate_count(n):
    """Number of scalar coordinates of a jet: x, y, yA, yB, yC."""
    return 2 * n + 2 * n * n + n ** 3


def coordinate_slices(n):
    """Slices of the flat coordinate vector, keyed by block name."""
    edges = np.cumsum([0, n, n, n * n, n * n, n ** 3])
    names = ("x", "y", "yA", "yB", "yC")
    return {k: slice(int(a), int(b)) for k, a, b in zip(names, edges[:-1], edges[1:])}


@dataclass(frozen=True, eq=False)
class Jet:
    x: np.ndarray
    y: np.ndarray
    yA: np.ndarray
    yB: np.ndarray
    yC: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        n = x.shape[0] if x.ndim == 1 else 0
        if n < 2:
            raise ValueError("jets need a body dimension n >= 2")
        shapes = {"x": (n,), "y": (n,), "yA": (n, n), "yB": (n, n), "yC": (n, n, n)}
        for name, shape in shapes.items():
            object.__setattr__(self, name, _frozen(getattr(self, name), shape, name))
        _check_invertible(self.yA, self.yB)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def source(self):
        return self.x

    @property
    def target(self):
        return self.y

    def as_vector(self):
        return np.concatenate([self.x, self.y, self.yA.ravel(), self.yB.ravel(), self.yC.ravel()])

    @classmethod
    def from_vector(cls, vec, n):
        s = coordinate_slices(n)
        vec = np.asarray(vec, dtype=float)
        return cls(vec[s["x"]], vec[s["y"]], vec[s["yA"]].reshape(n, n),
                   vec[s["yB"]].reshape(n, n), vec[s["yC"]].reshape(n, n, n))

    def allclose(self, other, rtol=1e-12, atol=1e-12):
        return np.allclose(self.as_vector(), other.as_vector(), rtol=rtol, atol=atol)

    def __repr__(self):
        return f"Jet(x={self.x.tolist()}, y={self.y.tolist()}, n={self.n})"


@dataclass(frozen=True, eq=False)
class TangentJet:
    """A tangent vector at ``base`` in the coordinate basis of the jet coordinates."""

    base: Jet
    dx: np.ndarray
    dy: np.ndarray
    dyA: np.ndarray
    dyB: np.ndarray
    dyC: np.ndarray

    def __post_init__(self):
        n = self.base.n
        object.__setattr__(self, "dx", _frozen(self.dx, (n,), "dx"))
        object.__setattr__(self, "dy", _frozen(self.dy, (n,), "dy"))
        object.__setattr__(self, "dyA", _frozen(self.dyA, (n, n), "dyA"))
        object.__setattr__(self, "dyB", _frozen(self.dyB, (n, n), "dyB"))
        object.__setattr__(self, "dyC", _frozen(self.dyC, (n, n, n), "dyC"))

    @property
    def n(self):
        return self.base.n

    def as_vector(self):
        return np.concatenate([self.dx, self.dy, self.dyA.ravel(), self.dyB.ravel(), self.dyC.ravel()])

    @classmethod
    def from_vector(cls, base, vec):
        n = base.n
        s = coordinate_slices(n)
        vec = np.asarray(vec, dtype=float)
        return cls(base, vec[s["x"]], vec[s["y"]], vec[s["yA"]].reshape(n, n),
                   vec[s["yB"]].reshape(n, n), vec[s["yC"]].reshape(n, n, n))

    @classmethod
    def zero(cls, base):
        return cls.from_vector(base, np.zeros(coordinate_count(base.n)))


def identity_jet(x):
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    return Jet(x, x, np.eye(n), np.eye(n), np.zeros((n, n, n)))


def _require_composable(g, f):
    if g.n != f.n:
        raise SourceTargetMismatch(f"dimension mismatch: {g.n} vs {f.n}")
    gap = np.max(np.abs(g.x - f.y))
    if gap > TOL_MATCH:
        raise SourceTargetMismatch(f"source of left factor differs from target of right factor by {gap:.3e}")


def _bilinear(C, P, Q):
    """``C^j_{r,m} P^r_i Q^m_k`` as a (j, i, k) array."""
    return P.T @ C @ Q


def compose(g, f):
    """Groupoid product ``g . f`` (apply ``f`` first, then ``g``)."""
    _require_composable(g, f)
    C = _bilinear(g.yC, f.yA, f.yB) + np.tensordot(g.yA, f.yC, 1)
    return Jet(f.x, g.y, g.yA @ f.yA, g.yB @ f.yB, C)


def inverse(g):
    _check_invertible(g.yA, g.yB)
    Ai = np.linalg.inv(g.yA)
    Bi = np.linalg.inv(g.yB)
    # from 0 = g_C (h_A, h_B) + g_A h_C
    C = -np.tensordot(Ai, _bilinear(g.yC, Ai, Bi), 1)
    return Jet(g.y, g.x, Ai, Bi, C)


def left_translate_tangent(g, v):
    """Push ``v`` forward along ``h -> g . h``.

    The left translation lives on the beta-fibre of ``alpha(g)``, whose tangent
    vectors have ``dy = 0``; any ``dy`` component of ``v`` is dropped and the
    result has ``dy = 0``.
    """
    h = v.base
    _require_composable(g, h)
    dyC = (_bilinear(g.yC, v.dyA, h.yB) + _bilinear(g.yC, h.yA, v.dyB)
           + np.tensordot(g.yA, v.dyC, 1))
    return TangentJet(compose(g, h), v.dx.copy(), np.zeros(h.n), g.yA @ v.dyA, g.yB @ v.dyB, dyC)


def project_to_1jets(g, mode="frame"):
    """Project to the 1-jet groupoid: ``(x, y, yA)`` for ``frame``, ``(x, y, yB)`` for ``base``."""
    if mode == "frame":
        return g.x, g.y, g.yA
    if mode == "base":
        return g.x, g.y, g.yB
    raise ValueError(f"mode must be 'frame' or 'base', got {mode!r}")


def is_holonomic(g, tol=1e-10):
    if tol <= 0:
        raise ValueError("tol must be positive")
    return bool(np.max(np.abs(g.yA - g.yB)) <= tol
                and np.max(np.abs(g.yC - g.yC.transpose(0, 2, 1))) <= tol)


def random_blocks(rng, n, count, scale=0.3, min_sv=0.1):
    """``count`` matrices ``I + scale * R`` with R uniform in [-1, 1], resampled until
    the smallest singular value is at least ``min_sv``."""
    out = np.empty((count, n, n))
    filled = 0
    while filled < count:
        M = np.eye(n) + scale * rng.uniform(-1.0, 1.0, size=(count - filled, n, n))
        ok = np.linalg.svd(M, compute_uv=False)[:, -1] >= min_sv
        M = M[ok]
        out[filled:filled + len(M)] = M
        filled += len(M)
    return out


def random_jet(rng, n=3, x=None, y=None):
    """A generic jet with the sampling law used throughout: targets within a unit box
    of the source, frame and base blocks near the identity, ``yC`` uniform in [-1, 1]."""
    x = rng.uniform(-1.0, 1.0, size=n) if x is None else np.asarray(x, dtype=float)
    if y is None:
        y = x + rng.uniform(-1.0, 1.0, size=n)
    A, B = random_blocks(rng, n, 2)
    return Jet(x, y, A, B, rng.uniform(-1.0, 1.0, size=(n, n, n)))


def random_holonomic_jet(rng, n=3, x=None, y=None):
    """Prolongation jet of a quadratic diffeomorphism: ``yA = yB`` and ``yC`` symmetric."""
    g = random_jet(rng, n, x, y)
    C = 0.5 * (g.yC + g.yC.transpose(0, 2, 1))
    return Jet(g.x, g.y, g.yB, g.yB, C)
