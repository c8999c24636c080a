"""Leaves of the base distributions on a grid, and flows of admissible fields."""

import warnings
from dataclasses import dataclass
from dataclasses import field as dataclass_field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .equations import (CoefficientVector, SolverConfig, admissible_field_at, check_admissible,
                        is_material_isomorphism, solve_point)
from .exceptions import FlowLeftGrid, SingularPointsPresent
from .field import analyze_grid
from .jets import Jet, identity_jet


def displacement_angle(d, Q):
    """Angle between ``d`` and the column span of orthonormal ``Q``."""
    if Q.shape[1] == 0:
        return np.pi / 2
    inside = Q @ (Q.T @ d)
    return float(np.arctan2(np.linalg.norm(d - inside), np.linalg.norm(inside)))


@dataclass(frozen=True, eq=False)
class LeafLabeling:
    grid: object
    which: str
    label: np.ndarray  # -1 marks singular points
    leaf_dims: list
    fibre_dims: np.ndarray
    singular_points: list
    curves: dict = dataclass_field(default_factory=dict)

    @property
    def count(self):
        return len(self.leaf_dims)

    def members(self, leaf):
        return np.flatnonzero(self.label == leaf)


def _fibres(report, which):
    if which == "nh":
        return [s.base_nh.basis for s in report.samples]
    if which == "h":
        return [s.base_h.basis for s in report.samples]
    raise ValueError(f"which must be 'nh' or 'h', got {which!r}")


def _aligned(Q, ref):
    v = Q @ (Q.T @ ref)
    norm = np.linalg.norm(v)
    return v / norm if norm > 1e-12 else None


def trace_curve(grid, fibres, start, direction, h_int, max_steps=None):
    """RK4 streamline through ``start`` along the fibre field, both ways, until it
    leaves the grid box.  The fibre at a point is read at the nearest grid node and
    each stage direction is the projection of the previous one, keeping the
    orientation continuous."""
    if max_steps is None:
        max_steps = int(np.ceil(np.linalg.norm(grid.hi - grid.lo) / h_int)) + 2

    def f(x, ref):
        return _aligned(fibres[grid.nearest_index(x)], ref)

    halves = []
    for sign in (1.0, -1.0):
        x = np.array(start, dtype=float)
        ref = sign * direction
        path = []
        for _ in range(max_steps):
            k1 = f(x, ref)
            if k1 is None:
                break
            k2 = f(x + 0.5 * h_int * k1, k1)
            k3 = f(x + 0.5 * h_int * k2, k2) if k2 is not None else None
            k4 = f(x + h_int * k3, k3) if k3 is not None else None
            if k4 is None:
                break
            nxt = x + h_int / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not grid.contains(nxt):
                break
            path.append(nxt)
            ref = k4
            x = nxt
        halves.append(path)
    back = halves[1][::-1]
    return np.array(back + [np.array(start, dtype=float)] + halves[0])


def foliate(law, grid, which="nh", cfg=None, tol_angle=1e-3, report=None, threads=None,
            h_int=None, curves=True):
    cfg = cfg or SolverConfig()
    if report is None:
        report = analyze_grid(law, grid, cfg, threads)
    fibres = _fibres(report, which)
    dims = np.array([Q.shape[1] for Q in fibres])
    pts = grid.points
    pairs = grid.neighbor_pairs()

    # both ends of a dimension jump are quarantined: on a grid we cannot tell which
    # side carries the genuine dimension of the smooth distribution
    singular = np.zeros(len(pts), bool)
    jump = dims[pairs[:, 0]] != dims[pairs[:, 1]]
    singular[pairs[jump].ravel()] = True

    keep = []
    for a, b in pairs[~jump]:
        if singular[a] or singular[b] or dims[a] == 0:
            continue
        d = pts[b] - pts[a]
        if displacement_angle(d, fibres[a]) < tol_angle and displacement_angle(d, fibres[b]) < tol_angle:
            keep.append((a, b))
    keep = np.array(keep, dtype=int).reshape(-1, 2)
    graph = coo_matrix((np.ones(len(keep)), (keep[:, 0], keep[:, 1])), shape=(len(pts), len(pts)))
    _, comp = connected_components(graph, directed=False)

    # renumber components by first member so labels follow grid order
    label = np.full(len(pts), -1)
    remap = {}
    for i in range(len(pts)):
        if singular[i]:
            continue
        label[i] = remap.setdefault(comp[i], len(remap))
    leaf_dims = [0] * len(remap)
    for i in range(len(pts)):
        if label[i] >= 0:
            leaf_dims[label[i]] = int(dims[i])

    sing = [int(i) for i in np.flatnonzero(singular)]
    if sing:
        warnings.warn(SingularPointsPresent(
            f"{len(sing)} grid point(s) next to a fibre dimension jump: {sing[:10]}", sing), stacklevel=2)

    traced = {}
    if curves:
        h = h_int if h_int is not None else 0.5 * float(np.min(grid.spacing))
        for leaf in range(len(leaf_dims)):
            start = int(np.flatnonzero(label == leaf)[0])
            Q = fibres[start]
            traced[leaf] = [trace_curve(grid, fibres, pts[start], Q[:, j], h) for j in range(Q.shape[1])]
            if not traced[leaf]:
                traced[leaf] = [pts[start][None, :].copy()]
    return LeafLabeling(grid, which, label, leaf_dims, dims, sing, traced)


def _reprojected(law, c_vec, cfg, cache):
    def coeffs(x):
        key = tuple(np.round(x, 12))
        if key not in cache:
            cache[key] = solve_point(law, x, cfg, warn=False).null_nh.basis
        N = cache[key]
        return N @ (N.T @ c_vec)
    return coeffs


def flow_containment_check(law, c, x, t_max=0.5, steps=50, cfg=None, grid=None,
                           field="reproject", require_admissible=True, probes=20):
    """Integrate the admissible field from the identity at ``x`` by RK4 and return
    the worst material-isomorphism deviation along the flow.

    ``field='reproject'`` re-projects ``c`` onto the solution space at the current
    source point at every stage; ``'constant'`` keeps ``c`` fixed.
    """
    cfg = cfg or SolverConfig()
    x = np.asarray(x, dtype=float)
    n = law.n
    if require_admissible:
        check_admissible(law, x, c, cfg)
    if field not in ("constant", "reproject"):
        raise ValueError("field must be 'constant' or 'reproject'")
    c_vec = c.as_vector()
    coeffs = _reprojected(law, c_vec, cfg, {}) if field == "reproject" else (lambda _x: c_vec)

    def rhs(state):
        g = Jet.from_vector(state, n)
        cv = CoefficientVector.from_vector(coeffs(g.x), n)
        return admissible_field_at(cv, g).as_vector()

    state = identity_jet(x).as_vector()
    dt = t_max / steps
    worst = 0.0
    for _ in range(steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * dt * k1)
        k3 = rhs(state + 0.5 * dt * k2)
        k4 = rhs(state + dt * k3)
        state = state + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        g = Jet.from_vector(state, n)
        if grid is not None and not grid.contains(g.x):
            raise FlowLeftGrid(f"flow source {g.x.tolist()} left the grid box")
        worst = max(worst, is_material_isomorphism(law, g, probes, cfg.seed, np.inf).deviation)
    return worst
