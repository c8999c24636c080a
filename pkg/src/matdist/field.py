"""Grid sweeps of the pointwise solver and body classification."""

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .equations import SolverConfig, is_material_isomorphism, solve_point
from .exceptions import RankNotSaturated, SourceTargetMismatch
from .jets import TOL_MATCH
from .parallel import ordered_map

CLASSES = ("smoothly_uniform", "non_uniform", "uniform_second_grade", "mixed")


@dataclass(frozen=True, eq=False)
class BodyGrid:
    """Rectangular grid; points are enumerated with the first coordinate varying slowest."""

    lo: np.ndarray
    hi: np.ndarray
    counts: tuple

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float).ravel()
        hi = np.array(self.hi, dtype=float).ravel()
        counts = tuple(int(c) for c in np.ravel(self.counts))
        if not (lo.shape == hi.shape and len(counts) == lo.shape[0]):
            raise ValueError("lo, hi and counts must all have length n")
        if lo.shape[0] < 2:
            raise ValueError("grid dimension must be at least 2")
        if np.any(lo >= hi):
            raise ValueError("grid needs lo < hi in every coordinate")
        if min(counts) < 1:
            raise ValueError("grid counts must be positive")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "counts", counts)

    @property
    def n(self):
        return len(self.counts)

    @property
    def size(self):
        return int(np.prod(self.counts))

    @property
    def axes(self):
        return [np.linspace(a, b, c) if c > 1 else np.array([a])
                for a, b, c in zip(self.lo, self.hi, self.counts)]

    @property
    def spacing(self):
        return np.array([(b - a) / (c - 1) if c > 1 else b - a
                         for a, b, c in zip(self.lo, self.hi, self.counts)])

    @property
    def points(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def multi_index(self, flat):
        return np.unravel_index(flat, self.counts)

    def flat_index(self, multi):
        return int(np.ravel_multi_index(tuple(multi), self.counts))

    def neighbor_pairs(self):
        """All unordered pairs of grid points differing by at most one step per axis."""
        offsets = [o for o in itertools.product((-1, 0, 1), repeat=self.n) if any(o)]
        # keep one orientation of each offset
        offsets = [np.array(o) for o in offsets if o > tuple(-v for v in o)]
        idx = np.indices(self.counts).reshape(self.n, -1).T
        counts = np.array(self.counts)
        pairs = []
        for off in offsets:
            other = idx + off
            ok = np.all((other >= 0) & (other < counts), axis=1)
            a = np.ravel_multi_index(idx[ok].T, self.counts)
            b = np.ravel_multi_index(other[ok].T, self.counts)
            pairs.append(np.stack([a, b], axis=1))
        pairs = np.concatenate(pairs) if pairs else np.zeros((0, 2), int)
        return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]

    def contains(self, x, slack=1e-12):
        return bool(np.all(x >= self.lo - slack) and np.all(x <= self.hi + slack))

    def nearest_index(self, x):
        sp = np.where(self.spacing > 0, self.spacing, 1.0)
        k = np.clip(np.rint((np.asarray(x) - self.lo) / sp), 0, np.array(self.counts) - 1).astype(int)
        return self.flat_index(k)


@dataclass(frozen=True, eq=False)
class FieldReport:
    grid: BodyGrid
    samples: list
    dim_nh: np.ndarray
    dim_h: np.ndarray
    second_grade_equal: np.ndarray
    comparison: list
    classification: str
    offending_points: list = field(default_factory=list)
    unsaturated_points: list = field(default_factory=list)

    @property
    def n(self):
        return self.grid.n

    def statement(self):
        return (f"{self.classification} at all {self.grid.size} grid points"
                if self.classification != "mixed"
                else f"mixed: {len(self.offending_points)} of {self.grid.size} grid points lack full dimension")


def classify(dim_nh, dim_h, second_grade_equal, n):
    """Returns (classification, offending point indices)."""
    dim_nh = np.asarray(dim_nh)
    if np.all(np.asarray(dim_h) == n) and np.all(second_grade_equal):
        return "uniform_second_grade", []
    if np.all(dim_nh == n):
        return "smoothly_uniform", []
    if np.all(dim_nh < n):
        return "non_uniform", []
    return "mixed", [int(i) for i in np.flatnonzero(dim_nh < n)]


def analyze_grid(law, grid, cfg=None, threads=None, compare_tol=1e-6):
    cfg = cfg or SolverConfig()
    if grid.n != law.n:
        raise ValueError(f"grid dimension {grid.n} does not match law dimension {law.n}")
    pts = grid.points
    samples = ordered_map(lambda i: solve_point(law, pts[i], cfg, point_index=i, warn=False),
                          range(len(pts)), threads)
    unsat = [i for i, s in enumerate(samples) if not s.rank_saturated]
    if unsat:
        warnings.warn(RankNotSaturated(f"rank not saturated at {len(unsat)} grid point(s): {unsat[:10]}"),
                      stacklevel=2)
    comparison = [s.second_grade_relation(compare_tol) for s in samples]
    equal = np.array([c == "equal" for c in comparison])
    dim_nh = np.array([s.dim_nh for s in samples])
    dim_h = np.array([s.dim_h for s in samples])
    cls, bad = classify(dim_nh, dim_h, equal, grid.n)
    return FieldReport(grid, samples, dim_nh, dim_h, equal, comparison, cls, bad, unsat)


def symmetry_probe(law, x, candidates, cfg=None, probes=20, tol=1e-8):
    """Material-symmetry membership for each candidate jet over ``x``."""
    cfg = cfg or SolverConfig()
    x = np.asarray(x, dtype=float)
    out = []
    for g in candidates:
        if max(np.max(np.abs(g.x - x)), np.max(np.abs(g.y - x))) > TOL_MATCH:
            raise SourceTargetMismatch(f"candidate is not a loop at {x.tolist()}")
        out.append(is_material_isomorphism(law, g, probes, cfg.seed, tol).is_iso)
    return out
