"""Polynomial collocation for homogeneous sections.

The unknown is a matrix field ``P(x, y)`` (one polynomial per entry) giving
the section ``(x; y, P(x, y), I, dP/dx + dP/dy)`` of candidate material
isomorphisms.  Polynomials are expanded in the monomials of ``(x, u)`` with
``u = y - x``; only monomials containing at least one ``u`` factor are used
and the constant part is pinned to the identity, so ``P(x, x) = I`` and the
section is the identity jet on the diagonal.

For each collocation jet ``g`` and body direction ``v``, the equation is the
derivative of ``W`` at ``g`` along the left-invariant field induced by moving
the section's source along ``v``.  Its coefficients are the derivatives of
``P`` at the diagonal point ``(alpha(g), alpha(g))`` by default
(``point='diagonal'``), or at ``(alpha(g), beta(g))`` with
``point='source_target'``.
"""

import itertools
from dataclasses import dataclass
from dataclasses import field as dataclass_field

import numpy as np

from .equations import SolverConfig, is_material_isomorphism, sample_jet_array
from .field import analyze_grid
from .jets import Jet, TangentJet, coordinate_slices
from .laws import evaluate_batch
from .linalg import least_squares

VERDICTS = ("homogeneous", "not_homogeneous_at_degree", "inconclusive")
EXTRA_TERMS = ("off", "derived", "free")
POINTS = ("diagonal", "source_target")
CHART_NOTE = "homogeneous in the given chart up to the ansatz degree"


def monomial_exponents(n, degree, min_u=1, max_u=None):
    """Exponent vectors over (x_1..x_n, u_1..u_n) with total degree <= ``degree`` and
    u-degree in [min_u, max_u], in a fixed deterministic order."""
    out = []
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(2 * n), total):
            e = np.bincount(np.array(combo, dtype=int), minlength=2 * n) if combo else np.zeros(2 * n, int)
            ud = int(e[n:].sum())
            if ud >= min_u and (max_u is None or ud <= max_u):
                out.append(e)
    return np.array(out, dtype=int).reshape(-1, 2 * n)


def monomial_partials(exps, Z, order=()):
    """Partial derivative of every monomial w.r.t. the variables in ``order``
    (indices into (x, u)), at each row of ``Z``.  Returns (B, M)."""
    exps = np.asarray(exps)
    Z = np.atleast_2d(Z)
    coef = np.ones(len(exps))
    e = exps.copy()
    for var in order:
        coef = coef * e[:, var]
        e[:, var] = np.maximum(e[:, var] - 1, 0)
    vals = np.prod(Z[:, None, :] ** e[None, :, :], axis=2)
    return vals * coef[None, :]


@dataclass(frozen=True, eq=False)
class HomogeneityAnsatz:
    n: int
    degree: int
    exponents: np.ndarray  # (M, 2n)
    coeffs: np.ndarray  # (n, n, M)

    @classmethod
    def zero(cls, n, degree):
        exps = monomial_exponents(n, degree)
        return cls(n, degree, exps, np.zeros((n, n, len(exps))))

    def _z(self, x, y):
        x = np.asarray(x, dtype=float)
        return np.concatenate([x, np.asarray(y, dtype=float) - x])[None, :]

    def _apply(self, Z, order):
        return np.einsum("lim,m->li", self.coeffs, monomial_partials(self.exponents, Z, order)[0])

    def value(self, x, y):
        return np.eye(self.n) + self._apply(self._z(x, y), ())

    def d_x(self, x, y):
        """dP/dx^k at fixed y, shape (n, n, n) indexed (l, i, k)."""
        Z, n = self._z(x, y), self.n
        return np.stack([self._apply(Z, (k,)) - self._apply(Z, (n + k,)) for k in range(n)], axis=2)

    def d_y(self, x, y):
        Z, n = self._z(x, y), self.n
        return np.stack([self._apply(Z, (n + k,)) for k in range(n)], axis=2)

    def d_xx_plus_xy(self, x, y):
        """d2P/dx^k dx^m + d2P/dx^k dy^m, shape (n, n, n, n) indexed (l, i, k, m)."""
        Z, n = self._z(x, y), self.n
        out = np.empty((n, n, n, n))
        for k in range(n):
            for m in range(n):
                out[:, :, k, m] = self._apply(Z, (k, m)) - self._apply(Z, (n + k, m))
        return out


def homogeneous_section_at(ansatz, x, y):
    """The section jet from ``x`` to ``y``; raises SingularJet if P(x, y) is singular."""
    P = ansatz.value(x, y)
    C = ansatz.d_x(x, y) + ansatz.d_y(x, y)
    return Jet(x, y, P, np.eye(ansatz.n), C)


def induced_field(ansatz, x, y, k):
    """Derivative of the section at (x, y) when its source moves along e_k."""
    n = ansatz.n
    g = homogeneous_section_at(ansatz, x, y)
    return TangentJet(g, np.eye(n)[k], np.zeros(n), ansatz.d_x(x, y)[:, :, k], np.zeros((n, n)),
                      ansatz.d_xx_plus_xy(x, y)[:, :, k, :])


def _factors(exps, X, n, point):
    """First factor (D_xk - D_uk) mu and second factor (D_xk - D_uk) D_xm mu for each
    jet row of X.  Returns (B, n, M) and (B, n, n, M)."""
    s = coordinate_slices(n)
    x = X[:, s["x"]]
    u = np.zeros_like(x) if point == "diagonal" else X[:, s["y"]] - x
    Z = np.concatenate([x, u], axis=1)
    B, M = len(X), len(exps)
    first = np.empty((B, n, M))
    second = np.empty((B, n, n, M))
    for k in range(n):
        first[:, k] = monomial_partials(exps, Z, (k,)) - monomial_partials(exps, Z, (n + k,))
        for m in range(n):
            second[:, k, m] = monomial_partials(exps, Z, (k, m)) - monomial_partials(exps, Z, (n + k, m))
    return first, second


def _rows(law, X, V, exps, extra_term, point, free_exps=None):
    """Rows for jets X (B, N) and directions V (B, K, n).  Returns rows (B, K, d, U)
    and constants (B, K, d)."""
    n = law.n
    _, G = evaluate_batch(law, X)
    s = coordinate_slices(n)
    B, d = G.shape[:2]
    yA = X[:, s["yA"]].reshape(B, n, n)
    yC = X[:, s["yC"]].reshape(B, n, n, n)
    Wx = G[..., s["x"]]
    WA = G[..., s["yA"]].reshape(B, d, n, n)
    WC = G[..., s["yC"]].reshape(B, d, n, n, n)
    G1 = np.einsum("bjl,baji->bali", yA, WA)
    G2 = np.einsum("bjl,bajim->balim", yA, WC)
    G3 = np.einsum("bjlm,bajim->bali", yC, WC)
    if extra_term == "derived":
        G1 = G1 + G3
    first, second = _factors(exps, X, n, point)
    dV = np.einsum("bKk,bkM->bKM", V, first)
    HV = np.einsum("bKk,bkmM->bKmM", V, second)
    K = V.shape[1]
    rows = (np.einsum("bali,bKM->bKaliM", G1, dV)
            + np.einsum("balim,bKmM->bKaliM", G2, HV)).reshape(B, K, d, -1)
    if extra_term == "free":
        s_x = np.prod(X[:, None, :n] ** free_exps[None, :, :n], axis=2)  # (B, F)
        extra = np.einsum("bali,bF->baliF", G3, s_x).reshape(B, 1, d, -1)
        rows = np.concatenate([rows, np.broadcast_to(extra, (B, K) + extra.shape[2:])], axis=3)
    const = np.einsum("bak,bKk->bKa", Wx, V)
    return rows, const


def _check_options(extra_term, point):
    if extra_term not in EXTRA_TERMS:
        raise ValueError(f"extra_term must be one of {EXTRA_TERMS}")
    if point not in POINTS:
        raise ValueError(f"point must be one of {POINTS}")


def _solving_exponents(n, degree, point):
    # at the diagonal only monomials linear in u reach the equation; the rest would
    # be zero columns and get zero coefficients from the minimum-norm solve anyway
    return monomial_exponents(n, degree, 1, 1 if point == "diagonal" else None)


def _free_exponents(n, degree):
    return monomial_exponents(n, degree, 0, 0)


def homogeneity_residual_rows(law, g, ansatz, k, extra_term="off", point="diagonal"):
    """Row over the ansatz coefficients (layout (l, i, monomial)) and constant term
    of the equation along body direction ``k`` at jet ``g``; the residual is
    ``row @ coeffs + constant`` for each law component."""
    _check_options(extra_term, point)
    if ansatz.degree < 1:
        raise ValueError("ansatz degree must be at least 1")
    V = np.eye(law.n)[k][None, None, :]
    free = _free_exponents(law.n, ansatz.degree) if extra_term == "free" else None
    rows, const = _rows(law, g.as_vector()[None, :], V, ansatz.exponents, extra_term, point, free)
    return rows[0, 0], const[0, 0]


@dataclass(frozen=True, eq=False)
class HomogeneitySolution:
    ansatz: HomogeneityAnsatz
    residual: float
    per_k: np.ndarray
    verdict: str
    relative: bool
    row_count: int
    extra_coeffs: np.ndarray | None = None
    probe_deviation: float | None = None
    probe_ok: bool | None = None
    points: np.ndarray = dataclass_field(default=None)

    @property
    def statement(self):
        if self.verdict == "homogeneous":
            return f"{CHART_NOTE} (degree {self.ansatz.degree})"
        return f"{self.verdict} (degree {self.ansatz.degree}, given chart)"


def verdict_for(residual, tol_hom):
    if residual <= tol_hom:
        return "homogeneous"
    if residual > 100 * tol_hom:
        return "not_homogeneous_at_degree"
    return "inconclusive"


def _rms(v):
    return float(np.sqrt(np.mean(v ** 2))) if v.size else 0.0


def _relative(res, const, ref, tol):
    """RMS residual relative to the RMS constant term.  A constant term already
    below ``tol`` times the typical row norm ``ref`` is roundoff from numerically
    computed directions, so the row norm is used as the scale instead."""
    scale = _rms(const)
    if scale > tol * ref:
        return _rms(res) / scale, True
    if ref > 0:
        return _rms(res) / ref, True
    return _rms(res), False


def collocate(law, pts, idx, dirs, degree, cfg, tol_hom, jets_per_point, extra_term, point):
    n = law.n
    exps = _solving_exponents(n, degree, point)
    free = _free_exponents(n, degree) if extra_term == "free" else None
    row_blocks, const_blocks = [], []
    kmax = max((V.shape[1] for V in dirs), default=0)
    for x, i, V in zip(pts, idx, dirs):
        if V.shape[1] == 0:
            continue
        rng = np.random.default_rng([cfg.seed, int(i), 5003])
        X = sample_jet_array(x, jets_per_point, rng)
        Vb = np.broadcast_to(V.T, (jets_per_point,) + V.T.shape)
        rows, const = _rows(law, X, Vb, exps, extra_term, point, free)
        # pad the direction axis so per-direction residuals line up across points
        K = V.shape[1]
        pad_r = np.full((jets_per_point, kmax) + rows.shape[2:], np.nan)
        pad_c = np.full((jets_per_point, kmax, law.d), np.nan)
        pad_r[:, :K], pad_c[:, :K] = rows, const
        row_blocks.append(pad_r)
        const_blocks.append(pad_c)

    full = HomogeneityAnsatz.zero(n, degree)
    if not row_blocks:
        return HomogeneitySolution(full, 0.0, np.zeros(kmax), "homogeneous", False, 0, points=pts)
    R = np.concatenate(row_blocks)  # (B, K, d, U)
    C = np.concatenate(const_blocks)  # (B, K, d)
    live = ~np.isnan(C)
    A = R[live]
    b = C[live]
    sol, _ = least_squares(A, b)
    res_all = np.full(C.shape, np.nan)
    res_all[live] = A @ sol + b
    ref = _rms(np.linalg.norm(A, axis=1))
    per_k = np.array([_relative(res_all[:, k][live[:, k]], C[:, k][live[:, k]], ref, tol_hom)[0]
                      for k in range(kmax)])
    residual, relative = _relative(res_all[live], b, ref, tol_hom)

    nP = n * n * len(exps)
    coeffs = np.zeros((n, n, len(full.exponents)))
    # scatter the solved columns into the full monomial list
    lookup = {tuple(e): j for j, e in enumerate(full.exponents)}
    cols = [lookup[tuple(e)] for e in exps]
    coeffs[:, :, cols] = sol[:nP].reshape(n, n, len(exps))
    ansatz = HomogeneityAnsatz(n, degree, full.exponents, coeffs)
    extra = sol[nP:].reshape(n, n, -1) if extra_term == "free" else None
    return HomogeneitySolution(ansatz, residual, per_k, verdict_for(residual, tol_hom), relative,
                               int(live.sum()), extra, points=pts)


def _check_degree(degree):
    if not 1 <= degree <= 4:
        raise ValueError("degree must lie in 1..4")


def solve_homogeneity(law, grid, degree=2, cfg=None, tol_hom=1e-8, jets_per_point=4,
                      extra_term="off", point="diagonal", directions="coordinates",
                      report=None, threads=None):
    """Collocate the homogeneity equation over the whole grid.

    ``directions='coordinates'`` uses k = 1..n; ``'distribution'`` uses an
    orthonormal basis of the base-material fibre at each point instead.
    """
    _check_degree(degree)
    _check_options(extra_term, point)
    cfg = cfg or SolverConfig()
    pts = grid.points
    if directions == "coordinates":
        dirs = [np.eye(law.n)] * len(pts)
    elif directions == "distribution":
        report = report or analyze_grid(law, grid, cfg, threads)
        dirs = [s.base_nh.basis for s in report.samples]
    else:
        raise ValueError("directions must be 'coordinates' or 'distribution'")
    return collocate(law, pts, range(len(pts)), dirs, degree, cfg, tol_hom, jets_per_point,
                      extra_term, point)


def section_probe(law, ansatz, pts, pairs=10, probes=20, seed=0):
    """Worst material-isomorphism deviation of sections between random point pairs."""
    if len(pts) < 2:
        return 0.0
    rng = np.random.default_rng([seed, 31337])
    worst = 0.0
    for _ in range(pairs):
        a, b = rng.choice(len(pts), size=2, replace=False)
        g = homogeneous_section_at(ansatz, pts[a], pts[b])
        worst = max(worst, is_material_isomorphism(law, g, probes, seed, np.inf).deviation)
    return worst


def leafwise_homogeneity(law, labeling, degree=2, cfg=None, tol_hom=1e-8, jets_per_point=4,
                         extra_term="off", point="diagonal", report=None, threads=None, pairs=10):
    """Solve on each leaf separately, differentiating only along the leaf's fibre."""
    _check_degree(degree)
    cfg = cfg or SolverConfig()
    if report is None:
        report = analyze_grid(law, labeling.grid, cfg, threads)
    pts = labeling.grid.points
    out = {}
    for leaf in range(labeling.count):
        idx = labeling.members(leaf)
        if labeling.which == "nh":
            dirs = [report.samples[i].base_nh.basis for i in idx]
        else:
            dirs = [report.samples[i].base_h.basis for i in idx]
        sol = collocate(law, pts[idx], idx, dirs, degree, cfg, tol_hom, jets_per_point,
                         extra_term, point)
        dev = section_probe(law, sol.ansatz, pts[idx], pairs, seed=cfg.seed)
        out[leaf] = HomogeneitySolution(sol.ansatz, sol.residual, sol.per_k, sol.verdict, sol.relative,
                                        sol.row_count, sol.extra_coeffs, dev, dev <= 100 * tol_hom, pts[idx])
    return out


def implies_smooth_uniformity(solution, report):
    """True unless the body is homogeneous while failing smooth uniformity."""
    if solution.verdict != "homogeneous":
        return True
    return report.classification in ("smoothly_uniform", "uniform_second_grade")
