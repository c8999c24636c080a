"""scikit-learn style wrappers around the pointwise solvers.

Samples are body points (rows of an (m, n) array).  The law is given by a
catalog name or law text so that estimators stay clonable.
"""

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .equations import SolverConfig, solve_point
from .exceptions import RankNotSaturated, UnknownLaw
from .field import classify
from .homogeneity import collocate
from .laws import catalog, parse_law


def resolve_law(law, n):
    try:
        return catalog(law, n)
    except UnknownLaw:
        return parse_law(law, n)


def _check_points(X, n):
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != n:
        raise ValueError(f"expected {n} columns (body coordinates), got {X.shape[1]}")
    return X


class MaterialDistribution(TransformerMixin, BaseEstimator):
    """Fibre dimensions of the base-material distributions at body points.

    ``fit`` solves at the training points and classifies them as a whole;
    ``transform`` returns ``[dim_nh, dim_h]`` per point and ``predict`` returns
    ``dim_nh == n`` (the point admits smooth local uniformity).
    """

    def __init__(self, law="uniform_frame", n=3, seed=0, rel_tol=1e-8, base_tol=1e-6):
        self.law = law
        self.n = n
        self.seed = seed
        self.rel_tol = rel_tol
        self.base_tol = base_tol

    def _solve(self, X):
        cfg = SolverConfig(seed=self.seed, rel_tol=self.rel_tol, base_tol=self.base_tol)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RankNotSaturated)
            return [solve_point(self.law_, x, cfg, point_index=i) for i, x in enumerate(X)]

    def fit(self, X, y=None):
        self.law_ = resolve_law(self.law, self.n)
        X = _check_points(X, self.n)
        self.samples_ = self._solve(X)
        self.dims_ = np.array([[s.dim_nh, s.dim_h] for s in self.samples_])
        equal = np.array([s.second_grade_relation() == "equal" for s in self.samples_])
        self.classification_, self.offending_ = classify(self.dims_[:, 0], self.dims_[:, 1], equal, self.n)
        self.n_features_in_ = self.n
        return self

    def transform(self, X):
        check_is_fitted(self, "samples_")
        X = _check_points(X, self.n)
        return np.array([[s.dim_nh, s.dim_h] for s in self._solve(X)])

    def predict(self, X):
        return self.transform(X)[:, 0] == self.n


class HomogeneousSection(BaseEstimator):
    """Polynomial homogeneous section fitted by collocation at the given points.

    ``predict`` takes rows ``[x, y]`` (2n columns) and returns the flattened
    frame block ``P(x, y)`` of the section from ``x`` to ``y``.
    """

    def __init__(self, law="uniform_frame", n=3, degree=2, seed=0, tol_hom=1e-8, jets_per_point=4):
        self.law = law
        self.n = n
        self.degree = degree
        self.seed = seed
        self.tol_hom = tol_hom
        self.jets_per_point = jets_per_point

    def fit(self, X, y=None):
        if not 1 <= self.degree <= 4:
            raise ValueError("degree must lie in 1..4")
        law = resolve_law(self.law, self.n)
        X = _check_points(X, self.n)
        sol = collocate(law, X, range(len(X)), [np.eye(self.n)] * len(X), self.degree,
                         SolverConfig(seed=self.seed), self.tol_hom, self.jets_per_point, "off", "diagonal")
        self.solution_ = sol
        self.verdict_ = sol.verdict
        self.residual_ = sol.residual
        self.n_features_in_ = self.n
        return self

    def predict(self, XY):
        check_is_fitted(self, "solution_")
        XY = check_array(XY, dtype=np.float64)
        n = self.n
        if XY.shape[1] != 2 * n:
            raise ValueError(f"expected {2 * n} columns [x, y], got {XY.shape[1]}")
        a = self.solution_.ansatz
        return np.array([a.value(r[:n], r[n:]).ravel() for r in XY])

    def score(self, X, y=None):
        """Negative relative residual of the collocation system at the fitted points."""
        check_is_fitted(self, "solution_")
        return -self.residual_
