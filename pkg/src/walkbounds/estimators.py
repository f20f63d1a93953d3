"""Estimator classes with the scikit-learn parameter interface.

Each estimator is fitted on a group or a measure (or the equivalent config
dict) and exposes its results as trailing-underscore attributes.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_group, check_measure, check_nonnegative, check_positive_int, check_seed
from .boundary import exact_applicable, hitting_table_mc, solve_hitting_free_product
from .groups import ball_census, exact_growth_rate, growth_estimate
from .sampling import sample_paths
from .walk import DEFAULT_MAX_SUPPORT, asymptotic_estimates


class GrowthEstimator(BaseEstimator):
    """Volume growth from a ball census.

    Parameters
    ----------
    radius : int
        Census depth.
    max_elements : int
        Ball-size budget; the census is truncated beyond it.

    Attributes
    ----------
    census_ : BallCensus
    v_cesaro_, v_ratio_ : float
    subexponential_ : bool
    v_exact_ : float or None
        Closed-form growth rate when the group admits one.
    """

    def __init__(self, radius: int = 10, max_elements: int = 20_000_000):
        self.radius = radius
        self.max_elements = max_elements

    def fit(self, X, y=None):
        group = check_group(X)
        radius = check_positive_int("radius", self.radius, 2)
        self.census_ = ball_census(group, radius, check_positive_int("max_elements", self.max_elements))
        est = growth_estimate(self.census_)
        self.v_cesaro_ = est.v_cesaro
        self.v_ratio_ = est.v_ratio
        self.subexponential_ = est.subexponential
        self.v_exact_ = exact_growth_rate(group)
        return self

    def predict(self, radii):
        """Ball sizes ``#B(e, r)`` for radii within the census."""
        check_is_fitted(self, "census_")
        radii = np.asarray(radii, dtype=int)
        if np.any(radii < 0) or np.any(radii > self.census_.radius):
            raise ValueError(f"radii must lie in [0, {self.census_.radius}]")
        return np.asarray(self.census_.ball_sizes)[radii]


class WalkInvariantsEstimator(BaseEstimator):
    """Entropy, drift and spectral radius from exact convolution powers.

    Parameters
    ----------
    n_max : int
        Deepest convolution power.
    prune_eps : float
        Entries below this are dropped (0 keeps the laws exact).
    max_support : int
        Support budget per law.

    Attributes
    ----------
    series_ : WalkSeries
    h_, ell_, rho_ : Estimate
    """

    def __init__(self, n_max: int = 12, prune_eps: float = 0.0, max_support: int = DEFAULT_MAX_SUPPORT):
        self.n_max = n_max
        self.prune_eps = prune_eps
        self.max_support = max_support

    def fit(self, X, y=None):
        measure = check_measure(X)
        n_max = check_positive_int("n_max", self.n_max, 3)
        eps = check_nonnegative("prune_eps", self.prune_eps)
        self.series_ = asymptotic_estimates(measure, n_max, eps, check_positive_int("max_support", self.max_support))
        self.h_ = self.series_.h_est
        self.ell_ = self.series_.ell_est
        self.rho_ = self.series_.rho_est
        return self

    def transform(self, X=None):
        """``[[h, ell, rho]]`` point estimates."""
        check_is_fitted(self, "series_")
        return np.array([[self.h_.value, self.ell_.value, self.rho_.value]])

    def predict(self, steps):
        """Rows ``(H(n), L(n), mu^{*n}(e))`` for the requested steps."""
        check_is_fitted(self, "series_")
        steps = np.asarray(steps, dtype=int)
        if np.any(steps < 0) or np.any(steps > self.series_.n_max):
            raise ValueError(f"steps must lie in [0, {self.series_.n_max}]")
        s = self.series_
        return np.column_stack([s.H[steps], s.L[steps], s.return_prob[steps]])


class MonteCarloWalkEstimator(BaseEstimator):
    """Drift and entropy by simulating independent walks.

    Parameters
    ----------
    n_steps, n_paths : int
    seed : int
    k0 : int
        Steps at which ``-log mu^{*k}(X_k) / k`` is averaged against the exact law.

    Attributes
    ----------
    result_ : MCResult
    ell_, ell_se_ : float
    """

    def __init__(self, n_steps: int = 1000, n_paths: int = 1000, seed: int = 0, k0: int = 0):
        self.n_steps = n_steps
        self.n_paths = n_paths
        self.seed = seed
        self.k0 = k0

    def fit(self, X, y=None):
        measure = check_measure(X)
        self.result_ = sample_paths(
            measure,
            check_positive_int("n_steps", self.n_steps),
            check_positive_int("n_paths", self.n_paths),
            check_seed(self.seed),
            k0=check_positive_int("k0", self.k0, 0),
        )
        self.ell_ = self.result_.ell
        self.ell_se_ = self.result_.ell_se
        return self

    def transform(self, X=None):
        check_is_fitted(self, "result_")
        return np.array([[self.ell_, self.ell_se_]])


class HittingProbabilityEstimator(BaseEstimator):
    """First-passage probabilities ``q(x)``.

    Parameters
    ----------
    method : {"auto", "exact", "monte-carlo"}
        ``auto`` solves exactly when the measure is carried by single
        syllables of a non-amenable free product, else simulates.
    targets : sequence, optional
        Elements to simulate (``monte-carlo`` only); defaults to the generators.
    samples, horizon, seed : int
        Monte Carlo budget.

    Attributes
    ----------
    table_ : HittingTable
    method_ : str
    """

    def __init__(self, method: str = "auto", targets=None, samples: int = 100_000, horizon: int = 2000,
                 seed: int = 0):
        self.method = method
        self.targets = targets
        self.samples = samples
        self.horizon = horizon
        self.seed = seed

    def fit(self, X, y=None):
        measure = check_measure(X)
        if self.method not in ("auto", "exact", "monte-carlo"):
            raise ValueError(f"unknown method {self.method!r}")
        use_exact = self.method == "exact" or (self.method == "auto" and exact_applicable(measure))
        if use_exact:
            self.table_ = solve_hitting_free_product(measure)
        else:
            targets = self.targets if self.targets is not None else measure.group.generators
            self.table_, self.diagnostics_ = hitting_table_mc(
                measure, targets, check_positive_int("samples", self.samples),
                check_positive_int("horizon", self.horizon), check_seed(self.seed))
        self.method_ = self.table_.method
        return self

    def predict(self, targets):
        """``q`` for each target."""
        check_is_fitted(self, "table_")
        return np.array([self.table_.q(t) for t in targets])
