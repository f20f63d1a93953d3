"""Entropy, drift, spectral radius and growth of random walks on groups.

The package computes and estimates the four asymptotic invariants of a
random walk on a finitely generated group and checks the inequalities that
relate them.
"""
__version__ = "0.1.0"

from .boundary import (  # noqa: E402
    HittingTable,
    RecurrentWalkError,
    cocycle_mc,
    equality_detector,
    free_product_exact,
    hitting_mc,
    solve_hitting_free_product,
    solve_hitting_tree,
)
from .bounds import BoundReport, Quantity, auxiliary_checks, theorem1_bounds, theorem1_rows, theorem2_check  # noqa: E402
from .chebyshev import SimpleWalkLaw, chebyshev_value, pointwise_bounds  # noqa: E402
from .config import ConfigError, RunConfig, load_config, parse_config  # noqa: E402
from .estimators import (  # noqa: E402
    GrowthEstimator,
    HittingProbabilityEstimator,
    MonteCarloWalkEstimator,
    WalkInvariantsEstimator,
)
from .groups import (  # noqa: E402
    CyclicGroup,
    DirectProduct,
    FreeAbelianGroup,
    FreeGroup,
    FreeProduct,
    ball_census,
    exact_growth_rate,
    group_from_config,
)
from .walk import BudgetError, Measure, asymptotic_estimates, build_measure, nstep, uniform_measure  # noqa: E402

__all__ = [
    "BoundReport", "BudgetError", "ConfigError", "CyclicGroup", "DirectProduct", "FreeAbelianGroup",
    "FreeGroup", "FreeProduct", "GrowthEstimator", "HittingProbabilityEstimator", "HittingTable", "Measure",
    "MonteCarloWalkEstimator", "Quantity", "RecurrentWalkError", "RunConfig", "SimpleWalkLaw",
    "WalkInvariantsEstimator", "asymptotic_estimates", "auxiliary_checks", "ball_census", "build_measure",
    "chebyshev_value", "cocycle_mc", "equality_detector", "exact_growth_rate", "free_product_exact",
    "group_from_config", "hitting_mc", "load_config", "nstep", "parse_config", "pointwise_bounds",
    "solve_hitting_free_product", "solve_hitting_tree", "theorem1_bounds", "theorem1_rows", "theorem2_check",
    "uniform_measure",
]
