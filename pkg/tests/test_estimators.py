import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from walkbounds.estimators import (
    GrowthEstimator,
    HittingProbabilityEstimator,
    MonteCarloWalkEstimator,
    WalkInvariantsEstimator,
)

F2_DOC = {"group": {"type": "free", "rank": 2, "labels": ["a", "b"]}, "measure": {"uniform": True}}


def test_growth_estimator(f2):
    est = GrowthEstimator(radius=6).fit(f2)
    assert est.v_exact_ == pytest.approx(math.log(3))
    np.testing.assert_array_equal(est.predict([0, 1, 2]), [1, 5, 17])
    with pytest.raises(ValueError):
        est.predict([7])


def test_growth_estimator_from_config_dict():
    est = GrowthEstimator(radius=4).fit(F2_DOC["group"])
    assert est.census_.sphere_sizes == [1, 4, 12, 36, 108]


def test_invariants_estimator():
    est = WalkInvariantsEstimator(n_max=8).fit(F2_DOC)
    h, ell, rho = est.transform()[0]
    assert ell == pytest.approx(0.5, abs=1e-3)
    rows = est.predict([0, 2])
    assert rows[1, 2] == pytest.approx(0.25)


def test_params_and_clone():
    est = WalkInvariantsEstimator(n_max=5, prune_eps=1e-12)
    assert est.get_params() == {"n_max": 5, "prune_eps": 1e-12, "max_support": est.max_support}
    c = clone(est).set_params(n_max=7)
    assert c.n_max == 7 and est.n_max == 5


def test_not_fitted():
    with pytest.raises(NotFittedError):
        WalkInvariantsEstimator().transform()


@pytest.mark.parametrize("bad", [{"n_max": 1}, {"prune_eps": -1.0}, {"n_max": 2.5}])
def test_invalid_params(bad, f2_simple):
    with pytest.raises(ValueError):
        WalkInvariantsEstimator(**bad).fit(f2_simple)


def test_monte_carlo_estimator(f2_simple):
    est = MonteCarloWalkEstimator(n_steps=400, n_paths=400, seed=1).fit(f2_simple)
    assert abs(est.ell_ - 0.5) <= 3 * est.ell_se_ + 5e-3
    with pytest.raises(ValueError):
        MonteCarloWalkEstimator(seed=None).fit(f2_simple)


def test_hitting_estimator(f2_simple, modular_uniform):
    exact = HittingProbabilityEstimator().fit(f2_simple)
    assert exact.method_ == "tree-exact"
    assert exact.predict(["a", "a b"]) == pytest.approx([1 / 3, 1 / 9])
    fp = HittingProbabilityEstimator(method="exact").fit(modular_uniform)
    assert fp.predict(["a"])[0] == pytest.approx(2 / 3)
    mc = HittingProbabilityEstimator(method="monte-carlo", samples=5000, horizon=500, seed=2).fit(f2_simple)
    assert mc.method_ == "monte-carlo"
    assert abs(mc.predict(["a"])[0] - 1 / 3) <= 3 * mc.table_.error("a")


def test_bad_inputs():
    with pytest.raises(TypeError):
        WalkInvariantsEstimator().fit(42)
    with pytest.raises(ValueError):
        HittingProbabilityEstimator(method="guess").fit(F2_DOC)
