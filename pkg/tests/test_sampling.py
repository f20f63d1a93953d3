import numpy as np
import pytest

from walkbounds.groups import FreeGroup
from walkbounds.sampling import sample_paths
from walkbounds.walk import build_measure, moment, uniform_measure


def test_asymmetric_z_drift():
    m = build_measure(FreeGroup(1, ["a"]), [("a^-1", 0.3), ("a", 0.7)])
    r = sample_paths(m, 10_000, 1000, seed=1)
    assert abs(r.ell - 0.4) <= 3 * r.ell_se


def test_weighted_free_drift():
    m = uniform_measure(FreeGroup(2, ["a", "b"], {"b": 0.5}))
    r = sample_paths(m, 2000, 1000, seed=2)
    assert abs(r.ell - 0.375) <= 3 * r.ell_se + 2e-3  # finite-n bias O(1/n)


def test_one_step_mean_is_first_moment(f2_weighted_measure):
    m = uniform_measure(FreeGroup(2, ["a", "b"], {"b": 0.5}))
    r = sample_paths(m, 1, 20_000, seed=3)
    assert abs(r.ell - moment(m, 1)) <= 3 * r.ell_se


def test_reproducible(f2_simple):
    a = sample_paths(f2_simple, 50, 100, seed=9, trajectories=True)
    b = sample_paths(f2_simple, 50, 100, seed=9, trajectories=True)
    np.testing.assert_array_equal(a.trajectories, b.trajectories)
    c = sample_paths(f2_simple, 50, 100, seed=10)
    assert c.ell != a.ell


def test_entropy_against_exact_law(f2_simple):
    r = sample_paths(f2_simple, 6, 4000, seed=4, k0=6)
    mean, se = r.entropy[6]
    from walkbounds.walk import distribution_stats, nstep

    H6 = distribution_stats(nstep(f2_simple, 6))["H"]
    assert abs(mean - H6 / 6) <= 4 * se


def test_abelian_paths(z2_simple):
    r = sample_paths(z2_simple, 400, 500, seed=5)
    assert r.ell < 0.1


def test_bad_arguments(f2_simple):
    with pytest.raises(ValueError):
        sample_paths(f2_simple, 0, 10, seed=0)
