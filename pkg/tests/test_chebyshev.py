import math

import numpy as np
import pytest

from walkbounds.chebyshev import (
    SimpleWalkLaw,
    chebyshev_value,
    chernov_tail_bound,
    decomposition_residual,
    exact_tail,
    pointwise_bounds,
    verify_chernov,
)
from walkbounds.special import A_carne
from walkbounds.walk import build_measure, nstep

from .conftest import RHO_F2


def test_low_degree_values():
    assert chebyshev_value(2, 0.3) == pytest.approx(-0.82, abs=1e-15)
    assert all(chebyshev_value(k, 1.0) == pytest.approx(1.0, abs=1e-12) for k in range(51))
    assert chebyshev_value(10, math.cos(0.7)) == pytest.approx(math.cos(7.0), abs=1e-12)


def test_outside_interval_uses_cosh():
    assert chebyshev_value(5, 1.3) == pytest.approx(math.cosh(5 * math.acosh(1.3)), rel=1e-12)


def test_simple_walk_law():
    law = SimpleWalkLaw.of(10)
    assert law.prob(0) == pytest.approx(math.comb(10, 5) / 2**10)
    assert sum(law.abs_probs()) == pytest.approx(1.0)


def test_decomposition_small_n():
    x = np.linspace(-1, 1, 11)
    assert np.max(decomposition_residual(2, x)) < 1e-15
    assert np.max(decomposition_residual(1, x)) < 1e-15


def test_decomposition_to_30():
    grid = np.linspace(-1, 1, 101)
    assert max(float(np.max(decomposition_residual(n, grid))) for n in range(31)) <= 1e-12


def test_chernov_endpoints_and_example():
    for n in (1, 7, 40):
        assert chernov_tail_bound(n, n) == pytest.approx(exact_tail(n, n), rel=1e-12)
        assert exact_tail(n, n) == pytest.approx(2.0**-n)
        assert chernov_tail_bound(n, 0) == 1.0
    tail = sum(math.comb(20, j) for j in range(15, 21)) / 2**20
    assert exact_tail(20, 10) == pytest.approx(tail)
    assert tail <= math.exp(-10 * A_carne(0.5))


def test_chernov_dominates_everywhere():
    for n in range(61):
        for k in range(n + 1):
            assert verify_chernov(n, k)["holds"]


def test_pointwise_free_group(f2_simple):
    rep = pointwise_bounds(f2_simple, 8, RHO_F2, "closed form")
    assert rep.holds
    rows = {r["|g|"]: r for r in rep.table()}
    exact = 8 / 4**8  # one geodesic path per element of the sphere
    assert rows[8]["exact_max"] == pytest.approx(1 / 4**8)
    assert rows[8]["loeuillot"] == pytest.approx(2 * RHO_F2**8 / 2**8)
    assert exact > 0


def test_pointwise_z_trivial_rho(z_simple):
    rep = pointwise_bounds(z_simple, 10)
    assert rep.rho == 1.0
    assert rep.holds
    assert rep.table()[0]["exact_max"] == pytest.approx(math.comb(10, 5) / 2**10)


def test_pointwise_needs_symmetry(f2):
    m = build_measure(f2, [("a", 0.5), ("b", 0.5)])
    with pytest.raises(ValueError):
        pointwise_bounds(m, 3)


def test_loeuillot_below_carne_without_rho():
    # A(x) >= x^2 on [0, 1], so the entropy form beats the Gaussian form
    x = np.linspace(0, 1, 201)
    assert np.all(np.asarray(A_carne(x)) >= x**2 - 1e-15)


def test_against_direct_convolution(f2_simple):
    d = nstep(f2_simple, 6)
    rep = pointwise_bounds(f2_simple, 6, RHO_F2, "closed form")
    lens = d.lengths()
    for r in rep.table():
        assert r["exact_max"] == pytest.approx(float(d.probs[lens == r["|g|"]].max()), rel=1e-12)


def test_csv_columns(f2_simple):
    header = pointwise_bounds(f2_simple, 3, RHO_F2, "closed form").to_csv().splitlines()[0]
    assert header.split(",")[:3] == ["|g|", "count", "exact_max"]
