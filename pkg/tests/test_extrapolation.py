import numpy as np
import pytest

from walkbounds.extrapolation import extrapolate, extrapolate_windowed, neville_table


def test_polynomial_is_exact():
    x = 1.0 / np.arange(1, 8)
    y = 2.0 + 3 * x - 5 * x**2
    ex = extrapolate(x, y)
    assert ex.value == pytest.approx(2.0, abs=1e-10)


def test_neville_table_shape():
    x = np.array([1.0, 0.5, 0.25])
    t = neville_table(x, x + 1)
    assert len(t) == 3
    assert np.isnan(t[2][0]) and t[1][2] == pytest.approx(1.0)


def test_windowed_error_covers_stalled_row(f2_simple):
    """On F2 the return ratios stall short of rho^2 = 3/4 at n = 12."""
    from walkbounds.walk import asymptotic_estimates

    even = asymptotic_estimates(f2_simple, 12).return_prob_ext[0::2]
    ratios = even[1:] / even[:-1]
    m = np.arange(1, ratios.size + 1)
    a = extrapolate(1.0 / m, ratios)
    b = extrapolate_windowed(1.0 / m, ratios)
    assert b.value == a.value
    assert abs(a.value - 0.75) > a.error
    assert abs(b.value - 0.75) <= b.error


def test_needs_two_points():
    with pytest.raises(ValueError):
        extrapolate([1.0], [1.0])
