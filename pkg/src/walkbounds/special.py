"""Special functions appearing in the entropy inequalities.

All functions accept scalars or arrays.  Near the endpoints ``+-1`` the
logarithms are written with ``log1p`` so that ``F``, ``FG_inv`` and
``A_carne`` keep full relative accuracy.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

SERIES_CUTOFF = 1e-3


def _check(x, lo, hi, name, lo_open=False, hi_open=False):
    x = np.asarray(x, dtype=float)
    bad = (x < lo) | (x > hi) | np.isnan(x)
    if lo_open:
        bad |= x == lo
    if hi_open:
        bad |= x == hi
    if np.any(bad):
        raise ValueError(f"{name} is defined on {'(' if lo_open else '['}{lo}, {hi}{')' if hi_open else ']'}, "
                         f"got {x[bad].ravel()[0]!r}")
    return x


def _out(x, like):
    return float(x) if np.ndim(like) == 0 else x


def F(x):
    """``F(x) = 2 x artanh(x) = x log((1 + x) / (1 - x))`` on ``(-1, 1)``; ``F(+-1) = inf``."""
    x = _check(x, -1.0, 1.0, "F")
    with np.errstate(divide="ignore"):
        val = x * (np.log1p(x) - np.log1p(-x))
    return _out(val, x)


def G(x):
    """``G(x) = 1 - sqrt(1 - x^2)`` on ``[-1, 1]``, in cancellation-free form."""
    x = _check(x, -1.0, 1.0, "G")
    return _out(x * x / (1.0 + np.sqrt(1.0 - x * x)), x)


@lru_cache(maxsize=None)
def fg_coefficients(n: int) -> tuple:
    """Taylor coefficients ``c_1..c_n`` of ``F o G^-1`` at 0, as exact fractions.

    ``c_1 = 4`` and ``(2k - 1) c_k = (k - 2) c_{k-1} + 2``.
    """
    if n < 1:
        return ()
    cs = [Fraction(4)]
    for k in range(2, n + 1):
        cs.append(((k - 2) * cs[-1] + 2) / Fraction(2 * k - 1))
    return tuple(cs)


def fg_series(x, n_terms: int = 20):
    """Truncated power series ``sum_{k <= n_terms} c_k x^k``."""
    xs = np.asarray(x, dtype=float)
    acc = np.zeros_like(xs)
    for c in reversed(fg_coefficients(n_terms)):
        acc = (acc + float(c)) * xs
    return _out(acc, xs)


def FG_inv(x):
    """``F(G^-1(x))`` on ``[0, 1)``; ``FG_inv(1) = inf``.

    With ``s = sqrt(2x - x^2)`` this is ``s log((1 + s) / (1 - s))``,
    evaluated as ``2 s (log1p(s) - log1p(-x))`` since
    ``1 - s = (1 - x)^2 / (1 + s)``.  Below ``1e-3`` the Taylor series is
    used instead.
    """
    x = _check(x, 0.0, 1.0, "FG_inv")
    s = np.sqrt(x * (2.0 - x))
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = 2.0 * s * (np.log1p(s) - np.log1p(-x))
    val = np.where(x < SERIES_CUTOFF, fg_series(np.minimum(x, SERIES_CUTOFF), 12), closed)
    return _out(val, x)


def A_carne(x):
    """``(1 + x) log(1 + x) + (1 - x) log(1 - x)`` on ``[0, 1]``; ``A_carne(1) = 2 log 2``."""
    x = _check(x, 0.0, 1.0, "A_carne")
    with np.errstate(divide="ignore", invalid="ignore"):
        one_minus = np.where(x < 1.0, (1.0 - x) * np.log1p(-x), 0.0)
    return _out((1.0 + x) * np.log1p(x) + one_minus, x)


def A_ledr(x):
    """``2 x artanh(x) + 4 sqrt(1 - x^2) - 4 = F(x) - 4 G(x)`` on ``[0, 1)``."""
    x = _check(x, 0.0, 1.0, "A_ledr", hi_open=True)
    return _out(np.asarray(F(x)) - 4.0 * np.asarray(G(x)), x)


FUNCTIONS = {"F": F, "G": G, "FG_inv": FG_inv, "A_carne": A_carne, "A_ledr": A_ledr}


def eval_special(name: str, x):
    """Evaluate one of ``F``, ``G``, ``FG_inv``, ``A_carne``, ``A_ledr``."""
    try:
        fn = FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown special function {name!r}; choose from {sorted(FUNCTIONS)}") from None
    return fn(x)
