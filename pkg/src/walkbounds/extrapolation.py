"""Polynomial extrapolation of slowly converging sequences to the limit."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Extrapolant:
    """Limit estimate picked from a Neville table.

    Attributes
    ----------
    value : float
        Selected table entry.
    error : float
        Empirical error bar (spread of the last orders on the final row).
    order : int
        Polynomial order of the selected entry.
    row : list of float
        Final-row entries of every order, lowest first.
    """

    value: float
    error: float
    order: int
    row: list


def neville_table(x, y) -> list:
    """Neville--Aitken table for extrapolation to ``x = 0``.

    ``table[k][i]`` is the value at 0 of the degree-``k`` interpolant
    through points ``i-k .. i``; entries with ``i < k`` are ``nan``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    table = [y.copy()]
    for k in range(1, n):
        prev = table[-1]
        row = np.full(n, np.nan)
        i = np.arange(k, n)
        row[k:] = (x[i - k] * prev[i] - x[i] * prev[i - 1]) / (x[i - k] - x[i])
        table.append(row)
    return table


def extrapolate(x, y, max_order: int | None = None) -> Extrapolant:
    """Extrapolate ``y(x)`` to ``x = 0`` choosing the most self-consistent order.

    Among the final-row entries, picks the order ``k >= 1`` minimizing
    ``|T_k - T_{k-1}|``.  The error bar is the larger of that difference and
    the spread of the last three orders.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("extrapolation needs at least two points")
    table = neville_table(x, y)
    top = x.size - 1 if max_order is None else min(max_order, x.size - 1)
    last = np.array([table[k][-1] for k in range(top + 1)])
    diffs = np.abs(np.diff(last))
    k = int(np.argmin(diffs)) + 1
    tail = last[max(0, top - 2):]
    err = max(float(diffs[k - 1]), float(tail.max() - tail.min()))
    return Extrapolant(float(last[k]), err, k, last.tolist())


def extrapolate_windowed(x, y, min_points: int = 3) -> Extrapolant:
    """:func:`extrapolate` with an error bar that also covers data-window changes.

    The limit is re-estimated after dropping the first ``d`` points for
    ``d = 1 .. n/2`` (keeping at least ``min_points``).  A Neville row can
    settle on a value short of the limit when the early points are far from
    the asymptotic regime; the spread of these re-estimates exposes that.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ex = extrapolate(x, y)
    alts = [extrapolate(x[d:], y[d:]).value for d in range(1, x.size // 2 + 1) if x.size - d >= min_points]
    spread = max((abs(a - ex.value) for a in alts), default=0.0)
    return Extrapolant(ex.value, max(ex.error, spread), ex.order, ex.row)
