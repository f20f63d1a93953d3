"""Chebyshev decomposition of powers and the heat-kernel upper bounds it yields."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .special import A_carne
from .walk import Distribution, Measure, nstep


def chebyshev_value(k: int, x):
    """``T_k(x)``: three-term recurrence on ``[-1, 1]``, ``cosh`` form outside."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) <= 1
    xi = np.where(inside, x, 0.0)
    t0, t1 = np.ones_like(xi), xi
    if k == 0:
        val = t0
    else:
        for _ in range(k - 1):
            t0, t1 = t1, 2 * xi * t1 - t0
        val = t1
    if not inside.all():
        ax = np.where(inside, 1.0, np.abs(x))
        outside = np.cosh(k * np.arccosh(ax)) * np.where(x < 0, (-1.0) ** k, 1.0)
        val = np.where(inside, val, outside)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class SimpleWalkLaw:
    """Law of ``S_n``, the simple random walk on the integers after ``n`` steps."""

    n: int
    probs: np.ndarray  # P(S_n = k) for k = -n..n

    @classmethod
    def of(cls, n: int) -> "SimpleWalkLaw":
        if n < 0:
            raise ValueError("n must be nonnegative")
        k = np.arange(-n, n + 1)
        p = np.zeros(2 * n + 1)
        ok = (n + k) % 2 == 0
        j = (n + k[ok]) // 2
        p[ok] = np.exp(gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1) - n * math.log(2))
        return cls(n, p)

    def prob(self, k: int) -> float:
        return float(self.probs[k + self.n]) if abs(k) <= self.n else 0.0

    def abs_probs(self) -> np.ndarray:
        """``P(|S_n| = k)`` for ``k = 0..n``."""
        out = self.probs[self.n:].copy()
        out[1:] += self.probs[: self.n][::-1]
        return out


def decomposition_residual(n: int, x):
    """``|x^n - sum_k P(|S_n| = k) T_k(x)|``."""
    if not 0 <= n <= 60:
        raise ValueError("n must lie in [0, 60]")
    x = np.asarray(x, dtype=float)
    w = SimpleWalkLaw.of(n).abs_probs()
    total = np.zeros_like(x)
    t0, t1 = np.ones_like(x), x
    for k in range(n + 1):
        tk = t0 if k == 0 else t1
        total = total + w[k] * tk
        if k >= 1:
            t0, t1 = t1, 2 * x * t1 - t0
    res = np.abs(x**n - total)
    return float(res) if res.ndim == 0 else res


def exact_tail(n: int, k: int) -> float:
    """``P(S_n >= k)`` from exact binomial sums."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    j0 = max(math.ceil((n + k) / 2), 0)
    if j0 > n:
        return 0.0
    return float(Fraction(sum(math.comb(n, j) for j in range(j0, n + 1)), 2**n))


def chernov_tail_bound(n: int, k: int) -> float:
    """``exp(-(n/2) A(k/n))``, an upper bound on ``P(S_n >= k)`` for ``0 <= k <= n``."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if n == 0:
        return 1.0
    return math.exp(-0.5 * n * A_carne(k / n))


def verify_chernov(n: int, k: int, rtol: float = 1e-12) -> dict:
    tail, bound = exact_tail(n, k), chernov_tail_bound(n, k)
    return {"n": n, "k": k, "tail": tail, "bound": bound, "holds": tail <= bound * (1 + rtol)}


@dataclass
class PointwiseReport:
    """Exact ``mu^{*n}(g)`` against the Loeuillot and Carne bounds.

    Arrays are aligned with ``lengths``; ``table`` aggregates per word length.
    """

    n: int
    rho: float
    rho_source: str
    radius: float
    lengths: np.ndarray
    exact: np.ndarray
    loeuillot: np.ndarray
    loeuillot_tail: np.ndarray
    carne: np.ndarray

    @property
    def holds(self) -> bool:
        tol = 1 + 1e-12
        return bool(np.all(self.exact <= self.loeuillot_tail * tol)
                    and np.all(self.loeuillot_tail <= self.loeuillot * tol)
                    and np.all(self.exact <= self.loeuillot * tol)
                    and np.all(self.exact <= self.carne * tol)
                    and np.all(self.loeuillot <= 2 * self.rho**self.n * tol))

    def table(self) -> list:
        rows = []
        for L in np.unique(self.lengths):
            sel = self.lengths == L
            emax = float(self.exact[sel].max())
            lo = float(self.loeuillot[sel][0])
            rows.append({"|g|": float(L), "count": int(sel.sum()), "exact_max": emax,
                         "loeuillot": lo, "carne": float(self.carne[sel][0]), "ratio": emax / lo})
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, ["|g|", "count", "exact_max", "loeuillot", "carne", "ratio"],
                           lineterminator="\n")
        w.writeheader()
        for r in self.table():
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"n": self.n, "rho": self.rho, "rho_source": self.rho_source,
                "radius": self.radius, "holds": self.holds, "table": self.table()}


def pointwise_bounds(measure: Measure, n: int, rho: float | None = None, rho_source: str | None = None,
                     dist: Distribution | None = None) -> PointwiseReport:
    """Compare ``mu^{*n}(g)`` with ``2 rho^n P(S_n >= |g|/k)``, its Chernov relaxation
    ``2 rho^n exp(-(n/2) A(|g|/(nk)))`` and ``2 exp(-|g|^2 / (2 n k^2))``.

    ``k`` is the largest word length in the support.  ``rho`` must be an
    upper bound on the spectral radius; without one, ``rho = 1`` is used,
    which keeps the inequality valid but loose.

    Raises
    ------
    ValueError
        For an asymmetric measure.
    RuntimeError
        If some ``g`` has ``|g| > n k``, which is impossible for a law of
        ``n`` steps.
    """
    if not measure.is_symmetric:
        raise ValueError("pointwise bounds need a symmetric measure")
    if rho is None:
        rho, rho_source = 1.0, "trivial upper bound"
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    dist = dist if dist is not None else nstep(measure, n)
    k = measure.radius
    lengths = dist.lengths()
    x = lengths / (n * k) if n else np.zeros_like(lengths)
    if np.any(x > 1 + 1e-12):
        raise RuntimeError("element farther than n steps allow; inconsistent law")
    x = np.minimum(x, 1.0)
    rn = rho**n
    loe = 2 * rn * np.exp(-0.5 * n * np.asarray(A_carne(x)))
    steps = np.ceil(lengths / k - 1e-9).astype(int)
    tails = {s: exact_tail(n, s) for s in np.unique(steps).tolist()}
    loe_tail = 2 * rn * np.array([tails[s] for s in steps.tolist()])
    carne = 2 * np.exp(-(lengths**2) / (2 * n * k * k)) if n else np.full_like(lengths, 2.0)
    return PointwiseReport(n, float(rho), rho_source or "supplied", k, lengths, dist.probs.copy(),
                           loe, loe_tail, carne)
