"""Measures on groups, exact convolution powers and their asymptotics."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .codecs import codec_for
from .extrapolation import extrapolate_windowed
from .groups import Group

MASS_TOL = 1e-9
SYMMETRY_TOL = 1e-12
DEFAULT_MAX_SUPPORT = 5_000_000


class BudgetError(RuntimeError):
    """A computation outgrew its support budget.

    Attributes
    ----------
    stage : str
        Which computation ran out of room.
    reached : int
        Last step that completed within budget.
    """

    def __init__(self, stage: str, reached: int, size: int, budget: int):
        self.stage = stage
        self.reached = reached
        super().__init__(
            f"{stage}: support of {size} elements exceeds budget {budget} after step {reached}"
        )


class Measure:
    """Finitely supported probability measure on a group.

    Build instances with :func:`build_measure`, which validates the mass and
    records whether ``mu(g) == mu(g^-1)`` holds for every atom.
    """

    def __init__(self, group: Group, elements, probs, is_symmetric: bool):
        self.group = group
        self.elements = tuple(elements)
        self.probs = np.asarray(probs, dtype=float)
        self.is_symmetric = bool(is_symmetric)
        self.lengths = np.array([group.word_length(x) for x in self.elements])

    @property
    def support(self):
        return list(zip(self.elements, self.probs.tolist()))

    @property
    def mass(self) -> float:
        return math.fsum(self.probs)

    @property
    def radius(self) -> float:
        """Largest word length in the support (``k`` in the Carne bound)."""
        return float(self.lengths.max())

    def prob(self, x) -> float:
        x = self.group.element(x)
        for y, p in zip(self.elements, self.probs):
            if y == x:
                return float(p)
        return 0.0

    def moment(self, p: float) -> float:
        return moment(self, p)

    def to_config(self) -> dict:
        return {"support": [[self.group.format(x), float(p)] for x, p in self.support]}

    def __repr__(self):
        body = ", ".join(f"{self.group.format(x)}: {p:.6g}" for x, p in self.support)
        return f"Measure({{{body}}}, symmetric={self.is_symmetric})"


def build_measure(group: Group, support, tol: float = MASS_TOL) -> Measure:
    """Validate and normalize a list of ``(element, probability)`` pairs.

    Elements may be canonical forms or strings in the group's notation.
    Repeated elements are merged.  The total mass must be within ``tol`` of
    one.  Atoms whose inverse carries the same mass up to ``1e-12`` are
    treated as symmetric, and in that case the pair is averaged so the
    symmetry is exact.

    Raises
    ------
    ValueError
        On a non-positive probability, an empty support or a mass defect
        larger than ``tol``.
    """
    merged = {}
    order = []
    for x, p in support:
        x = group.element(x)
        p = float(p)
        if not (p > 0 and math.isfinite(p)):
            raise ValueError(f"probability of {group.format(x)} must be positive, got {p}")
        if x not in merged:
            order.append(x)
            merged[x] = 0.0
        merged[x] += p
    if not order:
        raise ValueError("measure has empty support")
    total = math.fsum(merged.values())
    if abs(total - 1.0) > tol:
        raise ValueError(f"measure mass is {total!r}, differs from 1 by more than {tol:g}")
    probs = {x: merged[x] / total for x in order}

    symmetric = True
    for x in order:
        xi = group.invert(x)
        if abs(probs[x] - probs.get(xi, 0.0)) > SYMMETRY_TOL:
            symmetric = False
            break
    if symmetric:
        for x in order:
            xi = group.invert(x)
            if xi != x:
                probs[x] = probs[xi] = 0.5 * (probs[x] + probs[xi])
    return Measure(group, order, [probs[x] for x in order], symmetric)


def uniform_measure(group: Group) -> Measure:
    """Uniform measure on the group's symmetric generating set."""
    gens = group.generators
    return build_measure(group, [(g, 1.0 / len(gens)) for g in gens])


def moment(measure: Measure, p: float) -> float:
    """``M_p = (sum |g|^p mu(g))^(1/p)`` for ``p >= 1``."""
    if not p >= 1:
        raise ValueError(f"moment order must be >= 1, got {p}")
    return math.fsum(measure.probs * measure.lengths**p) ** (1.0 / p)


@dataclass(frozen=True)
class Distribution:
    """Sparse law on a group, keyed by codec ids sorted increasingly.

    Attributes
    ----------
    codec : object
        Codec that produced ``codes``.
    codes, probs : ndarray
        Element ids and their probabilities, all strictly positive.
    step : int
        Number of convolution steps (``n`` in ``mu^{*n}``).
    pruned_mass : float
        Probability discarded by pruning; zero for exact laws.
    """

    codec: object
    codes: np.ndarray
    probs: np.ndarray
    step: int = 0
    pruned_mass: float = 0.0

    @property
    def size(self) -> int:
        return int(self.codes.size)

    @property
    def total(self) -> float:
        return math.fsum(self.probs)

    def prob(self, element) -> float:
        return self._lookup(self.codec.encode([element]))[0]

    def _lookup(self, codes) -> np.ndarray:
        """Probabilities of ``codes`` (zero where absent)."""
        codes = np.asarray(codes, dtype=np.int64)
        i = np.searchsorted(self.codes, codes)
        i = np.minimum(i, max(self.codes.size - 1, 0))
        hit = self.codes.size > 0
        found = (self.codes[i] == codes) if hit else np.zeros(codes.shape, bool)
        return np.where(found, self.probs[i] if hit else 0.0, 0.0)

    def lengths(self) -> np.ndarray:
        return self.codec.lengths(self.codes)

    def items(self):
        """``(element, probability)`` pairs in id order."""
        return list(zip(self.codec.decode(self.codes), self.probs.tolist()))


def point_mass(codec) -> Distribution:
    return Distribution(codec, np.array([codec.identity], dtype=np.int64), np.array([1.0]), 0, 0.0)


def convolve(dist: Distribution, measure: Measure, prune_eps: float = 0.0,
             max_support: int = DEFAULT_MAX_SUPPORT) -> Distribution:
    """One step ``dist * mu``: the law of ``X g`` with ``X ~ dist``, ``g ~ mu``."""
    codec = dist.codec
    targets = np.concatenate([codec.right_mul(dist.codes, g) for g in measure.elements])
    weights = np.concatenate([dist.probs * p for p in measure.probs])
    codes, inverse = np.unique(targets, return_inverse=True)
    if codes.size > max_support:
        raise BudgetError("convolution", dist.step, codes.size, max_support)
    probs = np.bincount(inverse, weights=weights, minlength=codes.size)
    pruned = dist.pruned_mass
    keep = probs > prune_eps
    if not keep.all():
        pruned += math.fsum(probs[~keep])
        codes, probs = codes[keep], probs[keep]
    return Distribution(codec, codes, probs, dist.step + 1, pruned)


def nstep(measure: Measure, n: int, prune_eps: float = 0.0, max_support: int = DEFAULT_MAX_SUPPORT,
          codec=None) -> Distribution:
    """The ``n``-step law ``mu^{*n}`` by iterated sparse convolution.

    Raises
    ------
    BudgetError
        If the support outgrows ``max_support``; the message names the last
        completed step.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if prune_eps < 0:
        raise ValueError("prune_eps must be nonnegative")
    codec = codec or codec_for(measure.group, measure.elements, n)
    dist = point_mass(codec)
    for _ in range(n):
        dist = convolve(dist, measure, prune_eps, max_support)
    return dist


def iter_laws(measure: Measure, n_max: int, prune_eps: float = 0.0,
              max_support: int = DEFAULT_MAX_SUPPORT, codec=None):
    """Yield ``mu^{*0}, ..., mu^{*n_max}``."""
    codec = codec or codec_for(measure.group, measure.elements, n_max)
    dist = point_mass(codec)
    yield dist
    for _ in range(n_max):
        dist = convolve(dist, measure, prune_eps, max_support)
        yield dist


def entropy(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return -math.fsum(p * np.log(p))


def distribution_stats(dist: Distribution) -> dict:
    """Entropy ``H`` (nats), mean length ``L``, return probability.

    Pruned mass contributes nothing to ``H`` and ``L``; it is reported.
    """
    return {
        "H": entropy(dist.probs),
        "L": math.fsum(dist.probs * dist.lengths()),
        "return_prob": float(dist._lookup([dist.codec.identity])[0]),
        "pruned_mass": dist.pruned_mass,
    }


def pairing(a: Distribution, b: Distribution) -> float:
    """``sum_x a(x) b(x^-1)``, the mass of ``e`` in the law of ``X Y``."""
    inv = a.codec.invert(a.codes)
    return math.fsum(a.probs * b._lookup(inv))


@dataclass
class Estimate:
    value: float
    error: float
    method: str

    def to_dict(self):
        return {"value": self.value, "error": self.error, "method": self.method}


@dataclass
class WalkSeries:
    """Per-step statistics of ``mu^{*n}`` and limit estimates.

    ``return_prob`` covers steps ``0..n_max``; ``return_prob_ext`` extends it
    to ``2 n_max`` using ``mu^{*(j+k)}(e) = sum_x mu^{*j}(x) mu^{*k}(x^-1)``.
    """

    n: np.ndarray
    H: np.ndarray
    L: np.ndarray
    return_prob: np.ndarray
    return_prob_ext: np.ndarray
    pruned_mass: np.ndarray
    support_size: np.ndarray
    h_est: Estimate = None
    ell_est: Estimate = None
    rho_est: Estimate = None
    cesaro: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return int(self.n[-1])

    def h_inc(self):
        return np.concatenate([[np.nan], np.diff(self.H)])

    def l_inc(self):
        return np.concatenate([[np.nan], np.diff(self.L)])

    def rho_ratio(self):
        """``sqrt(mu^{*n}(e) / mu^{*(n-2)}(e))`` at even ``n``, else ``nan``."""
        r = self.return_prob
        out = np.full(r.size, np.nan)
        for k in range(2, r.size, 2):
            if r[k - 2] > 0:
                out[k] = math.sqrt(r[k] / r[k - 2])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "H", "L", "return_prob", "h_inc", "l_inc", "rho_ratio"])
        cols = [self.H, self.L, self.return_prob, self.h_inc(), self.l_inc(), self.rho_ratio()]
        for i, n in enumerate(self.n.tolist()):
            w.writerow([n] + [_fmt(c[i]) for c in cols])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "H": self.H.tolist(),
            "L": self.L.tolist(),
            "return_prob": self.return_prob.tolist(),
            "return_prob_ext": self.return_prob_ext.tolist(),
            "pruned_mass": self.pruned_mass.tolist(),
            "support_size": self.support_size.tolist(),
            "h_est": self.h_est.to_dict(),
            "ell_est": self.ell_est.to_dict(),
            "rho_est": self.rho_est.to_dict(),
            "cesaro": dict(self.cesaro),
            "raw": dict(self.raw),
        }


def _fmt(x) -> str:
    return "" if not np.isfinite(x) else repr(float(x))


def asymptotic_estimates(measure: Measure, n_max: int, prune_eps: float = 0.0,
                         max_support: int = DEFAULT_MAX_SUPPORT) -> WalkSeries:
    """Exact laws to ``n_max`` and extrapolated ``h``, ``ell``, ``rho``.

    * ``ell``: the increment ``L(n_max) - L(n_max - 1)``; error bar is its
      change over the last two steps.
    * ``rho``: Neville extrapolation in ``1/m`` of the ratios
      ``mu^{*2m}(e) / mu^{*(2m-2)}(e)`` for ``m <= n_max``, square-rooted.
    * ``h``: Neville extrapolation in ``1/(2m - 1)`` of the two-step
      increments ``(H(2m) - H(2m-2)) / 2``.

    Extrapolation error bars include the spread over data windows (see
    :func:`extrapolate_windowed`).

    Raw increments and Cesaro means are kept in ``raw`` and ``cesaro``.
    The error bars are empirical, not certified.
    """
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    H, L, ret, pruned, sizes = [], [], [], [], []
    laws = []
    for dist in iter_laws(measure, n_max, prune_eps, max_support):
        st = distribution_stats(dist)
        H.append(st["H"])
        L.append(st["L"])
        ret.append(st["return_prob"])
        pruned.append(dist.pruned_mass)
        sizes.append(dist.size)
        laws.append(dist)
    H, L, ret = np.array(H), np.array(L), np.array(ret)

    # supports grow geometrically, so keeping every law costs a bounded factor
    ext = np.zeros(2 * n_max + 1)
    ext[: n_max + 1] = ret
    for k in range(n_max + 1, 2 * n_max + 1):
        ext[k] = pairing(laws[k - n_max], laws[n_max])
    del laws

    series = WalkSeries(np.arange(n_max + 1), H, L, ret, ext, np.array(pruned), np.array(sizes))

    l_inc = np.diff(L)
    ell_err = abs(l_inc[-1] - l_inc[-3]) if l_inc.size >= 3 else abs(l_inc[-1] - l_inc[-2])
    series.ell_est = Estimate(float(l_inc[-1]), float(ell_err), "increment")

    series.rho_est = _rho_estimate(ext, n_max)

    top = n_max - n_max % 2
    ms = np.arange(2, top + 1, 2)
    inc2 = (H[ms] - H[ms - 2]) / 2
    if inc2.size >= 2:
        ex = extrapolate_windowed(1.0 / (ms - 1.0), inc2)
        series.h_est = Estimate(ex.value, ex.error, f"neville-even-increment(order={ex.order})")
    else:
        series.h_est = Estimate(float(inc2[-1]), float("inf"), "even-increment")

    positive = ext[2 * n_max] > 0
    series.raw = {
        "h_inc": float(H[-1] - H[-2]),
        "l_inc": float(l_inc[-1]),
        "rho_ratio": float(math.sqrt(ext[2 * n_max] / ext[2 * n_max - 2])) if positive else 0.0,
        "rho_ratio_step": 2 * n_max,
    }
    series.cesaro = {
        "H_over_n": float(H[-1] / n_max),
        "L_over_n": float(L[-1] / n_max),
        "rho_root": float(ext[2 * n_max] ** (1.0 / (2 * n_max))),
    }
    if measure.prob(measure.group.identity()) > 0:
        series.cesaro["rho_root_all"] = float(ext[2 * n_max - 1] ** (1.0 / (2 * n_max - 1)))
    return series


def _rho_estimate(ext, n_max) -> Estimate:
    even = ext[0::2]
    if np.any(even[1:] <= 0):
        return Estimate(0.0, 0.0, "vanishing-returns")
    ratios = even[1:] / even[:-1]
    ms = np.arange(1, ratios.size + 1)
    ex = extrapolate_windowed(1.0 / ms, ratios)
    r2 = max(min(ex.value, 1.0), 0.0)
    rho = math.sqrt(r2)
    err2 = ex.error
    err = err2 / (2 * rho) if rho > 0 else math.sqrt(err2)
    return Estimate(rho, float(err), f"neville-return-ratio(order={ex.order})")
