"""Continuous-time (poissonized) laws and their time derivatives."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .codecs import codec_for
from .walk import DEFAULT_MAX_SUPPORT, BudgetError, Distribution, Measure, convolve, entropy, point_mass


@dataclass(frozen=True)
class PoissonizedLaw:
    """``mu_t = e^-t sum_n t^n / n! mu^{*n}`` truncated at ``n = N``.

    ``law.probs`` sums to ``1 - defect - law.pruned_mass``, where ``defect``
    is the Poisson tail beyond ``N`` and ``pruned_mass`` collects entries
    dropped below the pruning threshold.
    """

    t: float
    N: int
    law: Distribution
    defect: float

    @property
    def pruned_mass(self) -> float:
        return self.law.pruned_mass

    @property
    def mass_error(self) -> float:
        return abs(math.fsum(self.law.probs) + self.defect + self.pruned_mass - 1.0)


def poisson_truncation(t: float, defect_tol: float) -> int:
    """Smallest ``N`` with ``P(Poisson(t) > N) < defect_tol``."""
    if t == 0:
        return 0
    n = max(int(t), 0)
    while stats.poisson.sf(n, t) >= defect_tol:
        n += 1
    return n


def poissonize(measure: Measure, t: float, defect_tol: float = 1e-12, prune_eps: float = 1e-14,
               max_support: int = DEFAULT_MAX_SUPPORT) -> PoissonizedLaw:
    """Truncated poissonized law.

    The scaled laws ``nu_n = w_n mu^{*n}`` with Poisson weights ``w_n`` are
    propagated by ``nu_{n+1} = t / (n + 1) * (nu_n * mu)`` so that entries
    below ``prune_eps`` can be dropped early.  Pruning also removes the
    descendants of dropped entries, so the pruned mass is accounted as
    ``sum_n (w_n - |nu_n|)`` with ``w_n`` from the Poisson pmf.
    """
    if not t >= 0:
        raise ValueError("t must be nonnegative")
    N = poisson_truncation(t, defect_tol)
    codec = codec_for(measure.group, measure.elements, N)
    w0 = math.exp(-t)
    cur = point_mass(codec)
    cur = Distribution(codec, cur.codes, cur.probs * w0, 0, 0.0)
    acc_codes = [cur.codes]
    acc_probs = [cur.probs]
    weights = stats.poisson.pmf(np.arange(N + 1), t) if t > 0 else np.ones(1)
    lost = [weights[0] - math.fsum(cur.probs)]
    for n in range(N):
        nxt = convolve(Distribution(codec, cur.codes, cur.probs, n, 0.0), measure, 0.0, max_support)
        probs = nxt.probs * (t / (n + 1))
        keep = probs > prune_eps
        lost.append(weights[n + 1] - math.fsum(probs[keep]))
        cur = Distribution(codec, nxt.codes[keep], probs[keep], n + 1, 0.0)
        acc_codes.append(cur.codes)
        acc_probs.append(cur.probs)
    codes, inverse = np.unique(np.concatenate(acc_codes), return_inverse=True)
    if codes.size > max_support:
        raise BudgetError("poissonization", N, codes.size, max_support)
    probs = np.bincount(inverse, weights=np.concatenate(acc_probs), minlength=codes.size)
    defect = float(stats.poisson.sf(N, t)) if t > 0 else 0.0
    pruned = max(math.fsum(lost), 0.0)
    return PoissonizedLaw(t, N, Distribution(codec, codes, probs, N, pruned), defect)


@dataclass
class Derivatives:
    """Symmetrized time derivatives at ``t`` and the Dirichlet form.

    ``boundary_mass`` is the total ``mu(g) mu_t(x)`` over pairs where
    exactly one of ``mu_t(x)``, ``mu_t(gx)`` vanishes because of truncation;
    such pairs are omitted from ``dH`` and kept in ``dL`` and ``dirichlet``.
    """

    dH: float
    dL: float
    dirichlet: float
    dL_direct: float
    boundary_mass: float

    def to_dict(self):
        return dict(self.__dict__)


def symmetrized_derivatives(measure: Measure, plaw: PoissonizedLaw) -> Derivatives:
    """``d/dt H(mu_t)``, ``d/dt L(mu_t)`` and the Dirichlet form of ``sqrt(mu_t)``.

    With ``f = mu_t`` and pairs ``(x, gx)`` weighted by ``mu(g)``::

        dH        = 1/2 sum mu(g) (f(gx) - f(x)) (log f(gx) - log f(x))
        dL        = 1/2 sum mu(g) (|x| - |gx|) (f(gx) - f(x))
        dirichlet = 1/2 sum mu(g) (sqrt f(gx) - sqrt f(x))^2

    Every summand is invariant under ``(x, g) -> (gx, g^-1)``, so pairs with
    both ends in the support are visited from both sides and pairs leaving
    the support are counted twice from the inside.  ``dL_direct`` is the
    unsymmetrized ``sum |x| (mu_t * mu - mu_t)(x)`` for comparison.
    """
    if not measure.is_symmetric:
        raise ValueError("symmetrized derivatives need a symmetric measure")
    law = plaw.law
    codec = law.codec
    f = law.probs
    lx = law.lengths()
    logf = np.log(f)
    sqf = np.sqrt(f)
    dH, dL, dir_, bmass = [], [], [], []
    for g, p in zip(measure.elements, measure.probs):
        gx = codec.left_mul(g, law.codes)
        fg = law._lookup(gx)
        lg = codec.lengths(gx)
        inside = fg > 0
        out = ~inside
        fi, xi = fg[inside], inside
        dH.append(0.5 * p * (fi - f[xi]) * (np.log(fi) - logf[xi]))
        dL.append(0.5 * p * (lx[xi] - lg[inside]) * (fi - f[xi]))
        dir_.append(0.5 * p * (np.sqrt(fi) - sqf[xi]) ** 2)
        # outside pairs, doubled for the mirror orientation
        dL.append(p * (lx[out] - lg[out]) * (-f[out]))
        dir_.append(p * f[out])
        bmass.append(p * f[out])

    # unsymmetrized: (mu_t * mu)(y) = sum_g mu(g) mu_t(g^-1 y), i.e. the mass pushed to g x
    pushed_codes = np.concatenate([codec.left_mul(g, law.codes) for g in measure.elements])
    pushed_w = np.concatenate([f * p for p in measure.probs])
    direct = math.fsum(codec.lengths(pushed_codes) * pushed_w) - math.fsum(lx * f)

    return Derivatives(
        dH=math.fsum(np.concatenate(dH)),
        dL=math.fsum(np.concatenate(dL)),
        dirichlet=math.fsum(np.concatenate(dir_)),
        dL_direct=direct,
        boundary_mass=math.fsum(np.concatenate(bmass)),
    )


def law_entropy(plaw: PoissonizedLaw) -> float:
    return entropy(plaw.law.probs)


def law_mean_length(plaw: PoissonizedLaw) -> float:
    return math.fsum(plaw.law.probs * plaw.law.lengths())


def finite_difference(measure: Measure, t: float, delta: float = 1e-4, **kwargs) -> dict:
    """Centered differences of ``H(mu_t)`` and ``L(mu_t)`` in ``t``."""
    if t - delta < 0:
        raise ValueError("t - delta must be nonnegative")
    lo = poissonize(measure, t - delta, **kwargs)
    hi = poissonize(measure, t + delta, **kwargs)
    return {
        "dH": (law_entropy(hi) - law_entropy(lo)) / (2 * delta),
        "dL": (law_mean_length(hi) - law_mean_length(lo)) / (2 * delta),
    }
