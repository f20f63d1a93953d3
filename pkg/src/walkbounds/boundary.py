"""First-passage probabilities, the boundary cocycle and boundary entropy on free products.

For a walk on a free product of cyclic groups whose increments are single
syllables, every prefix of a reduced word is a cut point of the Cayley
graph.  First-passage probabilities are then multiplicative,
``q(s_1 ... s_k) = q(s_1) ... q(s_k)``, and the Radon-Nikodym cocycle of
the harmonic measure at a generator ``a`` is

    c(a, xi) = q(a)                  if a and xi_1 lie in different factors,
    c(a, xi) = q(a xi_1) / q(xi_1)   otherwise,

with the convention ``q(e) = 1``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .groups import APPEND, FreeAbelianGroup, WordGroup
from .sampling import AbelianPaths, TablePaths, WordPaths
from .walk import Measure, uniform_measure

FIXED_POINT_TOL = 1e-15
DETECTOR_TOL = 1e-9
MIN_DETECTOR_SAMPLES = 100


class RecurrentWalkError(ValueError):
    """The walk is recurrent (or lives on an amenable free product), so ``q = 1``."""


# -- hitting tables -----------------------------------------------------------


@dataclass
class HittingTable:
    """First-passage probabilities ``q(x) = P(X_n = x for some n >= 0)``.

    Attributes
    ----------
    group : WordGroup
    entries : dict
        ``element -> q``.  Exact tables list every atom; MC tables list the
        elements that were simulated.
    method : str
        ``tree-exact``, ``free-product-exact`` or ``monte-carlo``.
    errors : dict
        Standard errors of MC entries (zero for exact entries).
    residual : float
        Max fixed-point residual of an exact table.
    """

    group: WordGroup
    entries: dict
    method: str
    errors: dict = field(default_factory=dict)
    residual: float = 0.0
    iterations: int = 0

    @property
    def exact(self) -> bool:
        return self.method != "monte-carlo"

    def q(self, x) -> float:
        """``q(x)``; exact tables extend to words by multiplicativity."""
        x = self.group.element(x)
        if x == ():
            return 1.0
        if x in self.entries:
            return self.entries[x]
        if self.exact:
            return math.prod(self.entries[(a,)] for a in x)
        raise KeyError(f"no hitting probability for {self.group.format(x)}")

    def error(self, x) -> float:
        x = self.group.element(x)
        if x == () or self.exact:
            return 0.0
        if x not in self.errors:
            raise KeyError(f"no hitting probability for {self.group.format(x)}")
        return self.errors[x]

    def to_dict(self) -> dict:
        fmt = self.group.format
        return {
            "method": self.method,
            "q": {fmt(x): v for x, v in self.entries.items()},
            "se": {fmt(x): v for x, v in self.errors.items()} if self.errors else None,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def _atom_masses(measure: Measure) -> np.ndarray:
    """``mu`` as an array over atom ids; rejects increments longer than one syllable."""
    group = measure.group
    if not isinstance(group, WordGroup):
        raise ValueError("hitting tables need a free product of cyclic groups")
    mu = np.zeros(group.n_atoms + 1)
    for x, p in measure.support:
        if len(x) != 1:
            raise ValueError(f"increment {group.format(x)} is not a single syllable; use hitting_mc")
        mu[x[0]] = p
    return mu


def _check_transient(measure: Measure, mu: np.ndarray):
    group = measure.group
    for i, f in enumerate(group.factors):
        atoms = [a for a in range(1, group.n_atoms + 1) if group._atom_factor[a] == i]
        charged = [group._atom_exp[a] for a in atoms if mu[a] > 0]
        if not charged:
            raise ValueError(f"measure does not charge factor {f.label!r}; it does not generate the group")
        if f.order is not None and math.gcd(f.order, *charged) != 1:
            raise ValueError(f"measure does not generate factor {f.label!r}")
    orders = [f.order for f in group.factors]
    if len(orders) == 1 or orders == [2, 2]:
        raise RecurrentWalkError(
            f"{group!r} is amenable (finite, Z or infinite dihedral); the walk does not escape and q = 1")


def _phi(group: WordGroup, mu: np.ndarray, q: np.ndarray):
    """One sweep of the first-passage system, or ``None`` if it has no finite solution.

    Seen from its factor coset, the walk moves inside the factor with the
    factor's masses and otherwise leaves through ``t`` and comes back with
    probability ``q(t^-1)``, which acts as a holding weight ``lam``.
    """
    n = group.n_atoms
    fac, inv = group._atom_factor, group._inv
    out = np.zeros(n + 1)
    back = np.array([mu[t] * q[inv[t]] for t in range(n + 1)])
    for i, f in enumerate(group.factors):
        lam = sum(back[t] for t in range(1, n + 1) if fac[t] != i)
        if f.order is None:
            up, down = group._atom_of[(i, 1)], group._atom_of[(i, -1)]
            for s, si in ((up, down), (down, up)):
                out[s] = mu[s] + lam * q[s] + mu[si] * q[s] ** 2
            continue
        m = f.order
        P = np.zeros((m, m))
        for y in range(m):
            for k in range(1, m):
                P[y, (y + k) % m] += mu[group._atom_of[(i, k)]]
            P[y, y] += lam
        for k in range(1, m):
            idx = [y for y in range(m) if y != k]
            A = np.eye(m - 1) - P[np.ix_(idx, idx)]
            if np.linalg.cond(A) > 1e14:
                return None
            sol = np.linalg.solve(A, P[idx, k])
            if np.any(sol < 0):
                return None
            out[group._atom_of[(i, k)]] = sol[idx.index(0)]
    return out


def _monotone_fixed_point(group, mu, tol, max_iter):
    q = np.zeros(group.n_atoms + 1)
    for it in range(1, max_iter + 1):
        new = _phi(group, mu, q)
        step = np.max(np.abs(new - q))
        q = new
        if step <= tol:
            return q, it
    raise RuntimeError(f"first-passage iteration did not converge in {max_iter} sweeps")


def _table(group, q, method, mu, it):
    res = float(np.max(np.abs(_phi(group, mu, q) - q)))
    entries = {(a,): float(q[a]) for a in range(1, group.n_atoms + 1)}
    return HittingTable(group, entries, method, residual=res, iterations=it)


def solve_hitting_tree(measure: Measure, tol: float = FIXED_POINT_TOL, max_iter: int = 10_000) -> HittingTable:
    """Exact first-passage probabilities on a tree.

    Iterates ``q_s = mu(s) + q_s sum_{t != s} mu(t) q(t^-1)`` from ``q = 0``;
    the iterates increase to the minimal nonnegative solution, which is the
    probabilistic one.

    Raises
    ------
    ValueError
        If the Cayley graph is not a tree, the measure is asymmetric or not
        supported on generators.
    RecurrentWalkError
        For ``Z`` and the infinite dihedral group.
    """
    group = measure.group
    if not isinstance(group, WordGroup) or not group.is_tree:
        raise ValueError("the Cayley graph is not a tree; use free_product_exact or hitting_mc")
    if not measure.is_symmetric:
        raise ValueError("tree solver needs a symmetric measure")
    mu = _atom_masses(measure)
    _check_transient(measure, mu)
    q, it = _monotone_fixed_point(group, mu, tol, max_iter)
    return _table(group, q, "tree-exact", mu, it)


def solve_hitting_free_product(measure: Measure, tol: float = FIXED_POINT_TOL,
                               max_iter: int = 100_000) -> HittingTable:
    """Exact first-passage probabilities for single-syllable increments on a free product."""
    group = measure.group
    mu = _atom_masses(measure)
    _check_transient(measure, mu)
    q, it = _monotone_fixed_point(group, mu, tol, max_iter)
    return _table(group, q, "tree-exact" if group.is_tree else "free-product-exact", mu, it)


# -- harmonic measure, entropy, drift and spectral radius ---------------------


def first_letter_law(table: HittingTable) -> dict:
    """Harmonic measure of the cylinders ``{xi : xi_1 = x}`` for each atom ``x``.

    The walk ends in cylinder ``x`` iff it reaches ``x`` and afterwards never
    returns to a position from which a different first letter of the same
    factor can take over.  This gives ``nu(x) = q(x) (1 - sum nu(y))`` over the
    atoms ``y`` of ``x``'s factor (finite factor) or over ``y = x^-1``
    (infinite factor), a linear system.
    """
    group = table.group
    n = group.n_atoms
    fac, inv = group._atom_factor, group._inv
    M = np.eye(n)
    b = np.zeros(n)
    for x in range(1, n + 1):
        qx = table.q((x,))
        if group.factors[fac[x]].order is None:
            excl = [inv[x]]
        else:
            excl = [y for y in range(1, n + 1) if fac[y] == fac[x]]
        b[x - 1] = qx
        for y in excl:
            M[x - 1, y - 1] += qx
    nu = np.linalg.solve(M, b)
    return {(x,): float(nu[x - 1]) for x in range(1, n + 1)}


def rn_cocycle(table: HittingTable, a, xi1) -> float:
    """``c(a, xi)`` for a syllable ``a`` and a ray starting with the syllable ``xi1``."""
    group = table.group
    a, xi1 = group.element(a), group.element(xi1)
    if len(a) != 1 or len(xi1) != 1:
        raise ValueError("rn_cocycle takes single syllables; use cocycle for words")
    if not group.same_factor(a[0], xi1[0]):
        return table.q(a)
    return table.q(group.compose(a, xi1)) / table.q(xi1)


def cocycle(table: HittingTable, g, xi) -> float:
    """``c(g, xi) = q(g xi) / q(xi)`` for a word ``g`` and a ray prefix ``xi``.

    ``xi`` must be reduced and at least as long as ``g`` so that the ratio
    has stabilized.
    """
    group = table.group
    g, xi = group.element(g), group.element(xi)
    if len(xi) < max(len(g), 1):
        raise ValueError("ray prefix must be at least as long as the group element")
    return table.q(group.compose(g, xi)) / table.q(xi)


def symmetrized_cocycle(c):
    """``d = (1 - c) / (1 + c)``, the additive form used in the equality analysis."""
    c = np.asarray(c, dtype=float)
    d = (1 - c) / (1 + c)
    return float(d) if d.ndim == 0 else d


def boundary_entropy(measure: Measure, table: HittingTable, nu: dict | None = None) -> float:
    """``h = -sum_a mu(a) sum_x nu(x) log c(a, x)``."""
    nu = first_letter_law(table) if nu is None else nu
    terms = []
    for a, p in measure.support:
        for x, w in nu.items():
            terms.append(-p * w * math.log(rn_cocycle(table, a, x)))
    return math.fsum(terms)


def boundary_drift(measure: Measure, table: HittingTable, nu: dict | None = None) -> float:
    """``ell = sum_a mu(a) sum_x nu(x) (|a xi| - |xi|)``, the mean length change on the boundary."""
    group = table.group
    nu = first_letter_law(table) if nu is None else nu
    terms = []
    for a, p in measure.support:
        for x, w in nu.items():
            if group.same_factor(a[0], x[0]):
                beta = group.word_length(group.compose(a, x)) - group.word_length(x)
            else:
                beta = group.word_length(a)
            terms.append(p * w * beta)
    return math.fsum(terms)


def boundary_entropy_free(d: int) -> float:
    """Entropy of the simple walk on ``F_d`` from the cocycle and the uniform boundary measure.

    The first letter of the limit ray is uniform over the ``2d`` generators.
    """
    from .groups import FreeGroup

    if d < 2:
        raise RecurrentWalkError("the simple walk on Z is recurrent")
    group = FreeGroup(d)
    measure = uniform_measure(group)
    table = solve_hitting_tree(measure)
    nu = {(x,): 1.0 / (2 * d) for x in range(1, group.n_atoms + 1)}
    return boundary_entropy(measure, table, nu)


def _least_fixed_point(group, mu, max_iter=200):
    """Newton iteration from 0 for the ``z``-weighted system; ``None`` past the critical ``z``."""
    n = group.n_atoms
    q = np.zeros(n + 1)
    h = 1e-7
    for _ in range(max_iter):
        f = _phi(group, mu, q)
        if f is None:
            return None
        J = np.zeros((n, n))
        for j in range(1, n + 1):
            e = q.copy()
            e[j] += h
            fe = _phi(group, mu, e)
            if fe is None:
                return None
            J[:, j - 1] = (fe[1:] - f[1:]) / h
        if np.max(np.abs(np.linalg.eigvals(J))) >= 1:
            return None
        step = np.linalg.solve(np.eye(n) - J, f[1:] - q[1:])
        q = q.copy()
        q[1:] += step
        if np.max(np.abs(step)) < 1e-15 * max(1.0, np.max(q)):
            break
    return q


def spectral_radius_free_product(measure: Measure) -> float:
    """``rho = 1 / R`` with ``R`` the radius of convergence of the Green function.

    The first-passage generating functions ``q(x | z)`` solve the same system
    with ``mu`` replaced by ``z mu``; a finite minimal solution exists exactly
    for ``z <= R``.  ``R`` is located by bisection.
    """
    group = measure.group
    mu = _atom_masses(measure)
    _check_transient(measure, mu)
    lo, hi = 1.0, 2.0
    while _least_fixed_point(group, mu * hi) is not None:
        lo, hi = hi, 2 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _least_fixed_point(group, mu * mid) is None:
            hi = mid
        else:
            lo = mid
    return 1.0 / lo


@dataclass
class FreeProductSolution:
    """Exact invariants of a single-syllable walk on a free product of cyclic groups."""

    table: HittingTable
    nu: dict
    h: float
    ell: float
    rho: float

    def to_dict(self) -> dict:
        fmt = self.table.group.format
        return {"hitting": self.table.to_dict(), "first_letter": {fmt(x): v for x, v in self.nu.items()},
                "h": self.h, "ell": self.ell, "rho": self.rho}


def free_product_exact(measure: Measure) -> FreeProductSolution:
    """Hitting probabilities, harmonic first-letter law, ``h``, ``ell`` and ``rho``."""
    table = solve_hitting_free_product(measure)
    nu = first_letter_law(table)
    return FreeProductSolution(table, nu, boundary_entropy(measure, table, nu),
                               boundary_drift(measure, table, nu), spectral_radius_free_product(measure))


def exact_applicable(measure: Measure) -> bool:
    """Whether :func:`free_product_exact` handles this measure."""
    try:
        _check_transient(measure, _atom_masses(measure))
    except ValueError:
        return False
    return True


# -- Monte Carlo --------------------------------------------------------------


def _start_paths(measure: Measure, count: int, capacity: int, start):
    group = measure.group
    if isinstance(group, WordGroup):
        paths = WordPaths(group, count, capacity + len(start))
        paths.words[:, : len(start)] = start
        paths.n[:] = len(start)
        paths.length[:] = group.word_length(start)
        return paths
    if isinstance(group, FreeAbelianGroup):
        paths = AbelianPaths(group, count)
        paths.x[:] = np.asarray(start, dtype=np.int64)
        return paths
    paths = TablePaths(group, count)
    paths.c[:] = paths.codec.encode([start])[0]
    return paths


def _path_capacity(measure: Measure, radius: float) -> int:
    group = measure.group
    per_step = max(len(x) for x in measure.elements)
    if isinstance(group, WordGroup):
        return int(radius / min(group._atom_len[1:])) + 2 * per_step + 2
    return 0


def _wilson(k: int, n: int, z: float = 3.0):
    conf = 2 * stats.norm.cdf(z) - 1
    ci = stats.binomtest(k, n).proportion_ci(confidence_level=conf, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class HittingEstimate:
    """MC estimate of ``q(target)``.

    ``interval`` is the Wilson score interval at ``z = 3``.  ``censored`` is
    the fraction of walks that neither hit the target nor moved beyond
    ``escape_radius`` from it within ``horizon`` steps; the estimate is
    biased low by at most this fraction plus the chance of coming back from
    beyond the escape radius.
    """

    target: tuple
    value: float
    se: float
    interval: tuple
    samples: int
    hits: int
    censored: float
    horizon: int
    escape_radius: float
    seed: int | None

    @property
    def censoring_ok(self) -> bool:
        return self.censored <= 0.5 * (self.interval[1] - self.interval[0])

    def to_dict(self) -> dict:
        return {"value": self.value, "se": self.se, "interval": list(self.interval), "samples": self.samples,
                "hits": self.hits, "censored": self.censored, "horizon": self.horizon,
                "escape_radius": self.escape_radius, "censoring_ok": self.censoring_ok}


def hitting_mc(measure: Measure, target, samples: int = 100_000, horizon: int = 2000,
               seed=None, escape_radius: float | None = None) -> HittingEstimate:
    """Frequency of walks from ``e`` that visit ``target`` within ``horizon`` steps.

    Walks are tracked relative to the target, ``Y_n = target^-1 X_n``, and
    dropped as misses once ``|Y_n|`` exceeds ``escape_radius`` (default
    ``|target| + 40`` in word length).  ``seed`` may be an int or a
    ``numpy`` ``SeedSequence``.
    """
    group = measure.group
    target = group.element(target)
    dist0 = group.word_length(target)
    if escape_radius is None:
        escape_radius = dist0 + 40.0
    if target == group.identity():
        return HittingEstimate(target, 1.0, 0.0, (1.0, 1.0), samples, samples, 0.0, 0, escape_radius,
                               _seed_int(seed))
    if escape_radius <= dist0:
        raise ValueError("escape radius must exceed the distance to the target")
    rng = np.random.default_rng(seed)
    start = group.invert(target)
    paths = _start_paths(measure, samples, _path_capacity(measure, escape_radius), start)
    origin = group.identity()
    active = np.ones(samples, dtype=bool)
    hit = np.zeros(samples, dtype=bool)
    for _ in range(horizon):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        picks = rng.choice(len(measure.elements), size=rows.size, p=measure.probs)
        for j, g in enumerate(measure.elements):
            sel = rows[picks == j]
            if sel.size:
                paths.apply(sel, g)
        now = paths.equals(origin) & active
        hit |= now
        active &= ~now
        active &= paths.lengths() <= escape_radius
    k = int(hit.sum())
    p = k / samples
    return HittingEstimate(target, p, math.sqrt(max(p * (1 - p), 1.0 / samples) / samples), _wilson(k, samples),
                           samples, k, float(active.sum()) / samples, horizon, float(escape_radius),
                           _seed_int(seed))


def _seed_int(seed):
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.entropy) if isinstance(seed.entropy, int) else None
    return seed


def hitting_table_mc(measure: Measure, targets, samples: int = 100_000, horizon: int = 2000, seed: int = 0,
                     escape_radius: float | None = None) -> tuple:
    """MC hitting table over ``targets``; each target gets its own spawned RNG stream.

    Returns the table and the per-target :class:`HittingEstimate` objects.
    """
    group = measure.group
    targets = list(dict.fromkeys(group.element(t) for t in targets))
    streams = np.random.SeedSequence(seed).spawn(len(targets))
    ests = {}
    for t, ss in zip(targets, streams):
        est = hitting_mc(measure, t, samples, horizon, ss, escape_radius)
        if not est.censoring_ok:
            warnings.warn(f"censored fraction {est.censored:.3g} for target {group.format(t)} exceeds the CI "
                          "half-width; increase the horizon", RuntimeWarning, stacklevel=2)
        ests[t] = est
    table = HittingTable(group, {t: e.value for t, e in ests.items()}, "monte-carlo",
                         errors={t: e.se for t, e in ests.items()})
    return table, ests


def cocycle_targets(group: WordGroup) -> list:
    """Elements whose ``q`` enters ``c(a, xi_1)`` for all syllables ``a``, ``xi_1``."""
    out = []
    for a in range(1, group.n_atoms + 1):
        out.append((a,))
        for x in range(1, group.n_atoms + 1):
            if group.same_factor(a, x):
                out.append(group.compose((a,), (x,)))
    return [t for t in dict.fromkeys(out) if t != ()]


def sample_first_letters(measure: Measure, count: int, horizon: int, seed=None, settle_radius: float = 20.0):
    """First syllables of ``X_horizon`` for ``count`` walks from ``e``.

    Returns the atoms and the fraction of walks whose length reached
    ``settle_radius``, beyond which the first letter rarely changes again.
    """
    group = measure.group
    rng = np.random.default_rng(seed)
    per_step = max(len(x) for x in measure.elements)
    paths = WordPaths(group, count, per_step * horizon + 1)
    for _ in range(horizon):
        picks = rng.choice(len(measure.elements), size=count, p=measure.probs)
        for j, g in enumerate(measure.elements):
            rows = np.flatnonzero(picks == j)
            if rows.size:
                paths.apply(rows, g)
    return paths.first_atoms(), float(np.mean(paths.lengths() >= settle_radius))


@dataclass
class CocycleSample:
    """One draw ``(a, xi_1)`` with ``a ~ mu`` and ``xi_1`` from simulated limit rays."""

    a: tuple
    xi1: tuple
    value: float
    log_error: float = 0.0


@dataclass
class CocycleMC:
    """MC cocycle samples together with the table they were evaluated on.

    ``h`` is ``-sum_x nu_hat(x) sum_a mu(a) log c(a, x)`` with ``nu_hat`` the
    empirical first-letter law; ``h_se`` combines its sampling error with the
    propagated error of the simulated ``q`` values.
    """

    samples: list
    table: HittingTable
    estimates: dict
    first_letters: dict
    settled: float
    h: float
    h_se: float

    @property
    def log_values(self) -> np.ndarray:
        return np.log([s.value for s in self.samples])

    @property
    def log_error(self) -> float:
        """Largest propagated standard error of ``log c`` over the samples."""
        return max(s.log_error for s in self.samples)

    def to_dict(self) -> dict:
        fmt = self.table.group.format
        return {"count": len(self.samples), "settled": self.settled, "h": self.h, "h_se": self.h_se,
                "log_error": self.log_error, "first_letters": {fmt(x): v for x, v in self.first_letters.items()},
                "hitting": self.table.to_dict(),
                "hitting_diagnostics": {fmt(t): e.to_dict() for t, e in self.estimates.items()}}


def _pair_terms(group, a, x1):
    if group.same_factor(a[0], x1[0]):
        return group.compose(a, x1), x1
    return a, ()


def _rb_entropy(measure, group, letters, weights, qfun):
    """``-sum_x w(x) sum_a mu(a) log(q(num) / q(den))`` for the given ``q`` lookup."""
    terms = []
    for x, w in zip(letters, weights):
        for a, p in measure.support:
            num, den = _pair_terms(group, a, x)
            terms.append(-w * p * (math.log(qfun(num)) - math.log(qfun(den))))
    return math.fsum(terms)


def cocycle_mc(measure: Measure, count: int = 2000, samples: int = 100_000, horizon: int = 2000,
               seed: int = 0, escape_radius: float | None = None, ray_steps: int = 400,
               extra_targets=()) -> CocycleMC:
    """Sample ``c(a, xi_1)`` with every needed ``q`` estimated by simulation.

    The values ``q(a xi_1)`` are simulated directly rather than derived from
    multiplicativity.  First letters ``xi_1`` come from ``count`` walks of
    ``ray_steps`` steps and ``a`` is drawn from ``mu``.  ``extra_targets``
    adds elements to the simulated table (e.g. for cut-point checks).
    """
    group = measure.group
    if not isinstance(group, WordGroup):
        raise ValueError("cocycle sampling needs a free product of cyclic groups")
    _atom_masses(measure)
    ss_q, ss_ray, ss_a = np.random.SeedSequence(seed).spawn(3)
    targets = cocycle_targets(group) + [group.element(t) for t in extra_targets]
    table, ests = hitting_table_mc(measure, targets, samples, horizon,
                                   int(ss_q.generate_state(1)[0]), escape_radius)
    xi, settled = sample_first_letters(measure, count, ray_steps, ss_ray)
    xi = xi[xi > 0]
    if xi.size < 2:
        raise RuntimeError("too few walks left the identity; increase ray_steps")
    rng = np.random.default_rng(ss_a)
    picks = rng.choice(len(measure.elements), size=xi.size, p=measure.probs)
    out = []
    for j, x in zip(picks, xi):
        a, x1 = measure.elements[j], (int(x),)
        num, den = _pair_terms(group, a, x1)
        val = table.q(num) / table.q(den)
        out.append(CocycleSample(a, x1, val, math.hypot(_rel(table, num), _rel(table, den))))

    letters, counts = np.unique(xi, return_counts=True)
    letters = [(int(x),) for x in letters]
    nu_hat = counts / counts.sum()
    h = _rb_entropy(measure, group, letters, nu_hat, table.q)
    # sampling error of nu_hat, through the per-letter conditional entropies
    g = np.array([_rb_entropy(measure, group, [x], [1.0], table.q) for x in letters])
    per_sample = g[np.searchsorted([x[0] for x in letters], xi)]
    se_nu = float(per_sample.std(ddof=1) / math.sqrt(xi.size))
    # propagated error of the simulated q values, one independent stream each
    grads = []
    for t, se in table.errors.items():
        bumped = dict(table.entries)
        bumped[t] = table.entries[t] + se
        qb = HittingTable(group, bumped, "monte-carlo").q
        grads.append(_rb_entropy(measure, group, letters, nu_hat, qb) - h)
    se_q = math.sqrt(math.fsum(d * d for d in grads))
    return CocycleMC(out, table, ests, dict(zip(letters, nu_hat.tolist())), settled, h, math.hypot(se_nu, se_q))


def _rel(table, x):
    return table.error(x) / table.q(x) if x != () else 0.0


# -- equality case ------------------------------------------------------------


@dataclass
class DetectorResult:
    """Outcome of the two-value test on ``log c`` samples."""

    two_valued: bool
    alpha: float
    outlier_fraction: float
    max_deviation: float
    tol: float
    count: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def equality_detector(samples, tol: float = DETECTOR_TOL) -> DetectorResult:
    """Test whether ``log c`` takes only the two values ``+-alpha``.

    The best single ``alpha`` for the max deviation of ``|log c|`` is the
    midpoint of its range.  Samples farther than ``tol`` from ``alpha`` count
    as outliers, and the cocycle is declared two-valued iff there are none.

    Raises
    ------
    ValueError
        With fewer than 100 samples.
    """
    x = np.abs(np.asarray(samples, dtype=float))
    if x.size < MIN_DETECTOR_SAMPLES:
        raise ValueError(f"need at least {MIN_DETECTOR_SAMPLES} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    lo, hi = float(x.min()), float(x.max())
    alpha = 0.5 * (lo + hi)
    dev = 0.5 * (hi - lo)
    out = float(np.mean(np.abs(x - alpha) > tol))
    return DetectorResult(dev <= tol, alpha, out, dev, tol, int(x.size))


def exact_cocycle_samples(table: HittingTable, measure: Measure, nu: dict | None = None) -> tuple:
    """All pairs ``(a, xi_1)`` of positive weight, their ``log c`` and weights."""
    nu = first_letter_law(table) if nu is None else nu
    logs, weights = [], []
    for a, p in measure.support:
        for x, w in nu.items():
            if w > 0:
                logs.append(math.log(rn_cocycle(table, a, x)))
                weights.append(p * w)
    return np.array(logs), np.array(weights)


def cutpoint_check(table: HittingTable, u, v) -> dict:
    """``q(uv) - q(u) q(v)`` for a reduced concatenation ``uv``.

    Returns the slack and its standard error (zero for exact tables).
    """
    group = table.group
    u, v = group.element(u), group.element(v)
    uv = group.compose(u, v)
    if uv != u + v or (u and v and group._mul[u[-1]][v[0]] != APPEND):
        raise ValueError(f"{group.format(u)} * {group.format(v)} is not a reduced concatenation")
    qu, qv, quv = table.q(u), table.q(v), table.q(uv)
    err = math.sqrt(table.error(uv) ** 2 + (qv * table.error(u)) ** 2 + (qu * table.error(v)) ** 2)
    return {"slack": quv - qu * qv, "error": err}
