"""Monte Carlo simulation of many independent walks in lockstep."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codecs import AbelianCodec, TableCodec, WordCodec, codec_for
from .groups import APPEND, FreeAbelianGroup, WordGroup
from .walk import Measure, iter_laws


class WordPaths:
    """Reduced words of many walks, stored as rows of an atom matrix."""

    def __init__(self, group: WordGroup, count: int, capacity: int):
        self.group = group
        dtype = np.int16 if group.n_atoms < 2**15 else np.int32
        self.words = np.zeros((count, capacity + 1), dtype=dtype)
        self.n = np.zeros(count, dtype=np.int64)
        self.length = np.zeros(count)
        self._mul = np.array(group._mul, dtype=np.int64)
        self._mul[0, :] = APPEND
        self._alen = np.array(group._atom_len)

    @property
    def count(self):
        return self.n.size

    def apply(self, rows, element):
        """Right-multiply the walks in ``rows`` by ``element``."""
        for a in element:
            n = self.n[rows]
            last = np.where(n > 0, self.words[rows, np.maximum(n - 1, 0)], 0)
            r = self._mul[last, a]
            app = r == APPEND
            can = r == 0
            mer = ~(app | can)
            if app.any():
                ra, na = rows[app], n[app]
                if na.max() >= self.words.shape[1] - 1:
                    raise RuntimeError("path capacity exceeded")
                self.words[ra, na] = a
                self.n[ra] += 1
                self.length[ra] += self._alen[a]
            if can.any():
                rc, nc = rows[can], n[can]
                self.words[rc, nc - 1] = 0
                self.n[rc] -= 1
                self.length[rc] -= self._alen[last[can]]
            if mer.any():
                rm, nm = rows[mer], n[mer]
                self.words[rm, nm - 1] = r[mer]
                self.length[rm] += self._alen[r[mer]] - self._alen[last[mer]]

    def lengths(self):
        return self.length.copy()

    def equals(self, element):
        w = np.asarray(element, dtype=self.words.dtype)
        hit = self.n == w.size
        if w.size:
            hit &= np.all(self.words[:, : w.size] == w, axis=1)
        return hit

    def first_atoms(self):
        return np.where(self.n > 0, self.words[:, 0], 0).astype(np.int64)

    def codes(self, codec: WordCodec):
        base = np.int64(codec.base)
        out = np.zeros(self.count, dtype=np.int64)
        for j in range(int(self.n.max(initial=0))):
            live = self.n > j
            out = np.where(live, out * base + self.words[:, j], out)
        return out


class AbelianPaths:
    def __init__(self, group: FreeAbelianGroup, count: int):
        self.group = group
        self.x = np.zeros((count, group.rank), dtype=np.int64)

    @property
    def count(self):
        return self.x.shape[0]

    def apply(self, rows, element):
        self.x[rows] += np.asarray(element, dtype=np.int64)

    def lengths(self):
        return np.abs(self.x).sum(axis=1).astype(float)

    def equals(self, element):
        return np.all(self.x == np.asarray(element, dtype=np.int64), axis=1)

    def codes(self, codec: AbelianCodec):
        return codec._pack(self.x)


class TablePaths:
    def __init__(self, group, count: int, codec: TableCodec | None = None):
        self.group = group
        self.codec = codec or TableCodec(group)
        self.c = np.full(count, self.codec.identity, dtype=np.int64)

    @property
    def count(self):
        return self.c.size

    def apply(self, rows, element):
        self.c[rows] = self.codec.right_mul(self.c[rows], element)

    def lengths(self):
        return self.codec.lengths(self.c)

    def equals(self, element):
        return self.c == self.codec.encode([element])[0]

    def codes(self, codec):
        if codec is self.codec:
            return self.c.copy()
        return codec.encode(self.codec.decode(self.c))


def make_paths(measure: Measure, count: int, steps: int, codec=None):
    """Path state suited to the group: word stacks, coordinates or a table."""
    group = measure.group
    if isinstance(codec, TableCodec):
        return TablePaths(group, count, codec)
    if isinstance(group, WordGroup):
        per_step = max(len(x) for x in measure.elements)
        return WordPaths(group, count, max(per_step * steps, 1))
    if isinstance(group, FreeAbelianGroup):
        return AbelianPaths(group, count)
    return TablePaths(group, count)


def step_all(paths, measure: Measure, rng: np.random.Generator):
    """Advance every walk by one increment drawn from ``measure``."""
    picks = rng.choice(len(measure.elements), size=paths.count, p=measure.probs)
    for j, g in enumerate(measure.elements):
        rows = np.flatnonzero(picks == j)
        if rows.size:
            paths.apply(rows, g)


@dataclass
class MCResult:
    """Monte Carlo estimates with standard errors.

    Attributes
    ----------
    n, count, seed : int
        Path length, number of paths and RNG seed.
    ell, ell_se : float
        Mean and standard error of ``|X_n| / n``.
    entropy : dict
        ``k -> (mean, se)`` of ``-log mu^{*k}(X_k) / k`` for ``k <= k0``.
    trajectories : ndarray or None
        ``|X_t|`` for every path and ``t = 0..n`` when requested.
    """

    n: int
    count: int
    seed: int
    ell: float
    ell_se: float
    entropy: dict = field(default_factory=dict)
    trajectories: np.ndarray | None = None

    def to_dict(self):
        return {
            "n": self.n, "count": self.count, "seed": self.seed,
            "ell": self.ell, "ell_se": self.ell_se,
            "entropy": {str(k): {"mean": m, "se": s} for k, (m, s) in self.entropy.items()},
        }


def _mean_se(x):
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), float("inf")
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def sample_paths(measure: Measure, n: int, count: int, seed: int, k0: int = 0,
                 trajectories: bool = False, max_support: int = 2_000_000) -> MCResult:
    """Simulate ``count`` independent walks of ``n`` steps.

    All randomness comes from one ``numpy`` generator seeded with ``seed``,
    so results are reproducible.  For ``1 <= k <= k0`` the exact law
    ``mu^{*k}`` is convolved once and ``-log mu^{*k}(X_k) / k`` is averaged
    over the sampled ``X_k``.
    """
    if count < 1 or n < 1:
        raise ValueError("count and n must be positive")
    rng = np.random.default_rng(seed)
    k0 = min(k0, n)
    laws = {}
    law_codec = None
    if k0 > 0:
        law_codec = codec_for(measure.group, measure.elements, k0)
        for law in iter_laws(measure, k0, max_support=max_support, codec=law_codec):
            if law.step:
                laws[law.step] = law
    paths = make_paths(measure, count, n, law_codec if isinstance(law_codec, TableCodec) else None)
    traj = np.zeros((count, n + 1)) if trajectories else None
    ent = {}
    for t in range(1, n + 1):
        step_all(paths, measure, rng)
        if traj is not None:
            traj[:, t] = paths.lengths()
        if t in laws:
            p = laws[t]._lookup(paths.codes(law_codec))
            ent[t] = _mean_se(-np.log(p) / t)
    ell, se = _mean_se(paths.lengths() / n)
    return MCResult(n, count, seed, ell, se, ent, traj)

