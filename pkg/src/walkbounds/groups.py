"""Finitely generated groups with solvable normal forms.

Supported families: free groups, cyclic groups (finite or infinite), free
products of cyclic groups, free abelian groups and direct products of any of
these.  Elements are hashable canonical forms:

* word groups (free, cyclic, free products): a tuple of positive *atom* ids,
  one atom per syllable ``x^k`` of a finite factor and one atom per letter
  ``a^{+1}`` / ``a^{-1}`` of an infinite factor.  The tuple is reduced.
* free abelian groups: a tuple of integers.
* direct products: a tuple of component elements.
"""
from __future__ import annotations

import itertools
import math
import re
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

APPEND = -1  # atom product table marker: no merge, the atoms stay adjacent


class Group:
    """Common interface.  Subclasses provide the normal-form arithmetic."""

    #: symmetric generating set, as canonical elements
    generators: tuple

    def identity(self):
        raise NotImplementedError

    def compose(self, x, y):
        raise NotImplementedError

    def invert(self, x):
        raise NotImplementedError

    def word_length(self, x) -> float:
        raise NotImplementedError

    def check_element(self, x):
        raise NotImplementedError

    def parse(self, text):
        raise NotImplementedError

    def format(self, x) -> str:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError

    @property
    def unit_weights(self) -> bool:
        return True

    @property
    def is_tree(self) -> bool:
        return False

    @property
    def is_bipartite(self) -> bool:
        return False

    @property
    def is_finite(self) -> bool:
        return False

    def element(self, x):
        """Coerce ``x`` (a string or an already canonical form) to an element."""
        if isinstance(x, str):
            return self.parse(x)
        self.check_element(x)
        return x

    def codec(self):
        """Integer id codec used by the convolution and sampling engines."""
        from .codecs import TableCodec

        return TableCodec(self)

    def __repr__(self):
        return f"{type(self).__name__}({self.to_config()})"


# ---------------------------------------------------------------------------
# word groups


@dataclass(frozen=True)
class _Factor:
    label: str
    order: int | None  # None for an infinite cyclic factor
    weight: float = 1.0


class WordGroup(Group):
    """Free product of cyclic groups, elements are reduced words.

    The generating set is ``{x, x^-1}`` for every factor generator ``x``
    (a single element when ``x`` has order 2).  Word length is the sum over
    syllables ``x^k`` of ``weight(x) * min(k, m - k)`` for a factor of order
    ``m`` and ``weight(x) * |k|`` for an infinite factor.
    """

    def __init__(self, factors: Sequence[_Factor]):
        if not factors:
            raise ValueError("a word group needs at least one factor")
        labels = [f.label for f in factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate generator labels: {labels}")
        for f in factors:
            if f.order is not None and f.order < 2:
                raise ValueError(f"cyclic factor {f.label!r} must have order >= 2 or be infinite")
            if not (np.isfinite(f.weight) and f.weight > 0):
                raise ValueError(f"weight of {f.label!r} must be positive and finite, got {f.weight}")
        self.factors = tuple(factors)

        # atom tables; atom 0 is reserved for "no letter"
        atom_factor = [-1]
        atom_exp = [0]
        atom_len = [0.0]
        for i, f in enumerate(self.factors):
            exps = (1, -1) if f.order is None else range(1, f.order)
            for k in exps:
                atom_factor.append(i)
                atom_exp.append(k)
                n = abs(k) if f.order is None else min(k, f.order - k)
                atom_len.append(f.weight * n)
        self.n_atoms = len(atom_factor) - 1
        self._atom_factor = atom_factor
        self._atom_exp = atom_exp
        self._atom_len = atom_len
        self._atom_of = {(atom_factor[a], atom_exp[a]): a for a in range(1, self.n_atoms + 1)}

        inv = [0] * (self.n_atoms + 1)
        mul = [[APPEND] * (self.n_atoms + 1) for _ in range(self.n_atoms + 1)]
        for a in range(1, self.n_atoms + 1):
            fa, ka = atom_factor[a], atom_exp[a]
            order = self.factors[fa].order
            inv[a] = self._atom_of[(fa, -ka if order is None else (-ka) % order)]
            for b in range(1, self.n_atoms + 1):
                if atom_factor[b] != fa:
                    continue
                kb = atom_exp[b]
                if order is None:
                    mul[a][b] = 0 if ka == -kb else APPEND
                else:
                    s = (ka + kb) % order
                    mul[a][b] = 0 if s == 0 else self._atom_of[(fa, s)]
        self._inv = inv
        self._mul = mul
        self.generators = tuple(
            (a,) for a in range(1, self.n_atoms + 1) if self._is_generator_atom(a)
        )
        self._labels_by_length = sorted(labels, key=len, reverse=True)
        self._label_index = {f.label: i for i, f in enumerate(self.factors)}

    def _is_generator_atom(self, a):
        order = self.factors[self._atom_factor[a]].order
        k = self._atom_exp[a]
        return order is None or k in (1, order - 1)

    # -- arithmetic ---------------------------------------------------------

    def identity(self):
        return ()

    def compose(self, x, y):
        i, j = len(x), 0
        fac, mul = self._atom_factor, self._mul
        while i > 0 and j < len(y) and fac[x[i - 1]] == fac[y[j]]:
            r = mul[x[i - 1]][y[j]]
            if r == APPEND:
                break
            if r == 0:
                i -= 1
                j += 1
                continue
            return x[: i - 1] + (r,) + y[j + 1 :]
        return x[:i] + y[j:]

    def invert(self, x):
        inv = self._inv
        return tuple(inv[a] for a in reversed(x))

    def word_length(self, x) -> float:
        lens = self._atom_len
        return float(sum(lens[a] for a in x))

    def power(self, x, k: int):
        out = self.identity()
        base = x if k >= 0 else self.invert(x)
        for _ in range(abs(k)):
            out = self.compose(out, base)
        return out

    def check_element(self, x):
        if not isinstance(x, tuple):
            raise ValueError(f"word elements are tuples of atom ids, got {type(x).__name__}")
        fac, mul = self._atom_factor, self._mul
        for pos, a in enumerate(x):
            if not (isinstance(a, (int, np.integer)) and 1 <= a <= self.n_atoms):
                raise ValueError(f"unknown atom {a!r} at position {pos}")
            if pos and fac[x[pos - 1]] == fac[a] and mul[x[pos - 1]][a] != APPEND:
                raise ValueError(f"word {x!r} is not reduced at position {pos}")

    # -- structure ----------------------------------------------------------

    def atom_factor(self, a) -> int:
        return self._atom_factor[a]

    def same_factor(self, a, b) -> bool:
        return self._atom_factor[a] == self._atom_factor[b]

    @property
    def unit_weights(self) -> bool:
        return all(f.weight == 1.0 for f in self.factors)

    @property
    def is_tree(self) -> bool:
        return all(f.order in (None, 2) for f in self.factors)

    @property
    def is_bipartite(self) -> bool:
        return all(f.order is None or f.order % 2 == 0 for f in self.factors)

    @property
    def is_finite(self) -> bool:
        return len(self.factors) == 1 and self.factors[0].order is not None

    def elements(self):
        """All elements of a finite cyclic group."""
        if not self.is_finite:
            raise ValueError("only finite groups can be enumerated")
        return [()] + [(a,) for a in range(1, self.n_atoms + 1)]

    def codec(self):
        from .codecs import WordCodec

        return WordCodec(self)

    # -- text ---------------------------------------------------------------

    def parse(self, text: str):
        text = text.strip()
        if text in ("", "e", "1"):
            return self.identity()
        out = self.identity()
        pos = 0
        pattern = re.compile(
            r"\s*(" + "|".join(re.escape(lab) for lab in self._labels_by_length) + r")(?:\^\(?(-?\d+)\)?)?\s*"
        )
        while pos < len(text):
            m = pattern.match(text, pos)
            if m is None or m.end() == pos:
                raise ValueError(f"cannot parse {text!r} at position {pos}: unknown generator symbol")
            i = self._label_index[m.group(1)]
            k = int(m.group(2)) if m.group(2) is not None else 1
            out = self.compose(out, self._factor_power(i, k))
            pos = m.end()
        return out

    def _factor_power(self, i, k):
        order = self.factors[i].order
        if order is None:
            if k == 0:
                return ()
            return (self._atom_of[(i, 1 if k > 0 else -1)],) * abs(k)
        k %= order
        return () if k == 0 else (self._atom_of[(i, k)],)

    def format(self, x) -> str:
        if not x:
            return "e"
        parts = []
        for a in x:
            f = self.factors[self._atom_factor[a]]
            k = self._atom_exp[a]
            parts.append(f.label if k == 1 else f"{f.label}^{k}")
        return " ".join(parts)

    def to_config(self) -> dict:
        return {
            "type": "free_product",
            "factors": [
                {"label": f.label, "order": f.order if f.order is not None else "inf", "weight": f.weight}
                for f in self.factors
            ],
        }


class FreeGroup(WordGroup):
    """Free group on ``rank`` generators, optionally with per-generator weights."""

    def __init__(self, rank: int, labels: Sequence[str] | None = None, weights: dict | None = None):
        if not (isinstance(rank, (int, np.integer)) and rank >= 1):
            raise ValueError(f"free group rank must be a positive integer, got {rank!r}")
        labels = list(labels) if labels is not None else _default_labels(rank)
        if len(labels) != rank:
            raise ValueError(f"expected {rank} labels, got {len(labels)}")
        weights = dict(weights or {})
        unknown = set(weights) - set(labels)
        if unknown:
            raise ValueError(f"weights given for unknown generators {sorted(unknown)}")
        super().__init__([_Factor(lab, None, float(weights.get(lab, 1.0))) for lab in labels])
        self.rank = rank

    def to_config(self) -> dict:
        cfg = {"type": "free", "rank": self.rank, "labels": [f.label for f in self.factors]}
        if not self.unit_weights:
            cfg["weights"] = {f.label: f.weight for f in self.factors}
        return cfg


class CyclicGroup(WordGroup):
    """Cyclic group of the given order (``None`` or ``inf`` for the integers)."""

    def __init__(self, order=None, label: str = "b", weight: float = 1.0):
        order = _parse_order(order)
        super().__init__([_Factor(label, order, float(weight))])
        self.order = order

    def to_config(self) -> dict:
        return {"type": "cyclic", "order": self.order if self.order is not None else "inf",
                "label": self.factors[0].label, "weight": self.factors[0].weight}


class FreeProduct(WordGroup):
    """Free product of at least two nontrivial cyclic groups."""

    def __init__(self, factors: Sequence[CyclicGroup]):
        factors = list(factors)
        if len(factors) < 2:
            raise ValueError("a free product needs at least 2 factors")
        for f in factors:
            if not isinstance(f, CyclicGroup):
                raise ValueError("free product factors must be cyclic groups")
        super().__init__([f.factors[0] for f in factors])


def _parse_order(order):
    if order is None or (isinstance(order, str) and order.lower() in ("inf", "infinity", "oo")):
        return None
    if isinstance(order, float) and math.isinf(order):
        return None
    order = int(order)
    if order < 2:
        raise ValueError(f"cyclic order must be >= 2 or infinite, got {order}")
    return order


def _default_labels(n):
    if n <= 26:
        return [chr(ord("a") + i) for i in range(n)]
    return [f"a{i + 1}" for i in range(n)]


# ---------------------------------------------------------------------------
# free abelian groups


class FreeAbelianGroup(Group):
    """``Z^rank`` with the standard generators and the l1 word length."""

    def __init__(self, rank: int, labels: Sequence[str] | None = None):
        if not (isinstance(rank, (int, np.integer)) and rank >= 1):
            raise ValueError(f"free abelian rank must be a positive integer, got {rank!r}")
        self.rank = int(rank)
        self.labels = list(labels) if labels is not None else [f"x{i + 1}" for i in range(rank)]
        if len(self.labels) != rank:
            raise ValueError(f"expected {rank} labels, got {len(self.labels)}")
        gens = []
        for i in range(rank):
            for s in (1, -1):
                v = [0] * rank
                v[i] = s
                gens.append(tuple(v))
        self.generators = tuple(gens)
        self._labels_by_length = sorted(self.labels, key=len, reverse=True)

    def identity(self):
        return (0,) * self.rank

    def compose(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def invert(self, x):
        return tuple(-a for a in x)

    def word_length(self, x) -> float:
        return float(sum(abs(a) for a in x))

    def check_element(self, x):
        if not (isinstance(x, tuple) and len(x) == self.rank
                and all(isinstance(a, (int, np.integer)) for a in x)):
            raise ValueError(f"expected a tuple of {self.rank} integers, got {x!r}")

    def element(self, x):
        if isinstance(x, list):
            x = tuple(x)
        return super().element(x)

    @property
    def is_bipartite(self) -> bool:
        return True

    def codec(self):
        from .codecs import AbelianCodec

        return AbelianCodec(self)

    def parse(self, text: str):
        text = text.strip()
        if text in ("", "e", "0"):
            return self.identity()
        if text.startswith("("):
            vals = [int(v) for v in text.strip("()").split(",") if v.strip()]
            return self.element(tuple(vals))
        pattern = re.compile(
            r"\s*(" + "|".join(re.escape(lab) for lab in self._labels_by_length) + r")(?:\^\(?(-?\d+)\)?)?\s*"
        )
        out = [0] * self.rank
        pos = 0
        while pos < len(text):
            m = pattern.match(text, pos)
            if m is None or m.end() == pos:
                raise ValueError(f"cannot parse {text!r} at position {pos}: unknown generator symbol")
            out[self.labels.index(m.group(1))] += int(m.group(2)) if m.group(2) else 1
            pos = m.end()
        return tuple(out)

    def format(self, x) -> str:
        return "(" + ",".join(str(a) for a in x) + ")"

    def to_config(self) -> dict:
        return {"type": "free_abelian", "rank": self.rank, "labels": self.labels}


# ---------------------------------------------------------------------------
# direct products


class DirectProduct(Group):
    """Direct product of groups.

    ``convention="union"`` uses the generators of one coordinate at a time,
    and word length is the sum of component lengths.  ``"synchronized"``
    moves every coordinate at each step: finite components step through all
    of their elements (identity included) and infinite components through
    their generators; these must be bipartite word or abelian groups.
    """

    def __init__(self, components: Sequence[Group], convention: str = "union"):
        components = list(components)
        if len(components) < 2:
            raise ValueError("a direct product needs at least 2 components")
        if convention not in ("union", "synchronized"):
            raise ValueError(f"unknown direct product convention {convention!r}")
        self.components = tuple(components)
        self.convention = convention
        if convention == "union":
            gens = []
            for i, comp in enumerate(components):
                for g in comp.generators:
                    gens.append(tuple(g if j == i else c.identity() for j, c in enumerate(components)))
        else:
            steps = []
            for comp in components:
                if isinstance(comp, DirectProduct):
                    raise ValueError("nested products are not supported with synchronized generators")
                if comp.is_finite:
                    steps.append(comp.elements())
                elif comp.is_bipartite:
                    steps.append(list(comp.generators))
                else:
                    raise ValueError(
                        "synchronized generators need each infinite component to have a bipartite Cayley graph"
                    )
            gens = [tuple(s) for s in itertools.product(*steps)]
            gens = [g for g in gens if g != self.identity()]
        self.generators = tuple(gens)

    def identity(self):
        return tuple(c.identity() for c in self.components)

    def compose(self, x, y):
        return tuple(c.compose(a, b) for c, a, b in zip(self.components, x, y))

    def invert(self, x):
        return tuple(c.invert(a) for c, a in zip(self.components, x))

    def word_length(self, x) -> float:
        lens = [c.word_length(a) for c, a in zip(self.components, x)]
        if self.convention == "union":
            return float(sum(lens))
        steps = 0
        parity = None
        nontrivial_finite = False
        for c, a, n in zip(self.components, x, lens):
            if c.is_finite:
                nontrivial_finite |= a != c.identity()
                continue
            n = int(round(n))
            if parity is not None and n % 2 != parity:
                raise ValueError(f"{x!r} is not in the subgroup generated by the synchronized generators")
            parity = n % 2
            steps = max(steps, n)
        if steps == 0 and nontrivial_finite:
            steps = 2 if parity is not None else 1
        return float(steps)

    def check_element(self, x):
        if not (isinstance(x, tuple) and len(x) == len(self.components)):
            raise ValueError(f"expected a tuple of {len(self.components)} components, got {x!r}")
        for c, a in zip(self.components, x):
            c.check_element(a)

    def element(self, x):
        if isinstance(x, str):
            return self.parse(x)
        if not (isinstance(x, (list, tuple)) and len(x) == len(self.components)):
            raise ValueError(f"expected {len(self.components)} components, got {x!r}")
        return tuple(c.element(a) for c, a in zip(self.components, x))

    @property
    def unit_weights(self) -> bool:
        return all(c.unit_weights for c in self.components)

    @property
    def is_bipartite(self) -> bool:
        return self.convention == "union" and all(c.is_bipartite for c in self.components)

    def parse(self, text: str):
        text = text.strip()
        if text in ("", "e"):
            return self.identity()
        parts = text.split("|")
        if len(parts) != len(self.components):
            raise ValueError(f"expected {len(self.components)} components separated by '|', got {text!r}")
        return tuple(c.parse(p) for c, p in zip(self.components, parts))

    def format(self, x) -> str:
        return " | ".join(c.format(a) for c, a in zip(self.components, x))

    def to_config(self) -> dict:
        return {"type": "direct_product", "convention": self.convention,
                "components": [c.to_config() for c in self.components]}


# ---------------------------------------------------------------------------
# construction from config documents


def group_from_config(cfg: dict) -> Group:
    """Build a group from its config block (see ``schema/config.schema.json``)."""
    kind = cfg.get("type")
    if kind == "free":
        return FreeGroup(int(cfg["rank"]), cfg.get("labels"), cfg.get("weights"))
    if kind == "cyclic":
        return CyclicGroup(cfg.get("order"), cfg.get("label", "b"), float(cfg.get("weight", 1.0)))
    if kind == "free_product":
        factors = []
        for f in cfg["factors"]:
            factors.append(CyclicGroup(f.get("order"), f["label"], float(f.get("weight", 1.0))))
        return FreeProduct(factors)
    if kind == "free_abelian":
        return FreeAbelianGroup(int(cfg["rank"]), cfg.get("labels"))
    if kind == "direct_product":
        return DirectProduct([group_from_config(c) for c in cfg["components"]],
                             cfg.get("convention", "union"))
    raise ValueError(f"unknown group type {kind!r}")


# ---------------------------------------------------------------------------
# module-level operations


def compose_and_reduce(group: Group, x, y):
    """Canonical form of ``x * y``."""
    return group.compose(group.element(x), group.element(y))


def invert(group: Group, x):
    """Canonical form of ``x^-1``."""
    return group.invert(group.element(x))


def word_length(group: Group, x) -> float:
    """Distance from the identity in the (possibly weighted) word metric."""
    return group.word_length(group.element(x))


@dataclass
class BallCensus:
    """Sphere and ball cardinalities around the identity."""

    radius: int
    sphere_sizes: list
    ball_sizes: list
    truncated: bool = False

    def to_dict(self):
        return {"radius": self.radius, "sphere_sizes": list(self.sphere_sizes),
                "ball_sizes": list(self.ball_sizes), "truncated": self.truncated}


def ball_census(group: Group, radius: int, max_elements: int = 20_000_000) -> BallCensus:
    """Exact sphere sizes by breadth-first search over canonical forms.

    Requires unit weights.  If the ball would exceed ``max_elements`` the
    census stops at the last complete radius and is flagged ``truncated``.
    """
    if not group.unit_weights:
        raise ValueError("ball census needs unit generator weights (integer radii)")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    codec = group.codec()
    if getattr(codec, "max_letters", radius) < radius:
        from .codecs import TableCodec

        codec = TableCodec(group)
    frontier = codec.encode([group.identity()])
    visited = frontier.copy()
    spheres = [1]
    truncated = False
    for _ in range(radius):
        cand = np.unique(np.concatenate([codec.right_mul(frontier, g) for g in group.generators]))
        new = cand[~np.isin(cand, visited, assume_unique=True)]
        if visited.size + new.size > max_elements:
            truncated = True
            break
        frontier = new
        visited = np.union1d(visited, new)
        spheres.append(int(new.size))
    balls = list(itertools.accumulate(spheres))
    return BallCensus(len(spheres) - 1, spheres, balls, truncated)


@dataclass
class GrowthEstimate:
    v_cesaro: float
    v_ratio: float
    depth: int
    subexponential: bool

    def to_dict(self):
        return dict(self.__dict__)


def growth_estimate(census: BallCensus) -> GrowthEstimate:
    """Volume growth estimates from a census.

    ``v_cesaro`` is ``log #B(n) / n`` at the deepest radius; ``v_ratio`` the
    mean of ``log(#S(k) / #S(k-1))`` over the last ``ceil(n/2)`` radii.  The
    subexponential flag is raised when a power law fits the tail of the
    sphere sizes better than an exponential.
    """
    n = census.radius
    if n < 2:
        raise ValueError("growth estimate needs a census with at least 3 radii")
    s = np.asarray(census.sphere_sizes, dtype=float)
    b = np.asarray(census.ball_sizes, dtype=float)
    v_cesaro = math.log(b[n]) / n
    m = math.ceil(n / 2)
    ks = np.arange(n - m + 1, n + 1)
    v_ratio = float(np.mean(np.log(s[ks] / s[ks - 1])))

    logs = np.log(s[ks])
    rss_exp = _rss(ks.astype(float), logs)
    rss_pow = _rss(np.log(ks.astype(float)), logs)
    subexp = v_ratio < 1e-12 or rss_pow < rss_exp
    return GrowthEstimate(float(v_cesaro), v_ratio, n, bool(subexp))


def exact_growth_rate(group: Group) -> float | None:
    """Exponential growth rate ``v`` where a closed form is available, else ``None``.

    For a free product the growth series obey ``1/f = sum_i 1/f_i - (k - 1)``
    with ``f_i(z) = 1 + sum z^{|x|}`` over the nontrivial syllables of a
    finite factor and ``(1 + z^w) / (1 - z^w)`` for an infinite factor of
    weight ``w``.  ``v = -log z*`` with ``z*`` the first zero of the right
    side in ``(0, 1)``.  Free abelian groups have ``v = 0``.
    """
    if isinstance(group, FreeAbelianGroup):
        return 0.0
    if not isinstance(group, WordGroup):
        return None
    k = len(group.factors)
    if k == 1 or [f.order for f in group.factors] == [2, 2]:
        return 0.0

    def recip(z):
        total = -(k - 1.0)
        for i, f in enumerate(group.factors):
            if f.order is None:
                zw = z**f.weight
                total += (1 - zw) / (1 + zw)
            else:
                lens = [group._atom_len[a] for a in range(1, group.n_atoms + 1) if group._atom_factor[a] == i]
                total += 1.0 / (1.0 + sum(z**x for x in lens))
        return total

    # recip decreases from 1 at z = 0; bracket its first sign change on a grid
    grid = np.linspace(0.0, 1.0, 4097)[1:]
    vals = np.array([recip(z) for z in grid])
    idx = np.flatnonzero(vals <= 0)
    if idx.size == 0:
        return 0.0
    hi = grid[idx[0]]
    lo = grid[idx[0] - 1] if idx[0] > 0 else 0.0
    z = brentq(recip, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(-math.log(z))


def _rss(x, y):
    a = np.vstack([x, np.ones_like(x)]).T
    _, res, *_ = np.linalg.lstsq(a, y, rcond=None)
    if res.size:
        return float(res[0])
    fit = a @ np.linalg.lstsq(a, y, rcond=None)[0]
    return float(np.sum((y - fit) ** 2))
