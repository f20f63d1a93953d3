"""Integer ids for group elements.

Every codec maps canonical elements to ``int64`` ids and implements left and
right multiplication by a fixed element on whole id arrays.  Word groups and
free abelian groups use positional encodings so multiplication is pure
numpy; anything else goes through :class:`TableCodec`, which interns
elements and memoizes products.
"""
from __future__ import annotations

import math

import numpy as np

from .groups import APPEND, FreeAbelianGroup, Group, WordGroup

_INT64_MAX = np.iinfo(np.int64).max


class CapacityError(RuntimeError):
    """An element does not fit in the codec's integer range."""


class WordCodec:
    """Reduced words as base-``(n_atoms + 1)`` integers, last letter lowest.

    Digit 0 never occurs inside a word, so the code of the empty word is 0
    and the number of digits is the number of letters.
    """

    def __init__(self, group: WordGroup):
        self.group = group
        self.base = group.n_atoms + 1
        self.max_letters = int(math.floor(math.log(_INT64_MAX) / math.log(self.base))) - 1
        self.powers = np.array([self.base**k for k in range(self.max_letters + 1)], dtype=np.int64)
        self._factor = np.array(group._atom_factor, dtype=np.int64)
        self._mul = np.array(group._mul, dtype=np.int64)
        self._mul[0, :] = APPEND
        self._mul[:, 0] = APPEND
        self._inv = np.array(group._inv, dtype=np.int64)
        self._len = np.array(group._atom_len, dtype=float)
        self.identity = np.int64(0)

    def fits(self, elements, steps: int) -> bool:
        """Whether every product of ``steps`` of ``elements`` is encodable."""
        return steps * max((len(w) for w in elements), default=0) <= self.max_letters

    def encode(self, elements) -> np.ndarray:
        out = np.empty(len(elements), dtype=np.int64)
        for i, w in enumerate(elements):
            if len(w) > self.max_letters:
                raise CapacityError(f"word of {len(w)} letters exceeds codec capacity {self.max_letters}")
            c = 0
            for a in w:
                c = c * self.base + a
            out[i] = c
        return out

    def decode(self, codes) -> list:
        out = []
        b = self.base
        for c in np.asarray(codes, dtype=np.int64).tolist():
            digits = []
            while c:
                c, d = divmod(c, b)
                digits.append(d)
            out.append(tuple(reversed(digits)))
        return out

    def n_letters(self, codes) -> np.ndarray:
        return np.searchsorted(self.powers, codes, side="right").astype(np.int64)

    def right_mul(self, codes, elem) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        for a in elem:
            codes = self._right_atom(codes, a)
        return codes

    def left_mul(self, elem, codes) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        for a in reversed(elem):
            codes = self._left_atom(a, codes)
        return codes

    def _right_atom(self, codes, a):
        b = self.base
        last = codes % b
        r = self._mul[last, a]
        append = r == APPEND
        if append.any() and codes[append].max(initial=0) >= self.powers[self.max_letters - 1]:
            raise CapacityError(f"product exceeds {self.max_letters} letters")
        with np.errstate(over="ignore"):
            return np.where(append, codes * b + a, np.where(r == 0, codes // b, codes - last + r))

    def _left_atom(self, a, codes):
        n = self.n_letters(codes)
        if n.size and n.max() >= self.max_letters:
            raise CapacityError(f"product exceeds {self.max_letters} letters")
        top = self.powers[np.maximum(n - 1, 0)]
        first = np.where(n == 0, 0, codes // top)
        r = self._mul[a, first]
        with np.errstate(over="ignore"):
            return np.where(
                r == APPEND,
                a * self.powers[n] + codes,
                np.where(r == 0, codes - first * top, codes + (r - first) * top),
            )

    def lengths(self, codes) -> np.ndarray:
        c = np.asarray(codes, dtype=np.int64).copy()
        out = np.zeros(c.shape, dtype=float)
        while c.any():
            out += self._len[c % self.base]
            c //= self.base
        return out

    def invert(self, codes) -> np.ndarray:
        c = np.asarray(codes, dtype=np.int64).copy()
        out = np.zeros_like(c)
        b = self.base
        while c.any():
            live = c > 0
            d = c % b
            out = np.where(live, out * b + self._inv[d], out)
            c //= b
        return out


class AbelianCodec:
    """``Z^k`` vectors in mixed radix with a symmetric coordinate bound."""

    def __init__(self, group: FreeAbelianGroup):
        self.group = group
        k = group.rank
        self.bound = int((2.0 ** (62.0 / k) - 1) // 2)
        if self.bound < 1:
            raise ValueError(f"rank {k} too large for the abelian codec")
        self.radix = 2 * self.bound + 1
        self.place = np.array([self.radix**i for i in range(k)], dtype=np.int64)
        self.identity = np.int64(int(np.sum(self.place * self.bound)))
        self.max_letters = self.bound

    def fits(self, elements, steps: int) -> bool:
        return steps * max((max(map(abs, e), default=0) for e in elements), default=0) <= self.bound

    def _coords(self, codes):
        codes = np.asarray(codes, dtype=np.int64)
        return (codes[..., None] // self.place) % self.radix - self.bound

    def _pack(self, coords):
        if np.abs(coords).max(initial=0) > self.bound:
            raise CapacityError(f"coordinate exceeds codec bound {self.bound}")
        return ((coords + self.bound) * self.place).sum(axis=-1).astype(np.int64)

    def encode(self, elements) -> np.ndarray:
        arr = np.asarray([list(e) for e in elements], dtype=np.int64).reshape(len(elements), self.group.rank)
        return self._pack(arr)

    def decode(self, codes) -> list:
        return [tuple(int(v) for v in row) for row in self._coords(codes).reshape(-1, self.group.rank)]

    def right_mul(self, codes, elem) -> np.ndarray:
        return self._pack(self._coords(codes) + np.asarray(elem, dtype=np.int64))

    def left_mul(self, elem, codes) -> np.ndarray:
        return self.right_mul(codes, elem)

    def lengths(self, codes) -> np.ndarray:
        return np.abs(self._coords(codes)).sum(axis=-1).astype(float)

    def invert(self, codes) -> np.ndarray:
        return self._pack(-self._coords(codes))


class TableCodec:
    """Interning codec: ids are assigned in order of first appearance.

    Products are computed with the group's Python arithmetic once per
    ``(id, factor, side)`` and memoized in growing id arrays.
    """

    def __init__(self, group: Group):
        self.group = group
        self._elements = []
        self._index = {}
        self._lengths = []
        self._cache = {}
        self.identity = np.int64(self._intern(group.identity()))
        self.max_letters = math.inf

    def fits(self, elements, steps: int) -> bool:
        return True

    @property
    def size(self):
        return len(self._elements)

    def _intern(self, x):
        i = self._index.get(x)
        if i is None:
            i = len(self._elements)
            self._index[x] = i
            self._elements.append(x)
            self._lengths.append(self.group.word_length(x))
        return i

    def encode(self, elements) -> np.ndarray:
        return np.array([self._intern(x) for x in elements], dtype=np.int64)

    def decode(self, codes) -> list:
        els = self._elements
        return [els[i] for i in np.asarray(codes, dtype=np.int64).tolist()]

    def _table(self, key):
        table = self._cache.get(key)
        if table is None or table.size < self.size:
            grown = np.full(max(2 * self.size, 16), -1, dtype=np.int64)
            if table is not None:
                grown[: table.size] = table
            table = grown
            self._cache[key] = table
        return table

    def _mul(self, codes, elem, side):
        codes = np.asarray(codes, dtype=np.int64)
        key = (side, elem)
        table = self._table(key)
        out = table[codes]
        miss = out < 0
        if miss.any():
            compose = self.group.compose
            els = self._elements
            for i in np.unique(codes[miss]).tolist():
                x = els[i]
                y = compose(x, elem) if side == "r" else compose(elem, x)
                table[i] = self._intern(y)
            out = table[codes]
        return out

    def right_mul(self, codes, elem) -> np.ndarray:
        return self._mul(codes, elem, "r")

    def left_mul(self, elem, codes) -> np.ndarray:
        return self._mul(codes, elem, "l")

    def lengths(self, codes) -> np.ndarray:
        return np.asarray(self._lengths, dtype=float)[np.asarray(codes, dtype=np.int64)]

    def invert(self, codes) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        return np.array([self._intern(self.group.invert(self._elements[i])) for i in codes.tolist()],
                        dtype=np.int64)


def codec_for(group: Group, elements=(), steps: int = 0):
    """The group's fast codec if it can hold ``steps``-fold products, else a table."""
    codec = group.codec()
    if not codec.fits(list(elements), steps):
        codec = TableCodec(group)
    return codec
