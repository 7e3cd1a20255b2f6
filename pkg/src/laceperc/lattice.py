"""Z^d lattice geometry and its periodic torus truncation.

Points are plain int tuples. Torus sites are addressed by a mixed-radix index
over coordinates reduced mod L; the symmetric representative in [-L/2, L/2)
keeps small displacements near the origin identical to their Z^d versions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ResourceBudgetError

Point = tuple

# neighbor-table memory guard (entries, int32)
_TABLE_BUDGET = 400_000_000


def origin(d: int) -> Point:
    return (0,) * d


def l1_norm(x: Point) -> int:
    return sum(abs(c) for c in x)


def linf_norm(x: Point) -> int:
    return max(abs(c) for c in x) if x else 0


def point_add(x: Point, y: Point) -> Point:
    return tuple(a + b for a, b in zip(x, y))


def point_sub(x: Point, y: Point) -> Point:
    return tuple(a - b for a, b in zip(x, y))


def neighbors(x: Point):
    """The 2d unit neighbors, axis ascending, minus direction before plus."""
    out = []
    for ax in range(len(x)):
        for s in (-1, 1):
            y = list(x)
            y[ax] += s
            out.append(tuple(y))
    return out


def unit_steps(d: int):
    """Step vectors in the same order as neighbors()."""
    return neighbors(origin(d))


def ball(d: int, r: int):
    """All points with |x|_1 <= r, in deterministic lexicographic order."""
    if d < 1 or r < 0:
        raise ValueError("need d >= 1 and r >= 0")
    out = []

    def rec(prefix, budget):
        if len(prefix) == d - 1:
            for c in range(-budget, budget + 1):
                out.append(prefix + (c,))
            return
        for c in range(-budget, budget + 1):
            rec(prefix + (c,), budget - abs(c))

    rec((), r)
    return out


def ball_volume(d: int, r: int) -> int:
    """|{x : |x|_1 <= r}| (Delannoy number D(d, r))."""
    return sum(2**k * math.comb(d, k) * math.comb(r, k) for k in range(min(d, r) + 1))


@dataclass(frozen=True)
class TorusGeometry:
    """A d-dimensional torus of even side L >= 4 (even keeps it bipartite)."""

    d: int
    L: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.L < 3 or self.L % 2 != 0:
            raise ValueError("side must be even and >= 4")
        if self.L**self.d > 1 << 62:
            raise ResourceBudgetError("torus exceeds addressable site range")

    @property
    def n_sites(self) -> int:
        return self.L**self.d

    def wrap(self, x: Point) -> Point:
        """Reduce coordinates mod L into the symmetric window [-L/2, L/2)."""
        h = self.L // 2
        return tuple((c + h) % self.L - h for c in x)

    def site_index(self, x: Point) -> int:
        if len(x) != self.d:
            raise ValueError("point dimension mismatch")
        idx = 0
        for c in reversed(x):
            idx = idx * self.L + (c % self.L)
        return idx

    def site_point(self, idx: int) -> Point:
        if not 0 <= idx < self.n_sites:
            raise ValueError("site index out of range")
        h = self.L // 2
        out = []
        for _ in range(self.d):
            out.append((idx % self.L + h) % self.L - h)
            idx //= self.L
        return tuple(out)

    def neighbor_table(self) -> np.ndarray:
        """(n_sites, 2d) int array; column order matches neighbors()."""
        return _neighbor_table(self.d, self.L)

    def index_neighbors(self, idx: int):
        """Neighbor indices of one site without materializing the table."""
        out = []
        p = 1
        for _ in range(self.d):
            c = (idx // p) % self.L
            out.append(idx - p * c + p * ((c - 1) % self.L))
            out.append(idx - p * c + p * ((c + 1) % self.L))
            p *= self.L
        return out


@lru_cache(maxsize=16)
def _neighbor_table(d: int, L: int) -> np.ndarray:
    n = L**d
    if n * 2 * d > _TABLE_BUDGET:
        raise ResourceBudgetError("neighbor table exceeds memory budget")
    idx = np.arange(n, dtype=np.int64)
    nbr = np.empty((n, 2 * d), dtype=np.int64)
    p = 1
    for ax in range(d):
        c = (idx // p) % L
        nbr[:, 2 * ax] = idx - p * c + p * ((c - 1) % L)
        nbr[:, 2 * ax + 1] = idx - p * c + p * ((c + 1) % L)
        p *= L
    nbr.setflags(write=False)
    return nbr
