"""Exact combinatorics on Z^d: walk counts, point classes, short cycles.

These enumerations back the small-p behaviour of the double-connection
probability with exact polynomials, and give closed-form point-class counts
whose Omega = 2d polynomial structure is recoverable by interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import ResourceBudgetError
from .lattice import ball, ball_volume, l1_norm, linf_norm, neighbors, origin

_WALK_BALL_BUDGET = 2_000_000


class NotPolynomialError(RuntimeError):
    """Interpolated values failed the held-out dimension check."""


@dataclass(frozen=True)
class WalkTable:
    """Counts of m-step nearest-neighbor walks from the origin, by endpoint."""

    d: int
    m: int
    counts: dict

    def count(self, x) -> int:
        return self.counts.get(tuple(x), 0)

    def total(self) -> int:
        return sum(self.counts.values())


def walk_counts(d: int, m: int) -> WalkTable:
    """DP over the radius-m ball; every intermediate point stays inside it."""
    if d < 1 or m < 0:
        raise ValueError("need d >= 1 and m >= 0")
    vol = ball_volume(d, m)
    if vol > _WALK_BALL_BUDGET or (2 * d) ** m >= 1 << 63:
        raise ResourceBudgetError("walk table exceeds the desk-scale budget")
    pts = ball(d, m)
    index = {p: i for i, p in enumerate(pts)}
    nbr = np.full((vol, 2 * d), -1, dtype=np.int64)
    for i, p in enumerate(pts):
        for k, q in enumerate(neighbors(p)):
            j = index.get(q)
            if j is not None:
                nbr[i, k] = j
    cur = np.zeros(vol, dtype=np.int64)
    cur[index[origin(d)]] = 1
    for _ in range(m):
        nxt = np.zeros(vol, dtype=np.int64)
        for k in range(2 * d):
            col = nbr[:, k]
            ok = col >= 0
            np.add.at(nxt, col[ok], cur[ok])
        cur = nxt
    counts = {p: int(c) for p, c in zip(pts, cur) if c}
    return WalkTable(d=d, m=m, counts=counts)


def walk_count_single(d: int, m: int, x) -> int:
    """Closed-form count of m-step walks 0 -> x (independent of the table DP).

    Split the m steps over axes (multinomial), then choose the up-steps within
    each axis.
    """
    x = tuple(x)
    if len(x) != d:
        raise ValueError("point dimension mismatch")
    if (m - l1_norm(x)) % 2 != 0 or l1_norm(x) > m:
        return 0

    def per_axis(k: int, xi: int) -> int:
        if k < abs(xi) or (k - xi) % 2 != 0:
            return 0
        return math.comb(k, (k + xi) // 2)

    total = 0

    def rec(axis: int, left: int, ways: Fraction):
        nonlocal total
        if axis == d - 1:
            total += ways * per_axis(left, x[axis])
            return
        for k in range(abs(x[axis]), left + 1):
            w = per_axis(k, x[axis])
            if w:
                rec(axis + 1, left - k, ways * w * math.comb(left, k))

    rec(0, m, 1)
    return int(total)


def _tuples_with_sum(j: int, n: int, m: int) -> int:
    """Number of j-tuples of integers in [1, m] summing to n."""
    if j == 0:
        return 1 if n == 0 else 0
    total = 0
    for i in range(j + 1):
        rest = n - i * m - 1
        if rest < j - 1:
            continue
        total += (-1) ** i * math.comb(j, i) * math.comb(rest, j - 1)
    return total


def class_count_formula(d: int, l1: int, linf: int) -> int:
    """|{x in Z^d : |x|_1 = l1, |x|_inf = linf}| by inclusion-exclusion."""
    if l1 < 0 or linf < 0:
        raise ValueError("norms must be nonnegative")
    if l1 == 0 or linf == 0:
        return 1 if l1 == linf == 0 else 0
    if linf > l1:
        return 0

    def at_most(m: int) -> int:
        if m <= 0:
            return 0
        return sum(
            2**j * math.comb(d, j) * _tuples_with_sum(j, l1, m)
            for j in range(1, min(d, l1) + 1)
        )

    return at_most(linf) - at_most(linf - 1)


def class_count_scan(d: int, l1: int, linf: int) -> int:
    """Brute-force box scan; only for small (2*linf+1)^d boxes."""
    if (2 * linf + 1) ** d > 2_000_000:
        raise ResourceBudgetError("scan box too large; use the formula path")
    if l1 == 0 or linf == 0:
        return 1 if l1 == linf == 0 else 0
    count = 0

    def rec(prefix, s, mx):
        nonlocal count
        if len(prefix) == d:
            if s == l1 and mx == linf:
                count += 1
            return
        for c in range(-linf, linf + 1):
            if s + abs(c) > l1:
                continue
            rec(prefix + (c,), s + abs(c), max(mx, abs(c)))

    rec((), 0, 0)
    return count


def class_count(d: int, l1: int, linf: int) -> int:
    """Number of lattice points with the given L1 and Linf norms."""
    if d >= 1 and (2 * linf + 1) ** d <= 200_000:
        return class_count_scan(d, l1, linf)
    return class_count_formula(d, l1, linf)


def polynomial_in_omega(query, degree: int, d_start: int = 2):
    """Fit query(d) as a polynomial in Omega = 2d of the given degree.

    Interpolates through degree+1 dimensions and verifies the next one; a
    mismatch raises NotPolynomialError. Returns ascending Fraction
    coefficients.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    dims = list(range(d_start, d_start + degree + 2))
    xs = [Fraction(2 * d) for d in dims]
    ys = [Fraction(query(d)) for d in dims]
    # Newton form through the first degree+1 points
    coeffs = [Fraction(0)] * (degree + 1)
    divided = list(ys[: degree + 1])
    for j in range(1, degree + 1):
        for i in range(degree, j - 1, -1):
            divided[i] = (divided[i] - divided[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * (degree + 1)
    for i in range(degree, -1, -1):
        # poly <- poly * (X - xs[i]) + divided[i]
        nxt = [Fraction(0)] * (degree + 1)
        for k in range(degree):
            nxt[k + 1] += poly[k]
            nxt[k] -= poly[k] * xs[i]
        nxt[0] += divided[i]
        poly = nxt
    coeffs = poly
    held_x, held_y = xs[-1], ys[-1]
    value = sum(c * held_x**k for k, c in enumerate(coeffs))
    if value != held_y:
        raise NotPolynomialError(
            f"degree-{degree} fit fails at held-out dimension d={dims[-1]}"
        )
    return coeffs


@dataclass(frozen=True)
class CycleFamily:
    """Self-avoiding cycles of one length through the origin and x.

    Each cycle is stored once (rotations and reflections identified) as its
    vertex sequence starting at the origin; interiors drop the two marked
    points.
    """

    d: int
    x: tuple
    length: int
    cycles: tuple

    @property
    def interiors(self):
        skip = {origin(self.d), self.x}
        return tuple(frozenset(v for v in c if v not in skip) for c in self.cycles)


def _sa_paths(d: int, x, steps: int):
    """Self-avoiding paths 0 -> x with exactly `steps` edges, as vertex tuples."""
    o = origin(d)
    out = []
    path = [o]
    seen = {o}

    def rec(cur, left):
        dist = l1_norm(tuple(a - b for a, b in zip(cur, x)))
        if dist > left or (left - dist) % 2 != 0:
            return
        if left == 0:
            out.append(tuple(path))
            return
        for nxt in neighbors(cur):
            if nxt == x:
                if left == 1:
                    path.append(nxt)
                    out.append(tuple(path))
                    path.pop()
                continue
            if nxt in seen:
                continue
            seen.add(nxt)
            path.append(nxt)
            rec(nxt, left - 1)
            path.pop()
            seen.remove(nxt)

    rec(o, steps)
    return out


def enumerate_cycles(d: int, x, length: int) -> CycleFamily:
    """All length-`length` self-avoiding cycles through 0 and x.

    A cycle through the two marked points splits uniquely into an unordered
    pair of internally disjoint self-avoiding paths between them, so
    enumerating those pairs enumerates cycles with rotations and reflections
    already identified.
    """
    x = tuple(x)
    if length % 2 != 0 or length > 8 or length < 4:
        raise ValueError("cycle length must be even, between 4 and 8")
    if len(x) != d or x == origin(d):
        raise ValueError("marked point must differ from the origin")
    by_len = {}
    for j in range(1, length):
        if j > length - j:
            break
        if l1_norm(x) <= j and (j - l1_norm(x)) % 2 == 0:
            by_len.setdefault(j, _sa_paths(d, x, j))
        k = length - j
        if l1_norm(x) <= k and (k - l1_norm(x)) % 2 == 0:
            by_len.setdefault(k, _sa_paths(d, x, k))
    cycles = []

    def interiors_disjoint(p, q):
        ip = set(p[1:-1])
        return not ip.intersection(q[1:-1])

    for j in sorted(by_len):
        k = length - j
        if k < j or k not in by_len:
            continue
        if j < k:
            pairs = ((p, q) for p in by_len[j] for q in by_len[k])
        else:
            pairs = combinations(by_len[j], 2)
        for p, q in pairs:
            if interiors_disjoint(p, q):
                cycles.append(p + tuple(reversed(q[1:-1])))
    return CycleFamily(d=d, x=x, length=length, cycles=tuple(cycles))


def merge_families(families) -> CycleFamily:
    """Pool cycle families through the same marked point (lengths may differ)."""
    families = [f for f in families if f.cycles]
    if not families:
        raise ValueError("nothing to merge")
    d, x = families[0].d, families[0].x
    if any(f.d != d or f.x != x for f in families):
        raise ValueError("families must share dimension and marked point")
    cycles = tuple(c for f in families for c in f.cycles)
    return CycleFamily(d=d, x=x, length=0, cycles=cycles)


@dataclass(frozen=True)
class ProbabilityPolynomial:
    """P(event) as an exact integer-coefficient polynomial in p."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        for k, c in enumerate(other.coeffs):
            a[k] += c
        return ProbabilityPolynomial(tuple(a))

    def evaluate(self, p):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * p + c
        return acc

    def __str__(self):
        parts = [
            f"{c}*p^{k}" if k > 1 else (f"{c}*p" if k == 1 else str(c))
            for k, c in enumerate(self.coeffs)
            if c
        ]
        return " + ".join(parts) if parts else "0"


def union_occupation_probability(family: CycleFamily) -> ProbabilityPolynomial:
    """P(some cycle in the family is fully occupied in its interior).

    Inclusion-exclusion over nonempty subfamilies: a subfamily S contributes
    (-1)^{|S|+1} p^{|union of interiors of S|}. Subfamilies are folded in one
    cycle at a time with coefficients collected per distinct union, which keeps
    the cancellation explicit instead of walking all 2^n subsets. The marked
    endpoints are exempt from occupation, as connection endpoints always are.
    """
    interiors = family.interiors
    sites = sorted(set().union(*interiors)) if interiors else []
    if len(sites) > 30:
        raise ResourceBudgetError("union of interiors exceeds 30 sites")
    index = {s: i for i, s in enumerate(sites)}
    masks = []
    for inter in interiors:
        m = 0
        for s in inter:
            m |= 1 << index[s]
        masks.append(m)
    terms = {}  # union mask -> summed inclusion-exclusion coefficient
    for m in masks:
        delta = {m: 1}
        for u, c in terms.items():
            key = u | m
            delta[key] = delta.get(key, 0) - c
        for key, c in delta.items():
            nc = terms.get(key, 0) + c
            if nc:
                terms[key] = nc
            else:
                terms.pop(key, None)
        if len(terms) > 500_000:
            raise ResourceBudgetError("union closure exceeds the desk-scale budget")
    coeffs = [0] * (len(sites) + 1)
    for u, c in terms.items():
        coeffs[bin(u).count("1")] += c
    return ProbabilityPolynomial(tuple(coeffs))


def double_connection_polynomial(d: int, x, max_cycle_length: int = 6) -> ProbabilityPolynomial:
    """Exact small-p polynomial for P(0 and x doubly connected).

    Counts the union event over all cycles through 0 and x of length at most
    max_cycle_length; the omitted longer cycles contribute
    O(p^{max_cycle_length}).
    """
    x = tuple(x)
    fams = []
    for length in range(4, max_cycle_length + 1, 2):
        if l1_norm(x) * 2 <= length:
            fams.append(enumerate_cycles(d, x, length))
    fams = [f for f in fams if f.cycles]
    if not fams:
        return ProbabilityPolynomial((0,))
    return union_occupation_probability(merge_families(fams))


def pi0_small_p_polynomial(d: int, max_cycle_length: int = 6) -> ProbabilityPolynomial:
    """Sum of double-connection polynomials over all points with |x|_1 >= 2."""
    total = ProbabilityPolynomial((0,))
    r = max_cycle_length // 2
    for x in ball(d, r):
        if l1_norm(x) >= 2:
            total = total + double_connection_polynomial(d, x, max_cycle_length)
    return total
