"""Connection events with a marked set, and the coefficient estimators built
from them.

Events here run over lattice coordinates with periodic occupancy lookups, so
the same code serves small dense tori and tori far too large to materialize.
All sets (clusters, thickened sets, pivotal sets) are plain sets of coordinate
tuples. A marked set A is always treated as frozen: it is extracted from one
configuration and then used as a constant while events are evaluated on the
next, independent configuration.

Estimator scheme for the expansion coefficients: a sample draws a sequence of
independent configurations, enumerates chain points over the (small,
subcritical) clusters they can possibly live on, and counts surviving chains.
Per-sample values are integers scaled by a power of p, accumulated in stream
order, so results are identical for any worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _rng
from .errors import DomainError, ResourceBudgetError
from .lattice import TorusGeometry, l1_norm, neighbors, origin, point_sub
from .percolation import (
    Configuration,
    Estimate,
    _run_chunks,
    _two_disjoint_paths_exact,
)

# cap on any single cluster/reach BFS; supercritical inputs hit this instead
# of looping around the torus forever
_SET_BUDGET = 500_000

# tags deriving independent sub-seeds from one master seed
_CHI_TAG = 0xC41
_PI_TAGS = {0: 0xA10, 1: 0xA11, 2: 0xA12}


def _subseed(seed: int, tag: int) -> int:
    return _rng.mix64(_rng.mix64(seed) ^ tag)


@dataclass(frozen=True)
class ThickenedSet:
    """A point set together with every lattice neighbor of its points."""

    sites: frozenset
    source: frozenset

    def __contains__(self, x) -> bool:
        return x in self.sites


def thicken(points) -> ThickenedSet:
    src = frozenset(tuple(p) for p in points)
    sites = set(src)
    for a in src:
        sites.update(neighbors(a))
    return ThickenedSet(sites=frozenset(sites), source=src)


@dataclass(frozen=True)
class ConfigSequence:
    """Independent configurations drawn for one estimator sample."""

    configs: tuple

    @classmethod
    def sample(cls, g: TorusGeometry, p: float, seed: int, index: int, length: int):
        # stream index*length+i: unique per (sample, stage), reproducible
        return cls(
            tuple(
                Configuration(g, p, seed, index * length + i, materialize=False)
                for i in range(length)
            )
        )

    def __getitem__(self, i) -> Configuration:
        return self.configs[i]

    def __len__(self) -> int:
        return len(self.configs)


# ---------------------------------------------------------------------------
# reachability primitives (coordinate space, periodic occupancy)


def _interior_reach(c: Configuration, v, blocked=None, budget: int = _SET_BUDGET):
    """Occupied sites reachable from v through occupied interior vertices.

    blocked points are excluded both as interiors and as members. v itself is
    never a member (a point is not connected to itself).
    """
    occ = c.occupied_point
    seen = set()
    frontier = []
    for w in neighbors(v):
        if blocked is not None and w in blocked:
            continue
        if occ(w):
            seen.add(w)
            frontier.append(w)
    while frontier:
        if len(seen) > budget:
            raise ResourceBudgetError(
                "cluster reach exceeded the budget; occupation density is too "
                "high for subcritical estimators"
            )
        nxt = []
        for y in frontier:
            for w in neighbors(y):
                if w == v or w in seen:
                    continue
                if blocked is not None and w in blocked:
                    continue
                if occ(w):
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return seen


def _envelope(v, interior):
    """Every point connected to v given its occupied reach set: the neighbors
    of v, the reach itself, and the reach's neighbors."""
    out = set(neighbors(v))
    out.update(interior)
    for y in interior:
        out.update(neighbors(y))
    out.discard(v)
    return out


def _connected_points(c: Configuration, u, x, removed=(), budget: int = _SET_BUDGET) -> bool:
    """Is there a u-x path whose interior vertices are occupied and not in
    `removed`? Endpoints are exempt from both conditions; |u-x|=1 always
    connects; u never connects to itself."""
    if u == x:
        return False
    if l1_norm(point_sub(u, x)) == 1:
        return True
    occ = c.occupied_point
    target = set(neighbors(x))
    frontier = [
        w for w in neighbors(u) if w != x and w not in removed and occ(w)
    ]
    for w in frontier:
        if w in target:
            return True
    seen = set(frontier)
    while frontier:
        if len(seen) > budget:
            raise ResourceBudgetError("connectivity search exceeded the budget")
        nxt = []
        for y in frontier:
            for w in neighbors(y):
                if w == x or w == u or w in seen or w in removed:
                    continue
                if occ(w):
                    if w in target:
                        return True
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return False


# ---------------------------------------------------------------------------
# event layer


def modified_cluster(c: Configuration, x, u, budget: int = _SET_BUDGET) -> frozenset:
    """Cluster of x with designated vertex u deleted: {x} plus every occupied
    y != u reachable from x by a path avoiding u."""
    x = tuple(x)
    u = tuple(u)
    if x == u:
        return frozenset({x})
    inter = _interior_reach(c, x, blocked={u}, budget=budget)
    inter.add(x)
    return frozenset(inter)


def through_connection(c: Configuration, u, x, A, budget: int = _SET_BUDGET) -> bool:
    """The event that u is connected to x, but only through the thickened set
    of A: every u-x path has an interior vertex in <A>, or x itself is in <A>."""
    u = tuple(u)
    x = tuple(x)
    thick = A if isinstance(A, ThickenedSet) else thicken(A)
    if not _connected_points(c, u, x, budget=budget):
        return False
    if x in thick:
        return True
    return not _connected_points(c, u, x, removed=thick.sites, budget=budget)


def pivotal_points(c: Configuration, u, x, budget: int = _SET_BUDGET) -> frozenset:
    """Points whose forced occupation connects u to x while their forced
    vacancy disconnects them. Empty for adjacent or equal endpoints; endpoints
    themselves are never pivotal (their occupancy is irrelevant)."""
    u = tuple(u)
    x = tuple(x)
    if u == x or l1_norm(point_sub(u, x)) == 1:
        return frozenset()
    occ = c.occupied_point
    i_u = _interior_reach(c, u, budget=budget)
    e_u = _envelope(u, i_u)
    i_x = _interior_reach(c, x, budget=budget)
    out = set()
    if x in e_u:
        # connected: pivotal points are occupied cut vertices on every path
        for w in i_u & i_x:
            if w == u or w == x:
                continue
            if not _connected_points(c, u, x, removed={w}, budget=budget):
                out.add(w)
    else:
        # disconnected: a vacant point seen from both sides joins them
        e_x = _envelope(x, i_x)
        for w in e_u & e_x:
            if w == u or w == x or occ(w):
                continue
            out.add(w)
    return frozenset(out)


def eprime(c: Configuration, v, u, A, budget: int = _SET_BUDGET) -> bool:
    """v connects to u through <A>, and no pivotal point of (v, u) is itself
    reached from v through <A>."""
    thick = A if isinstance(A, ThickenedSet) else thicken(A)
    if not through_connection(c, v, u, thick, budget=budget):
        return False
    for w in pivotal_points(c, v, u, budget=budget):
        if through_connection(c, v, w, thick, budget=budget):
            return False
    return True


# ---------------------------------------------------------------------------
# batched event scan: all targets of E'(v, . ; A) from one decomposition


def _cut_closures(v, interior):
    """For each vertex of the occupied graph around v, the cut vertices other
    than v separating it from v (including itself when it is one).

    Built from one biconnected decomposition of {v} + interior. The pivotal
    set of (v, x) for any x attached to the graph is then an intersection of
    these closures.
    """
    verts = [v] + sorted(interior)
    idx = {y: i for i, y in enumerate(verts)}
    m = len(verts)
    if m == 1:
        return {}
    adj = [[] for _ in range(m)]
    for i, y in enumerate(verts):
        for w in neighbors(y):
            j = idx.get(w)
            if j is not None:
                adj[i].append(j)

    disc = [0] * m
    low = [0] * m
    parent = [-1] * m
    pos = [0] * m
    is_cut = [False] * m
    estack = []
    blocks = []
    root_blocks = 0
    timer = 1
    disc[0] = low[0] = timer
    stack = [0]
    while stack:
        a = stack[-1]
        if pos[a] < len(adj[a]):
            b = adj[a][pos[a]]
            pos[a] += 1
            if disc[b] == 0:
                parent[b] = a
                timer += 1
                disc[b] = low[b] = timer
                estack.append((a, b))
                stack.append(b)
            elif b != parent[a] and disc[b] < disc[a]:
                estack.append((a, b))
                if disc[b] < low[a]:
                    low[a] = disc[b]
        else:
            stack.pop()
            if stack:
                pa = stack[-1]
                if low[a] < low[pa]:
                    low[pa] = low[a]
                if low[a] >= disc[pa]:
                    blk = set()
                    while estack:
                        e = estack.pop()
                        blk.add(e[0])
                        blk.add(e[1])
                        if e == (pa, a):
                            break
                    blocks.append(blk)
                    if pa == 0:
                        root_blocks += 1
                    else:
                        is_cut[pa] = True
    is_cut[0] = root_blocks >= 2

    vblock = {}
    for bi, blk in enumerate(blocks):
        for y in blk:
            if not is_cut[y]:
                vblock[y] = bi
    tree = {}
    for bi, blk in enumerate(blocks):
        for y in blk:
            if is_cut[y]:
                tree.setdefault(("b", bi), []).append(("c", y))
                tree.setdefault(("c", y), []).append(("b", bi))
    root = ("c", 0) if is_cut[0] else ("b", vblock[0])
    cpath = {root: frozenset()}
    work = [root]
    seen = {root}
    while work:
        node = work.pop()
        cuts = cpath[node]
        for child in tree.get(node, ()):
            if child in seen:
                continue
            seen.add(child)
            if child[0] == "c" and child[1] != 0:
                cpath[child] = cuts | {child[1]}
            else:
                cpath[child] = cuts
            work.append(child)

    out = {}
    for y in range(1, m):
        node = ("c", y) if is_cut[y] else ("b", vblock[y])
        out[verts[y]] = frozenset(verts[k] for k in cpath[node])
    return out


def _eprime_targets(c: Configuration, v, A, budget: int = _SET_BUDGET):
    """Every x with E'(v, x; A) in c, in deterministic order.

    Agrees with filtering all connected points through eprime(), but shares
    one cluster decomposition across targets: through-connections become
    membership tests in two reach sets, pivotal sets become intersections of
    cut-vertex closures.
    """
    v = tuple(v)
    thick = A if isinstance(A, ThickenedSet) else thicken(A)
    i_v = _interior_reach(c, v, budget=budget)
    e_v = _envelope(v, i_v)
    i_off = _interior_reach(c, v, blocked=thick.sites, budget=budget)
    e_off = _envelope(v, i_off)
    closure = _cut_closures(v, i_v)
    nbr_v = set(neighbors(v))
    out = []
    for x in sorted(e_v):
        if not (x in thick or x not in e_off):
            continue
        if x in nbr_v:
            out.append(x)
            continue
        attach = [s for s in neighbors(x) if s in i_v]
        if len(attach) == 1:
            piv = closure[attach[0]] | {attach[0]}
        else:
            piv = closure[attach[0]]
            for s in attach[1:]:
                piv = piv & closure[s]
                if not piv:
                    break
        ok = True
        for w in piv:
            if w in thick or w not in e_off:
                ok = False
                break
        if ok:
            out.append(x)
    return out


# ---------------------------------------------------------------------------
# coefficient estimators


def _double_targets(c: Configuration, radius: int, budget: int = _SET_BUDGET):
    """Points x with 2 <= |x| <= radius doubly connected to the origin:
    two paths with disjoint occupied interior sets."""
    o = origin(c.geometry.d)
    occ = c.occupied_point
    if sum(1 for w in neighbors(o) if occ(w)) < 2:
        return []
    i_0 = _interior_reach(c, o, budget=budget)
    tally = {}
    for i in i_0:
        for x in neighbors(i):
            if x != o:
                tally[x] = tally.get(x, 0) + 1
    base = {o} | i_0
    adj_base = {y: [w for w in neighbors(y) if w in base] for y in base}
    out = []
    for x, k in tally.items():
        if k < 2 or not 2 <= l1_norm(x) <= radius:
            continue
        adj = dict(adj_base)
        row = [w for w in neighbors(x) if w in base]
        adj[x] = row
        for w in row:
            adj[w] = adj_base[w] + [x]
        if _two_disjoint_paths_exact(adj, o, x):
            out.append(x)
    return out


def _pi_chunk(args, start, stop):
    n, g, p, seed, radius, budget = args
    values = np.empty(stop - start, dtype=np.float64)
    o = origin(g.d)
    scale = p**n
    for s in range(start, stop):
        seq = ConfigSequence.sample(g, p, seed, s, n + 1)
        dset = _double_targets(seq[0], radius, budget)
        if n == 0:
            values[s - start] = float(len(dset))
            continue
        total = 0
        for u0 in list(neighbors(o)) + dset:
            a0 = thicken(modified_cluster(seq[0], o, u0, budget=budget))
            stage1 = _eprime_targets(seq[1], u0, a0, budget=budget)
            if n == 1:
                total += len(stage1)
                continue
            for u1 in stage1:
                a1 = thicken(modified_cluster(seq[1], u0, u1, budget=budget))
                total += len(_eprime_targets(seq[2], u1, a1, budget=budget))
        values[s - start] = total * scale
    return values


def pi_hat_estimate(
    n: int,
    g: TorusGeometry,
    p: float,
    samples: int,
    seed: int,
    radius: int = 4,
    threads: int = 1,
    budget: int = _SET_BUDGET,
) -> Estimate:
    """Monte Carlo estimate of the n-th expansion coefficient, summed over x.

    n=0: per sample, the number of points x with 2 <= |x| <= radius doubly
    connected to the origin (the |x| <= 1 terms cancel exactly against the
    adjacency indicator and are omitted). n>=1: chains (u_0 .. u_{n-1}, x)
    evaluated on a fresh configuration per step; u_0 runs over the
    doubly-connected set of the origin (its neighbors always belong to it),
    each later point over everything connected to its predecessor; the marked
    set for step i is the predecessor cluster of step i-1 with u_i deleted,
    frozen before the step's events are evaluated. The count is scaled by p^n.
    """
    if n not in (0, 1, 2):
        raise DomainError("coefficient order must be 0, 1, or 2")
    if radius < 1:
        raise DomainError("summation radius must be positive")
    if 2 * radius + 2 > g.L:
        raise DomainError("summation radius needs L >= 2*radius + 2")
    args = (n, g, p, seed, radius, budget)
    return Estimate.from_samples(_run_chunks(_pi_chunk, args, samples, threads))


def _short_cycle_chunk(args, start, stop):
    g, p, seed = args
    values = np.empty(stop - start, dtype=np.float64)
    o = origin(g.d)
    nbrs = neighbors(o)
    d = g.d
    for s in range(start, stop):
        c = Configuration(g, p, seed, s, materialize=False)
        occ = [c.occupied_point(w) for w in nbrs]
        k = sum(occ)
        # unordered occupied pairs on distinct axes: each such pair is the
        # interior of a unique 4-cycle through the origin
        pairs = k * (k - 1) // 2
        for axis in range(d):
            if occ[2 * axis] and occ[2 * axis + 1]:
                pairs -= 1
        values[s - start] = float(pairs)
    return values


def pi0_short_cycle_estimate(
    g: TorusGeometry, p: float, samples: int, seed: int, threads: int = 1
) -> Estimate:
    """The 4-cycle part of the n=0 coefficient: counts x at distance 2 across
    two axes whose both common neighbors with the origin are occupied. Its
    mean is exactly (1/2)*Omega*(Omega-2)*p^2."""
    args = (g, p, seed)
    return Estimate.from_samples(
        _run_chunks(_short_cycle_chunk, args, samples, threads)
    )


def _chi_chunk(args, start, stop):
    g, p, seed, budget = args
    values = np.empty(stop - start, dtype=np.float64)
    o = origin(g.d)
    for s in range(start, stop):
        c = Configuration(g, p, seed, s, materialize=False)
        i_0 = _interior_reach(c, o, budget=budget)
        values[s - start] = float(len(_envelope(o, i_0)))
    return values


def susceptibility(
    g: TorusGeometry,
    p: float,
    samples: int,
    seed: int,
    threads: int = 1,
    budget: int = _SET_BUDGET,
) -> Estimate:
    """Expected number of points connected to the origin (the two-point
    function summed over all x)."""
    args = (g, p, seed, budget)
    return Estimate.from_samples(_run_chunks(_chi_chunk, args, samples, threads))


@dataclass(frozen=True)
class OzeResidual:
    """Two-sided check of the susceptibility identity at density p.

    lhs is p times the measured susceptibility; rhs rebuilds it from the
    measured coefficient estimates via
    (p*Omega + p*pi_hat) / (1 - p*(Omega + pi_hat)) with
    pi_hat = pi0 - pi1 + pi2. residual is their relative gap.
    """

    residual: float
    lhs: float
    rhs: float
    chi: Estimate
    pi0: Estimate
    pi1: Estimate
    pi2: Estimate
    pi_hat: float
    p: float
    d: int


def oze_residual(
    g: TorusGeometry,
    p: float,
    samples: int,
    seed: int,
    radius: int = 4,
    threads: int = 1,
    budget: int = _SET_BUDGET,
) -> OzeResidual:
    """Relative residual of the susceptibility identity, from independent
    estimates of chi and the first three expansion coefficients.

    The sample budget is spent in proportion to per-sample cost: chi and the
    n=0 coefficient get `samples` each, n=1 a fifth, n=2 a tenth. Requires
    p*(2d-1) < 1, a sufficient condition for a finite susceptibility.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError("occupation probability must lie in [0, 1]")
    if p * (2 * g.d - 1) >= 1.0:
        raise DomainError(
            "occupation density too high for a provably finite susceptibility"
        )
    omega = 2 * g.d
    chi = susceptibility(
        g, p, samples, _subseed(seed, _CHI_TAG), threads=threads, budget=budget
    )
    pi = {}
    split = {0: samples, 1: max(1, samples // 5), 2: max(1, samples // 10)}
    for k in (0, 1, 2):
        pi[k] = pi_hat_estimate(
            k,
            g,
            p,
            split[k],
            _subseed(seed, _PI_TAGS[k]),
            radius=radius,
            threads=threads,
            budget=budget,
        )
    pi_hat = pi[0].mean - pi[1].mean + pi[2].mean
    lhs = p * chi.mean
    denom = 1.0 - p * (omega + pi_hat)
    if denom <= 0.0:
        raise DomainError("identity denominator vanished; density too high")
    rhs = (p * omega + p * pi_hat) / denom
    top = max(abs(lhs), abs(rhs))
    residual = abs(lhs - rhs) / top if top > 0.0 else 0.0
    return OzeResidual(
        residual=residual,
        lhs=lhs,
        rhs=rhs,
        chi=chi,
        pi0=pi[0],
        pi1=pi[1],
        pi2=pi[2],
        pi_hat=pi_hat,
        p=p,
        d=g.d,
    )
