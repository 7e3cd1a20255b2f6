"""Site-percolation Monte Carlo on the torus.

Configurations are pure functions of (geometry, p, seed, stream), so every
estimate is reproducible bit for bit regardless of worker count: per-sample
values are always reduced in stream order. Union-find kernels are numba
compiled; wrap detection tracks a displacement vector to each union-find root,
so a winding cluster shows up as a +-L inconsistency when a cycle closes.

Connectivity between u and x never requires the endpoints to be occupied;
paths need occupied interior vertices only, and |u-x|=1 is connected by
convention. {x <-> x} is empty.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from collections import deque

import numpy as np
from numba import njit

from . import _rng
from .errors import DomainError, ResourceBudgetError
from .lattice import TorusGeometry, l1_norm, neighbors

DENSE_LIMIT = 1 << 24
_CLUSTER_BUDGET = 2_000_000


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate: sample mean, its standard error, sample count."""

    mean: float
    stderr: float
    n: int

    @classmethod
    def from_samples(cls, values) -> "Estimate":
        values = np.asarray(values, dtype=np.float64)
        n = values.size
        if n == 0:
            raise ValueError("no samples")
        mean = float(values.mean())
        stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean=mean, stderr=stderr, n=n)

    @property
    def m2(self) -> float:
        """Sum of squared deviations; the mergeable second moment."""
        return self.stderr**2 * self.n * (self.n - 1)

    def merge(self, other: "Estimate") -> "Estimate":
        """Associative pooling via (count, mean, M2)."""
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta**2 * self.n * other.n / n
        stderr = math.sqrt(m2 / (n - 1)) / math.sqrt(n) if n > 1 else 0.0
        return Estimate(mean=mean, stderr=stderr, n=n)


@dataclass
class Configuration:
    """One sampled occupancy; dense for small tori, lazy site queries otherwise.

    materialize overrides the automatic dense/lazy split: False keeps even a
    small torus lazy (cheap when only a cluster's worth of sites is touched),
    True demands a dense array and fails above DENSE_LIMIT.
    """

    geometry: TorusGeometry
    p: float
    seed: int
    stream: int
    materialize: bool = None
    _key: int = field(init=False, repr=False)
    _threshold: int = field(init=False, repr=False)
    _dense: np.ndarray = field(init=False, repr=False, default=None)
    _cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError("occupation probability must lie in [0, 1]")
        self._key = _rng.stream_key(self.seed, self.stream)
        self._threshold = _rng.bernoulli_threshold(self.p)
        dense = self.materialize
        if dense is None:
            dense = self.geometry.n_sites <= DENSE_LIMIT
        elif dense and self.geometry.n_sites > DENSE_LIMIT:
            raise ResourceBudgetError("torus too large for a dense occupancy array")
        if dense:
            self._dense = _rng.occupancy_array(
                self.seed, self.stream, self.geometry.n_sites, self.p
            )

    def occupied_index(self, idx: int) -> bool:
        if self._dense is not None:
            return bool(self._dense[idx])
        hit = self._cache.get(idx)
        if hit is None:
            hit = _rng.bits_at(self._key, idx) < self._threshold
            self._cache[idx] = hit
        return hit

    def occupied_point(self, x) -> bool:
        return self.occupied_index(self.geometry.site_index(x))

    def occupancy(self) -> np.ndarray:
        if self._dense is None:
            raise ResourceBudgetError("torus too large for a dense occupancy array")
        return self._dense


def sample_configuration(g: TorusGeometry, p: float, seed: int, stream: int) -> Configuration:
    return Configuration(geometry=g, p=p, seed=seed, stream=stream)


# ---------------------------------------------------------------------------
# union-find kernels


@njit(cache=True)
def _find_with_disp(parent, disp, path, s, vec):
    """Root of s; vec receives the displacement s -> root; path is compressed."""
    d = disp.shape[1]
    for j in range(d):
        vec[j] = 0
    np_ = 0
    r = s
    while parent[r] != r:
        path[np_] = r
        np_ += 1
        for j in range(d):
            vec[j] += disp[r, j]
        r = parent[r]
    acc = vec.copy()
    for i in range(np_):
        node = path[i]
        for j in range(d):
            tmp = disp[node, j]
            disp[node, j] = acc[j]
            acc[j] -= tmp
        parent[node] = r
    return r


@njit(cache=True)
def _first_wrap_step(order, nbr, d):
    """Insert sites in `order`; 1-based count when a cluster first wraps the
    first axis. The single-axis onset crosses near the middle of the critical
    window, so its mean drifts least with box size; wraps around other axes
    are ignored (the displacement labels stay valid either way)."""
    n = order.shape[0]
    parent = np.full(n, -1, dtype=np.int64)
    size = np.zeros(n, dtype=np.int64)
    disp = np.zeros((n, d), dtype=np.int64)
    path = np.empty(n, dtype=np.int64)
    vs = np.empty(d, dtype=np.int64)
    vt = np.empty(d, dtype=np.int64)
    for step in range(n):
        s = order[step]
        parent[s] = s
        size[s] = 1
        for k in range(2 * d):
            t = nbr[s, k]
            if parent[t] < 0:
                continue
            ax = k // 2
            delta = 1 if k % 2 == 1 else -1
            rs = _find_with_disp(parent, disp, path, s, vs)
            rt = _find_with_disp(parent, disp, path, t, vt)
            if rs == rt:
                want0 = -delta if ax == 0 else 0
                if vs[0] - vt[0] != want0:
                    return step + 1
            elif size[rs] < size[rt]:
                for j in range(d):
                    want = delta if j == ax else 0
                    disp[rs, j] = vt[j] - want - vs[j]
                parent[rs] = rt
                size[rt] += size[rs]
            else:
                for j in range(d):
                    want = delta if j == ax else 0
                    disp[rt, j] = vs[j] + want - vt[j]
                parent[rt] = rs
                size[rs] += size[rt]
    return n


@njit(cache=True)
def _wrapped_components(occ, nbr, d):
    """Roots of occupied sites (-1 when vacant) plus a per-root wrapped flag."""
    n = occ.shape[0]
    parent = np.full(n, -1, dtype=np.int64)
    size = np.zeros(n, dtype=np.int64)
    disp = np.zeros((n, d), dtype=np.int64)
    path = np.empty(n, dtype=np.int64)
    vs = np.empty(d, dtype=np.int64)
    vt = np.empty(d, dtype=np.int64)
    wrapped = np.zeros(n, dtype=np.uint8)
    for s in range(n):
        if occ[s] == 0:
            continue
        parent[s] = s
        size[s] = 1
        for k in range(2 * d):
            t = nbr[s, k]
            if parent[t] < 0:
                continue
            ax = k // 2
            delta = 1 if k % 2 == 1 else -1
            rs = _find_with_disp(parent, disp, path, s, vs)
            rt = _find_with_disp(parent, disp, path, t, vt)
            if rs == rt:
                for j in range(d):
                    want = -delta if j == ax else 0
                    if vs[j] - vt[j] != want:
                        wrapped[rs] = 1
            elif size[rs] < size[rt]:
                for j in range(d):
                    want = delta if j == ax else 0
                    disp[rs, j] = vt[j] - want - vs[j]
                parent[rs] = rt
                size[rt] += size[rs]
                if wrapped[rs]:
                    wrapped[rt] = 1
            else:
                for j in range(d):
                    want = delta if j == ax else 0
                    disp[rt, j] = vs[j] + want - vt[j]
                parent[rt] = rs
                size[rs] += size[rt]
                if wrapped[rt]:
                    wrapped[rs] = 1
    roots = np.full(n, -1, dtype=np.int64)
    for s in range(n):
        if occ[s]:
            roots[s] = _find_with_disp(parent, disp, path, s, vs)
    return roots, wrapped


@njit(cache=True)
def _cluster_roots(occ, nbr):
    """Union-find labels of occupied sites; -1 on vacant sites."""
    n = occ.shape[0]
    k2 = nbr.shape[1]
    parent = np.full(n, -1, dtype=np.int64)
    size = np.zeros(n, dtype=np.int64)
    for s in range(n):
        if occ[s] == 0:
            continue
        parent[s] = s
        size[s] = 1
        for k in range(k2):
            t = nbr[s, k]
            if parent[t] < 0:
                continue
            r = s
            while parent[r] != r:
                r = parent[r]
            rs = r
            r = t
            while parent[r] != r:
                r = parent[r]
            rt = r
            if rs == rt:
                continue
            if size[rs] < size[rt]:
                parent[rs] = rt
                size[rt] += size[rs]
            else:
                parent[rt] = rs
                size[rs] += size[rt]
    roots = np.full(n, -1, dtype=np.int64)
    for s in range(n):
        if occ[s] == 0:
            continue
        r = s
        while parent[r] != r:
            r = parent[r]
        roots[s] = r
        # compress the walked path
        w = s
        while parent[w] != r:
            nxt = parent[w]
            parent[w] = r
            w = nxt
    return roots


# ---------------------------------------------------------------------------
# threshold sweep and theta proxy


def _pc_chunk(args, start, stop):
    g, seed = args
    nbr = g.neighbor_table()
    n = g.n_sites
    out = np.empty(stop - start, dtype=np.float64)
    for i, stream in enumerate(range(start, stop)):
        order = _rng.permutation(seed, stream, n)
        out[i] = _first_wrap_step(order, nbr, g.d) / n
    return out


def _theta_chunk(args, start, stop):
    g, p, seed = args
    nbr = g.neighbor_table()
    out = np.empty(stop - start, dtype=np.float64)
    for i, stream in enumerate(range(start, stop)):
        occ = _rng.occupancy_array(seed, stream, g.n_sites, p)
        if occ[0] == 0:
            out[i] = 0.0
            continue
        roots, wrapped = _wrapped_components(occ, nbr, g.d)
        out[i] = float(wrapped[roots[0]])
    return out


def _run_chunks(fn, args, samples: int, threads: int) -> np.ndarray:
    """Evaluate per-stream values 0..samples-1, reduced in stream order."""
    if samples < 1:
        raise ValueError("need at least one sample")
    if threads <= 1:
        return fn(args, 0, samples)
    threads = min(threads, samples)
    bounds = [samples * k // threads for k in range(threads + 1)]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        futures = [
            ex.submit(fn, args, bounds[k], bounds[k + 1]) for k in range(threads)
        ]
        parts = [f.result() for f in futures]
    return np.concatenate(parts)


def wrapping_threshold_samples(
    g: TorusGeometry, samples: int, seed: int, threads: int = 1
) -> np.ndarray:
    """Per-sweep occupation fractions at the first wrap around the first
    axis (one incremental sweep per stream)."""
    return _run_chunks(_pc_chunk, (g, seed), samples, threads)


def critical_point(g: TorusGeometry, samples: int, seed: int, threads: int = 1) -> Estimate:
    return Estimate.from_samples(wrapping_threshold_samples(g, samples, seed, threads))


def theta_proxy(
    g: TorusGeometry, p: float, samples: int, seed: int, threads: int = 1
) -> Estimate:
    """P(origin occupied and its cluster wraps the torus in some axis)."""
    if not 0.0 <= p <= 1.0:
        raise DomainError("occupation probability must lie in [0, 1]")
    return Estimate.from_samples(_run_chunks(_theta_chunk, (g, p, seed), samples, threads))


# ---------------------------------------------------------------------------
# pointwise connectivity


def connected(c: Configuration, u, x, removed=()) -> bool:
    """Is u joined to x by a path with occupied interior vertices?

    Endpoints are exempt from occupation and from `removed`; adjacent points
    are always connected; u = x never is.
    """
    g = c.geometry
    ui, xi = g.site_index(u), g.site_index(x)
    if ui == xi:
        return False
    if l1_norm(g.wrap(tuple(a - b for a, b in zip(u, x)))) == 1:
        return True
    blocked = {g.site_index(r) for r in removed}
    blocked.discard(ui)
    blocked.discard(xi)
    seen = set()
    queue = deque()
    for j in g.index_neighbors(ui):
        if j == xi:
            return True
        if j not in blocked and j not in seen and c.occupied_index(j):
            seen.add(j)
            queue.append(j)
    while queue:
        w = queue.popleft()
        for j in g.index_neighbors(w):
            if j == xi:
                return True
            if j in seen or j in blocked or j == ui:
                continue
            if c.occupied_index(j):
                seen.add(j)
                queue.append(j)
        if len(seen) > _CLUSTER_BUDGET:
            raise ResourceBudgetError("cluster exploration exceeded budget")
    return False


def chemical_distance(c: Configuration, u, x):
    """Fewest edges over occupied-interior paths u -> x; None if disconnected."""
    g = c.geometry
    ui, xi = g.site_index(u), g.site_index(x)
    if ui == xi:
        return None
    dist = {ui: 0}
    queue = deque([(ui, 0)])
    while queue:
        w, k = queue.popleft()
        for j in g.index_neighbors(w):
            if j == xi:
                return k + 1
            if j not in dist and c.occupied_index(j):
                dist[j] = k + 1
                queue.append((j, k + 1))
        if len(dist) > _CLUSTER_BUDGET:
            raise ResourceBudgetError("cluster exploration exceeded budget")
    return None


_TWO_POINT_VARIANTS = ("plain", "chem_ge", "chem_le", "chem_eq")


def _two_point_chunk(args, start, stop):
    g, p, x, variant, level, seed = args
    out = np.empty(stop - start, dtype=np.float64)
    o = (0,) * g.d
    for i, stream in enumerate(range(start, stop)):
        c = Configuration(geometry=g, p=p, seed=seed, stream=stream)
        if variant == "plain":
            out[i] = 1.0 if connected(c, o, x) else 0.0
        else:
            dist = chemical_distance(c, o, x)
            if variant == "chem_ge":
                out[i] = 1.0 if dist is not None and dist >= level else 0.0
            elif variant == "chem_le":
                out[i] = 1.0 if dist is not None and dist <= level else 0.0
            else:
                out[i] = 1.0 if dist == level else 0.0
    return out


def two_point(
    g: TorusGeometry,
    p: float,
    x,
    samples: int,
    seed: int,
    variant: str = "plain",
    level: int = None,
    threads: int = 1,
) -> Estimate:
    """P(0 <-> x), optionally filtered by chemical distance {>=l}, {<=l}, {=l}."""
    x = tuple(x)
    if variant not in _TWO_POINT_VARIANTS:
        raise ValueError(f"variant must be one of {_TWO_POINT_VARIANTS}")
    if variant != "plain" and (level is None or level < 1):
        raise ValueError("chemical-distance variants need a level >= 1")
    args = (g, p, x, variant, level, seed)
    return Estimate.from_samples(_run_chunks(_two_point_chunk, args, samples, threads))


# ---------------------------------------------------------------------------
# double connections (two interior-disjoint paths)


def _two_disjoint_paths_exact(adj, u, x) -> bool:
    """Menger check: two interior-vertex-disjoint u-x paths in graph `adj`.

    Vertex-split max flow with unit interior capacities, Edmonds-Karp with
    residual cancellation, stopping after two augmentations. Nodes of the flow
    network are (site, side) with side 0 = in, 1 = out.
    """
    residual = {}

    def add_arc(a, b, cap):
        residual[(a, b)] = residual.get((a, b), 0) + cap
        residual.setdefault((b, a), 0)

    out_arcs = {}
    for v, nbrs in adj.items():
        cap = 2 if v in (u, x) else 1
        add_arc((v, 0), (v, 1), cap)
        out_arcs.setdefault((v, 0), []).append((v, 1))
        out_arcs.setdefault((v, 1), []).append((v, 0))  # residual direction
        for w in nbrs:
            add_arc((v, 1), (w, 0), 1)
            out_arcs[(v, 1)].append((w, 0))
            out_arcs.setdefault((w, 0), []).append((v, 1))  # residual direction
    source, sink = (u, 1), (x, 0)
    flows = 0
    for _ in range(2):
        prev = {source: None}
        q = deque([source])
        while q and sink not in prev:
            a = q.popleft()
            for b in out_arcs.get(a, ()):
                if b not in prev and residual.get((a, b), 0) > 0:
                    prev[b] = a
                    if b == sink:
                        break
                    q.append(b)
        if sink not in prev:
            return False
        b = sink
        while prev[b] is not None:
            a = prev[b]
            residual[(a, b)] -= 1
            residual[(b, a)] += 1
            b = a
        flows += 1
    return flows >= 2


def double_connected(c: Configuration, u, x) -> bool:
    """Two interior-disjoint occupied paths u -> x (adjacent pairs qualify)."""
    g = c.geometry
    u, x = tuple(u), tuple(x)
    ui, xi = g.site_index(u), g.site_index(x)
    if ui == xi:
        return False
    if l1_norm(g.wrap(tuple(a - b for a, b in zip(u, x)))) == 1:
        return True
    # occupied interior component around u
    comp = set()
    queue = deque()
    for j in g.index_neighbors(ui):
        if j != xi and c.occupied_index(j):
            comp.add(j)
            queue.append(j)
    while queue:
        w = queue.popleft()
        for j in g.index_neighbors(w):
            if j in comp or j == ui or j == xi:
                continue
            if c.occupied_index(j):
                comp.add(j)
                queue.append(j)
        if len(comp) > _CLUSTER_BUDGET:
            raise ResourceBudgetError("cluster exploration exceeded budget")
    if sum(1 for j in g.index_neighbors(xi) if j in comp) < 2:
        return False
    if sum(1 for j in g.index_neighbors(ui) if j in comp) < 2:
        return False
    nodes = comp | {ui, xi}
    adj = {
        a: [b for b in g.index_neighbors(a) if b in nodes] for a in nodes
    }
    return _two_disjoint_paths_exact(adj, ui, xi)


def _double_chunk(args, start, stop):
    g, p, x, seed = args
    out = np.empty(stop - start, dtype=np.float64)
    o = (0,) * g.d
    for i, stream in enumerate(range(start, stop)):
        c = Configuration(geometry=g, p=p, seed=seed, stream=stream)
        out[i] = 1.0 if double_connected(c, o, x) else 0.0
    return out


def double_connection(
    g: TorusGeometry, p: float, x, samples: int, seed: int, threads: int = 1
) -> Estimate:
    """P(0 and x are connected by two interior-disjoint occupied paths)."""
    args = (g, p, tuple(x), seed)
    return Estimate.from_samples(_run_chunks(_double_chunk, args, samples, threads))


# ---------------------------------------------------------------------------
# triangle diagrams


@dataclass(frozen=True)
class TriangleDiagrams:
    """Open-triangle values from FFT convolutions of the two-point estimate.

    tau_bullet = delta + p*tau and tau_circ = delta + tau are the weighted
    variants; sup_* statistics take the maximum over x != 0 except for the
    fully weighted triangle, whose supremum ranges over all x. Estimates come
    from block means over disjoint stream ranges.
    """

    sup_bullet: Estimate
    sup_bullet_circ: Estimate
    sup_bullet_bullet_circ: Estimate
    at0_bullet: Estimate
    at0_bullet_circ: Estimate
    tau_far: Estimate
    finite_size_warning: bool
    tau_floor: float
    samples: int


def _tau_block_sum(args, start, stop):
    """Sum over streams of the 0 <-> x indicator field."""
    g, p, seed = args
    nbr = g.neighbor_table()
    n = g.n_sites
    total = np.zeros(n, dtype=np.float64)
    nbr0 = nbr[0]
    for stream in range(start, stop):
        occ = _rng.occupancy_array(seed, stream, n, p)
        roots = _cluster_roots(occ, nbr)
        origin_roots = np.unique(roots[nbr0][occ[nbr0] > 0])
        conn = np.zeros(n, dtype=bool)
        if origin_roots.size:
            for k in range(nbr.shape[1]):
                col = nbr[:, k]
                m = (occ[col] > 0) & np.isin(roots[col], origin_roots)
                conn |= m
        conn[nbr0] = True
        conn[0] = False
        total += conn
    return total


def _conv3(fa, fb, fc, shape):
    return np.fft.irfftn(fa * fb * fc, s=shape, axes=range(len(shape)))


def triangle_diagrams(
    g: TorusGeometry,
    p: float,
    samples: int,
    seed: int,
    threads: int = 1,
    tau_floor: float = 1e-3,
    blocks: int = 10,
) -> TriangleDiagrams:
    """Triangle diagram suprema at occupation density p.

    The two-point function is estimated per displacement, the three-fold
    circular convolutions are done with FFTs, and the block decomposition
    (contiguous stream ranges) gives stderr without re-sampling. A mean far
    tau above tau_floor flags untrustworthy finite-size behaviour.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError("occupation probability must lie in [0, 1]")
    if g.n_sites > DENSE_LIMIT:
        raise ResourceBudgetError("triangle diagrams need a dense torus")
    blocks = max(1, min(blocks, samples))
    bounds = [samples * b // blocks for b in range(blocks + 1)]
    args = (g, p, seed)
    if threads <= 1:
        sums = [_tau_block_sum(args, bounds[b], bounds[b + 1]) for b in range(blocks)]
    else:
        with ProcessPoolExecutor(max_workers=min(threads, blocks)) as ex:
            futures = [
                ex.submit(_tau_block_sum, args, bounds[b], bounds[b + 1])
                for b in range(blocks)
            ]
            sums = [f.result() for f in futures]
    shape = (g.L,) * g.d
    far_idx = g.site_index((g.L // 2,) * g.d)
    delta = np.zeros(shape)
    delta.flat[0] = 1.0
    fdelta = np.fft.rfftn(delta)
    per = {k: [] for k in ("sb", "sbc", "sbbc", "a0b", "a0bc", "far")}
    for b in range(blocks):
        nb = bounds[b + 1] - bounds[b]
        tau = (sums[b] / nb).reshape(shape, order="F")
        ftau = np.fft.rfftn(tau)
        fbullet = fdelta + p * ftau
        fcirc = fdelta + ftau
        nabla_b = p * _conv3(fbullet, ftau, ftau, shape)
        nabla_bc = p * _conv3(fbullet, fcirc, ftau, shape)
        nabla_bbc = _conv3(fbullet, fbullet, fcirc, shape)
        flat_b = nabla_b.reshape(-1, order="F")
        flat_bc = nabla_bc.reshape(-1, order="F")
        flat_bbc = nabla_bbc.reshape(-1, order="F")
        per["sb"].append(flat_b[1:].max())
        per["sbc"].append(flat_bc[1:].max())
        per["sbbc"].append(flat_bbc.max())
        per["a0b"].append(flat_b[0])
        per["a0bc"].append(flat_bc[0])
        per["far"].append(tau.reshape(-1, order="F")[far_idx])
    est = {k: Estimate.from_samples(v) for k, v in per.items()}
    return TriangleDiagrams(
        sup_bullet=est["sb"],
        sup_bullet_circ=est["sbc"],
        sup_bullet_bullet_circ=est["sbbc"],
        at0_bullet=est["a0b"],
        at0_bullet_circ=est["a0bc"],
        tau_far=est["far"],
        finite_size_warning=bool(est["far"].mean > tau_floor),
        tau_floor=tau_floor,
        samples=samples,
    )


# ---------------------------------------------------------------------------
# explicit small windows (exhaustive checks)


class SiteWindow:
    """A finite set of Z^d sites with free boundary, occupancy as a bitmask.

    Connectivity semantics match the torus functions: endpoints exempt,
    adjacency always connects. Everything here is exhaustive and intended for
    windows of a couple dozen sites.
    """

    def __init__(self, points):
        self.points = [tuple(p) for p in points]
        if len(set(self.points)) != len(self.points):
            raise ValueError("window points must be distinct")
        self.index = {p: i for i, p in enumerate(self.points)}
        self.n = len(self.points)
        self.adj_mask = [0] * self.n
        self.adj = [[] for _ in range(self.n)]
        for i, pt in enumerate(self.points):
            for q in neighbors(pt):
                j = self.index.get(q)
                if j is not None:
                    self.adj_mask[i] |= 1 << j
                    self.adj[i].append(j)

    def mask_of(self, sites) -> int:
        m = 0
        for s in sites:
            m |= 1 << self.index[tuple(s)]
        return m

    def connected(self, mask: int, u, x, removed_mask: int = 0) -> bool:
        ui, xi = self.index[tuple(u)], self.index[tuple(x)]
        if ui == xi:
            return False
        xbit = 1 << xi
        if self.adj_mask[ui] & xbit:
            return True
        allowed = mask & ~removed_mask & ~(1 << ui) & ~xbit
        cur = self.adj_mask[ui] & allowed
        visited = 0
        while cur:
            visited |= cur
            nxt = 0
            rest = cur
            while rest:
                low = rest & -rest
                nxt |= self.adj_mask[low.bit_length() - 1]
                rest ^= low
            if nxt & xbit:
                return True
            cur = nxt & allowed & ~visited
        return False

    def reachable_interiors(self, mask: int, u, removed_mask: int = 0) -> int:
        """Bitmask of occupied sites usable as interiors of paths from u."""
        ui = self.index[tuple(u)]
        allowed = mask & ~removed_mask & ~(1 << ui)
        cur = self.adj_mask[ui] & allowed
        visited = 0
        while cur:
            visited |= cur
            nxt = 0
            rest = cur
            while rest:
                low = rest & -rest
                nxt |= self.adj_mask[low.bit_length() - 1]
                rest ^= low
            cur = nxt & allowed & ~visited
        return visited

    def pivotal_brute(self, mask: int, u, x):
        """Force-occupied / force-vacant scan over every window site."""
        ui, xi = self.index[tuple(u)], self.index[tuple(x)]
        out = set()
        for w in range(self.n):
            if w in (ui, xi):
                continue
            bit = 1 << w
            if self.connected(mask | bit, u, x) and not self.connected(mask & ~bit, u, x):
                out.add(self.points[w])
        return out

    def sa_paths(self, mask: int, u, x, cap: int = 200_000):
        """Interior bitmasks of all self-avoiding occupied-interior paths u->x."""
        ui, xi = self.index[tuple(u)], self.index[tuple(x)]
        out = []
        count = 0

        def rec(cur, used):
            nonlocal count
            count += 1
            if count > cap:
                raise ResourceBudgetError("path enumeration exceeded budget")
            for j in self.adj[cur]:
                if j == xi:
                    out.append(used)
                    continue
                bit = 1 << j
                if used & bit or not mask & bit or j == ui:
                    continue
                rec(j, used | bit)

        rec(ui, 0)
        return out

    def double_connected_brute(self, mask: int, u, x) -> bool:
        """Exists a pair of interior-disjoint paths, by explicit path search."""
        ui, xi = self.index[tuple(u)], self.index[tuple(x)]
        if ui == xi:
            return False
        if self.adj_mask[ui] & (1 << xi):
            return True
        paths = self.sa_paths(mask, u, x)
        for i in range(len(paths)):
            for j in range(i + 1, len(paths)):
                if paths[i] & paths[j] == 0:
                    return True
        return False

    def has_long_path(self, mask: int, u, x, min_edges: int) -> bool:
        """Exists a self-avoiding occupied-interior u-x path with >= min_edges."""
        ui, xi = self.index[tuple(u)], self.index[tuple(x)]
        if ui == xi:
            return False

        def rec(cur, used, edges):
            for j in self.adj[cur]:
                if j == xi:
                    if edges + 1 >= min_edges:
                        return True
                    continue
                bit = 1 << j
                if used & bit or not mask & bit or j == ui:
                    continue
                if rec(j, used | bit, edges + 1):
                    return True
            return False

        return rec(ui, 0, 0)

    def double_connected_flow(self, mask: int, u, x) -> bool:
        """Same event as double_connected_brute via the max-flow route."""
        ui, xi = self.index[tuple(u)], self.index[tuple(x)]
        if ui == xi:
            return False
        if self.adj_mask[ui] & (1 << xi):
            return True
        nodes = {ui, xi}
        for w in range(self.n):
            if mask >> w & 1:
                nodes.add(w)
        adj = {
            a: [b for b in self.adj[a] if b in nodes and (b in (ui, xi) or mask >> b & 1)]
            for a in nodes
        }
        return _two_disjoint_paths_exact(adj, ui, xi)
