"""Shared brute-force oracles and synthetic-configuration helpers."""

import numpy as np

from laceperc.lattice import TorusGeometry, ball, neighbors, origin
from laceperc.percolation import Configuration, SiteWindow


def synth_config(g: TorusGeometry, occupied) -> Configuration:
    """Configuration with an explicitly chosen occupied-site set."""
    occ = np.zeros(g.n_sites, dtype=np.uint8)
    for s in occupied:
        occ[g.site_index(s)] = 1
    c = Configuration.__new__(Configuration)
    c.geometry = g
    c.p = 0.5
    c.seed = 0
    c.stream = 0
    c.materialize = None
    c._key = 0
    c._threshold = 0
    c._dense = occ
    c._cache = {}
    return c


def patch_sites(g: TorusGeometry, lo: int, hi: int):
    """Torus sites whose centered representatives lie in [lo, hi]^d.

    With hi - lo well below L there is a vacant moat at the seam, so
    coordinate-space searches stay finite and wrap never helps."""
    from itertools import product

    return [tuple(c % g.L for c in p) for p in product(range(lo, hi + 1), repeat=g.d)]


def bfs_component_labels(occ, g: TorusGeometry):
    """Pure-Python BFS partition of occupied sites; -1 on vacant."""
    nbr = g.neighbor_table()
    lab = [-1] * g.n_sites
    nxt = 0
    for s in range(g.n_sites):
        if not occ[s] or lab[s] >= 0:
            continue
        stack = [s]
        lab[s] = nxt
        while stack:
            v = stack.pop()
            for w in nbr[v]:
                if occ[w] and lab[w] < 0:
                    lab[w] = nxt
                    stack.append(w)
        nxt += 1
    return lab


def same_partition(roots, labels, occ) -> bool:
    """Do union-find roots and BFS labels induce the same blocks?"""
    seen = {}
    used = set()
    for s in range(len(occ)):
        if occ[s]:
            if roots[s] < 0:
                return False
            if roots[s] in seen:
                if seen[roots[s]] != labels[s]:
                    return False
            else:
                if labels[s] in used:
                    return False
                seen[roots[s]] = labels[s]
                used.add(labels[s])
        elif roots[s] != -1:
            return False
    return True


# ---------------------------------------------------------------------------
# window connection events, by definition


def window_through(win: SiteWindow, mask: int, u, b, thick) -> bool:
    """u joined to b, and every such connection meets `thick` (or b is in it)."""
    if not win.connected(mask, u, b):
        return False
    if tuple(b) in thick:
        return True
    removed = win.mask_of(p for p in thick if p in win.index)
    return not win.connected(mask, u, b, removed_mask=removed)


def window_eprime(win: SiteWindow, mask: int, u, v, a_sites) -> bool:
    """Through-connection with no pivotal point itself reached through."""
    thick = set()
    for s in a_sites:
        s = tuple(s)
        thick.add(s)
        thick.update(neighbors(s))
    if not window_through(win, mask, u, v, thick):
        return False
    for w in win.pivotal_brute(mask, u, v):
        if window_through(win, mask, u, w, thick):
            return False
    return True


# ---------------------------------------------------------------------------
# marked-neighbor-pair scan: E' forces a long connection


def observation_scan(d: int = 3, min_edges: int = 4, cross_check_every: int = 997):
    """Exhaustive window check that E'(u, v; {a}) forces a long u-v path.

    a = 0 and u, v range over distinct neighbors of a; t = u + v - a. For
    every occupancy of the radius-2 ball around a with t vacant (or t = a),
    E'(u, v; {a}) must imply a self-avoiding occupied-interior u-v path of at
    least `min_edges` edges. Lattice symmetries fixing a reduce the pairs to
    the two representatives (u, -u) and (u, v) with v orthogonal.

    Only sites lying on some self-avoiding u-v path inside the window are
    enumerated. The remaining sites enter the events solely through
    connections that extra occupancy can only help, and never touch the
    long-path conclusion, so pinning them occupied covers the worst case.

    Returns [(n_eprime, n_violations, n_configs), ...] per representative.
    """
    a = origin(d)
    u = (1,) + (0,) * (d - 1)
    pairs = [(u, (-1,) + (0,) * (d - 1)), (u, (0, 1) + (0,) * (d - 2))]
    thick = {a, *neighbors(a)}
    results = []
    for u, v in pairs:
        t = tuple(ui + vi for ui, vi in zip(u, v))
        win = SiteWindow(ball(d, 2))
        full = (1 << win.n) - 1
        rel = 0
        for interior in win.sa_paths(full, u, v):
            rel |= interior
        ui, vi = win.index[u], win.index[v]
        thick_mask = win.mask_of(p for p in thick if p in win.index)
        tbit = 0 if t == a else 1 << win.index[t]
        assert tbit == 0 or rel & tbit
        rel_bits = [i for i in range(win.n) if rel >> i & 1]
        fixed = full & ~rel
        n_e = n_bad = n_cfg = 0
        for assign in range(1 << len(rel_bits)):
            mask = fixed
            m = assign
            while m:
                low = m & -m
                mask |= 1 << rel_bits[low.bit_length() - 1]
                m ^= low
            if mask & tbit:
                continue
            n_cfg += 1
            # v neighbors a, so v is in <A> and the through clause for the
            # pair is plain connectivity; pivotal points of a connected pair
            # are its occupied single cuts.
            ep = win.connected(mask, u, v)
            if ep:
                cand = win.reachable_interiors(mask, u) & ~(1 << vi)
                mm = cand
                while mm:
                    low = mm & -mm
                    mm ^= low
                    if win.connected(mask & ~low, u, v):
                        continue
                    if low & thick_mask or not win.connected(
                        mask, u, win.points[low.bit_length() - 1],
                        removed_mask=thick_mask,
                    ):
                        ep = False
                        break
            if n_cfg % cross_check_every == 0:
                assert ep == window_eprime(win, mask, u, v, [a])
            if ep:
                n_e += 1
                if not win.has_long_path(mask, u, v, min_edges):
                    n_bad += 1
        results.append((n_e, n_bad, n_cfg))
    return results
