"""Lattice primitives: norms, balls, torus indexing, neighbor tables."""

from math import comb

import pytest
from hypothesis import given, strategies as st

from laceperc.lattice import (
    TorusGeometry,
    ball,
    ball_volume,
    l1_norm,
    linf_norm,
    neighbors,
    origin,
    point_add,
    point_sub,
    unit_steps,
)

points = st.integers(1, 4).flatmap(
    lambda d: st.tuples(*([st.integers(-6, 6)] * d))
)


def test_origin_and_unit_steps():
    assert origin(3) == (0, 0, 0)
    assert sorted(unit_steps(2)) == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    assert len(list(unit_steps(5))) == 10


@given(points)
def test_neighbors_are_at_l1_distance_one(x):
    ns = list(neighbors(x))
    assert len(ns) == 2 * len(x)
    assert len(set(ns)) == len(ns)
    for y in ns:
        assert l1_norm(point_sub(y, x)) == 1


@given(points, points)
def test_norm_triangle_inequalities(x, y):
    assert l1_norm(point_add(x, y)) <= l1_norm(x) + l1_norm(y)
    assert linf_norm(point_add(x, y)) <= linf_norm(x) + linf_norm(y)
    assert linf_norm(x) <= l1_norm(x) <= len(x) * linf_norm(x)


@pytest.mark.parametrize("d,r", [(1, 3), (2, 2), (3, 2), (4, 1)])
def test_ball_is_exactly_the_l1_ball(d, r):
    pts = list(ball(d, r))
    assert len(pts) == len(set(pts)) == ball_volume(d, r)
    assert all(l1_norm(x) <= r and len(x) == d for x in pts)
    assert ball_volume(d, r) == sum(
        2**k * comb(d, k) * comb(r, k) for k in range(min(d, r) + 1)
    )


def test_torus_wrap_and_indexing_are_inverse():
    g = TorusGeometry(d=3, L=6)
    assert g.n_sites == 216
    for idx in range(g.n_sites):
        assert g.site_index(g.site_point(idx)) == idx
    assert g.site_index((7, -3, 5)) == g.site_index((1, 3, -1))
    assert g.wrap((7, -3, 5)) == (1, -3, -1)


def test_neighbor_table_matches_pointwise_neighbors():
    g = TorusGeometry(d=2, L=4)
    table = g.neighbor_table()
    assert table.shape == (16, 4)
    for idx in range(g.n_sites):
        want = sorted(g.site_index(y) for y in neighbors(g.site_point(idx)))
        assert sorted(int(j) for j in table[idx]) == want
        assert sorted(g.index_neighbors(idx)) == want


def test_neighbor_table_is_symmetric():
    g = TorusGeometry(d=3, L=4)
    table = g.neighbor_table()
    for idx in range(g.n_sites):
        for j in table[idx]:
            assert idx in table[int(j)]


def test_degenerate_sizes_rejected():
    with pytest.raises(ValueError):
        TorusGeometry(d=0, L=4)
    with pytest.raises(ValueError):
        TorusGeometry(d=2, L=2)
    with pytest.raises(ValueError):
        TorusGeometry(d=2, L=5)
