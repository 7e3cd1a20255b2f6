"""Truncated-series ring, variable substitutions, and the fixed-point solve."""

from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from laceperc.series import (
    BOND_PC_IN_SIGMA,
    SITE_PC_IN_SIGMA,
    NonInvertibleError,
    TagMismatchError,
    TruncatedSeries,
    evaluate_series,
    expansion,
    geometric_shift,
    substitute_2d_to_sigma,
    substitute_sigma_to_2d,
)


def test_expansion_q_series_exact():
    res = expansion(2)
    assert res.q_series.var == "t"
    assert res.q_series.coeffs == (F(1), F(5, 2), F(31, 4))


def test_expansion_pc_is_t_times_q():
    res = expansion(2)
    assert res.pc_series.coeffs == (F(0), F(1), F(5, 2), F(31, 4))
    assert res.rounds >= 2


def test_expansion_refuses_untrusted_order():
    with pytest.raises(ValueError):
        expansion(3)


def test_expansion_matches_builtin_series_prefix():
    t_side = substitute_sigma_to_2d(SITE_PC_IN_SIGMA)
    assert expansion(2).pc_series.coeffs == t_side.coeffs[:4]


def test_site_series_in_2d_variable():
    t_side = substitute_sigma_to_2d(SITE_PC_IN_SIGMA)
    assert t_side.var == "t"
    assert t_side.coeffs == (
        F(0), F(1), F(5, 2), F(31, 4), F(75, 2), F(11977, 48), F(209183, 96),
    )


def test_bond_series_in_2d_variable():
    t_side = substitute_sigma_to_2d(BOND_PC_IN_SIGMA)
    assert t_side.coeffs == (
        F(0), F(1), F(1), F(7, 2), F(16), F(103), F(9487, 12),
    )


def test_substitutions_invert_each_other():
    for base in (SITE_PC_IN_SIGMA, BOND_PC_IN_SIGMA):
        back = substitute_2d_to_sigma(substitute_sigma_to_2d(base))
        assert back.var == "s" and back.coeffs == base.coeffs


def test_substitution_tag_checks():
    t_series = TruncatedSeries.make("t", [0, 1, 2])
    s_series = TruncatedSeries.make("s", [0, 1, 2])
    with pytest.raises(TagMismatchError):
        substitute_2d_to_sigma(s_series)
    with pytest.raises(TagMismatchError):
        substitute_sigma_to_2d(t_series)


def test_substitution_needs_zero_constant():
    with pytest.raises(ValueError):
        substitute_sigma_to_2d(TruncatedSeries.make("s", [1, 1]))


def test_mixed_tag_arithmetic_rejected():
    t_series = TruncatedSeries.make("t", [0, 1])
    s_series = TruncatedSeries.make("s", [0, 1])
    with pytest.raises(TagMismatchError):
        t_series + s_series
    with pytest.raises(TagMismatchError):
        t_series * s_series


def test_evaluate_series_is_exact():
    res = expansion(2)
    assert evaluate_series(res.pc_series, 9) == F(1, 18) + F(5, 2 * 18**2) + F(
        31, 4 * 18**3
    )
    with pytest.raises(TagMismatchError):
        evaluate_series(SITE_PC_IN_SIGMA, 9)


def test_geometric_shift_values():
    g = geometric_shift("t", 4, +1)
    assert g.coeffs == (F(0), F(1), F(1), F(1), F(1))
    h = geometric_shift("s", 4, -1)
    assert h.coeffs == (F(0), F(1), F(-1), F(1), F(-1))


def test_json_round_trip():
    s = substitute_sigma_to_2d(SITE_PC_IN_SIGMA)
    again = TruncatedSeries.from_json_dict(s.to_json_dict())
    assert again == s


def test_floats_rejected():
    with pytest.raises(TypeError):
        TruncatedSeries.make("t", [0.5, 1])


frac = st.fractions(min_value=-5, max_value=5, max_denominator=12)
series_st = st.lists(frac, min_size=1, max_size=6).map(
    lambda cs: TruncatedSeries.make("t", cs)
)
unit_st = st.lists(frac, min_size=1, max_size=6).map(
    lambda cs: TruncatedSeries.make("t", [F(1)] + cs[1:])
)


@given(series_st, series_st)
def test_add_commutes(a, b):
    assert a + b == b + a


@given(series_st, series_st, series_st)
def test_add_associates(a, b, c):
    assert (a + b) + c == a + (b + c)


@given(series_st)
def test_sub_self_is_zero(a):
    assert all(c == 0 for c in (a - a).coeffs)


@given(series_st, series_st)
def test_mul_commutes(a, b):
    assert a * b == b * a


@given(series_st, series_st, series_st)
def test_mul_distributes(a, b, c):
    assert a * (b + c) == a * b + a * c


@given(series_st, series_st, series_st)
def test_mul_associates(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(unit_st)
def test_inverse_is_inverse(a):
    prod = a * a.inverse()
    assert prod.coeffs == (F(1),) + (F(0),) * a.order


def test_inverse_needs_unit():
    with pytest.raises(NonInvertibleError):
        TruncatedSeries.make("t", [0, 1]).inverse()


@given(series_st)
def test_compose_identity(a):
    ident = TruncatedSeries.make("t", [0, 1][: a.order + 1], order=a.order)
    assert a.compose(ident) == a


@given(series_st)
def test_truncate_is_prefix(a):
    t = a.truncate(min(2, a.order))
    assert t.coeffs == a.coeffs[: t.order + 1]


@given(series_st)
def test_scale_matches_mul(a):
    assert a.scale(F(3, 2)) == a * F(3, 2) == F(3, 2) * a
