from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadsurf import QuadraticForm, kernels
from quadsurf.enumerate import (Annulus, Region, brute_force_oracle, count_points, count_series,
                                enumerate_surface, exact_violations, filter_points, norm_histogram)
from quadsurf.errors import BudgetExceeded, QuadsurfError

BACKENDS = ["python"] + (["cython"] if kernels.have_compiled() else [])

# (fixture, region side or None, T, frozen count); each value was checked
# against brute_force_oracle when recorded
FROZEN = [
    ("q1", None, 1, 4),
    ("main_pair", (0, 1), 4, 52),
    ("main_pair", None, 4, 190),
    ("main_pair", (0, 1), 8, 159),
    ("exceptional_21", None, 5, 142),
    ("canonical_31", (-1, 1), 6, 310),
    ("q1", None, 12, 718),
]


def _args(spec, side):
    if side is None:
        return None, None
    return spec.M, Region.box(side)


@pytest.mark.parametrize("name,side,T,expected", FROZEN)
@pytest.mark.parametrize("backend", BACKENDS)
def test_frozen_counts(fixture_path, name, side, T, expected, backend):
    from quadsurf import load_pair
    spec = load_pair(fixture_path(name))
    M, R = _args(spec, side)
    assert count_points(spec.Q, spec.a, Annulus.ball(T), M, R, backend=backend) == expected


@pytest.mark.parametrize("name,side,T,expected", FROZEN[:3])
def test_oracle_matches_frozen(fixture_path, name, side, T, expected):
    from quadsurf import load_pair
    spec = load_pair(fixture_path(name))
    M, R = _args(spec, side)
    assert brute_force_oracle(spec.Q, spec.a, Annulus.ball(T), M, R) == expected


@pytest.mark.slow
def test_oracle_main_T10(main_pair):
    R = Region.box((0, 1))
    ann = Annulus.ball(10)
    assert brute_force_oracle(main_pair.Q, 1, ann, main_pair.M, R) == 231
    assert count_points(main_pair.Q, 1, ann, main_pair.M, R) == 231


def test_q1_unit_sphere_points(q1_pair):
    S = enumerate_surface(q1_pair.Q, 1, Annulus.ball(1))
    assert S.as_set() == {(0, 0, 1, 0), (0, 0, -1, 0), (0, 0, 0, 1), (0, 0, 0, -1)}
    assert count_points(q1_pair.Q, 1, Annulus(1, 1, open_inner=True)) == 0


def test_points_sorted_and_exact(main_pair):
    S = enumerate_surface(main_pair.Q, 1, Annulus.ball(9), main_pair.M, Region.box((0, 1)))
    assert S.count == len(S.points) > 0
    assert [tuple(p) for p in S.points] == sorted(tuple(p) for p in S.points)
    assert exact_violations(main_pair.Q, 1, S.points, main_pair.M, Region.box((0, 1))) == 0
    assert np.all((S.points ** 2).sum(1) <= 81)


def test_pruned_equals_filtered(main_pair):
    R = Region([[(0, Fraction(1, 2))], [(1, Fraction(5, 2))]])
    ann = Annulus.ball(11)
    full = enumerate_surface(main_pair.Q, 1, ann)
    pruned = enumerate_surface(main_pair.Q, 1, ann, main_pair.M, R)
    assert filter_points(full, main_pair.M, R).as_set() == pruned.as_set()


def test_empty_region_counts_zero(main_pair):
    assert count_points(main_pair.Q, 1, Annulus.ball(8), main_pair.M, Region.empty(1)) == 0


def test_region_scaling_doubles_count(main_pair):
    ann = Annulus.ball(12)
    c1 = count_points(main_pair.Q, 1, ann, main_pair.M, Region.box((0, 1)))
    c12 = count_points(main_pair.Q, 1, ann, main_pair.M, Region([[(0, 1)], [(1, 2)]]))
    c2 = count_points(main_pair.Q, 1, ann, main_pair.M, Region.box((0, 2)))
    # the shared face M(v) = 1 is irrational, so no point lies on it
    assert c12 == c2 >= c1


def test_threads_agree(main_pair):
    R = Region.box((0, 1))
    ann = Annulus.ball(20)
    one = count_points(main_pair.Q, 1, ann, main_pair.M, R, threads=1)
    assert count_points(main_pair.Q, 1, ann, main_pair.M, R, threads=3) == one


def test_histogram_cumulates(main_pair):
    edges = [4, 16, 64]
    h = norm_histogram(main_pair.Q, 1, edges)
    assert int(h.sum()) == count_points(main_pair.Q, 1, Annulus.ball(8))
    assert int(h[0]) == count_points(main_pair.Q, 1, Annulus.ball(2))


def test_count_series_matches_counts(main_pair):
    R = Region.box((0, 1))
    s = count_series(main_pair.Q, 1, main_pair.M, R, [4, 8, 16])
    assert s.columns == ("T", "count_ball", "count_annulus", "seconds")
    for T, ball, shell, _ in s.rows:
        assert ball == count_points(main_pair.Q, 1, Annulus.ball(T), main_pair.M, R)
        assert shell == count_points(main_pair.Q, 1, Annulus.dyadic(T), main_pair.M, R)
    with pytest.raises(QuadsurfError):
        count_series(main_pair.Q, 1, None, None, [8, 4])


def test_annulus_conventions():
    assert Annulus.dyadic(4).norm2_range() == (5, 16)
    assert Annulus(Fraction(3, 2), 2).norm2_range() == (3, 4)
    with pytest.raises(QuadsurfError):
        Annulus(3, 2)


def test_region_parse_and_overlap():
    R = Region.parse("0:1;1:2")
    assert R.volume() == 2 and R.dim == 1
    with pytest.raises(QuadsurfError):
        Region.parse("0:2;1:3")


def test_oracle_budget(main_pair):
    with pytest.raises(BudgetExceeded):
        brute_force_oracle(main_pair.Q, 1, Annulus.ball(100), budget=10 ** 6)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-2, 2), min_size=3, max_size=3), st.integers(-2, 3),
       st.integers(2, 4))
def test_diagonal_forms_vs_oracle(diag, a, T):
    if 0 in diag:
        diag = [x if x else 1 for x in diag]
    Q = QuadraticForm.diagonal(diag)
    ann = Annulus.ball(T)
    assert count_points(Q, a, ann, backend="python") == brute_force_oracle(Q, a, ann)
