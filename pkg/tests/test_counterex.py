import math
from fractions import Fraction

import pytest

from quadsurf.counterex import (ExceptionalFamily, Family, band_containment_check, banded_count,
                                beta_exact, beta_perturbation, growth_fit, hyperbola_reps,
                                r2_factor, r2_trial, s_count, s_points, s_series,
                                two_square_reps)
from quadsurf.enumerate import Annulus, Region, brute_force_oracle, count_points
from quadsurf.errors import QuadsurfError

FAMILIES = ["Q1", "Q2", "Q3"]


@pytest.mark.parametrize("which,T,expected", [
    ("Q1", 3, 12), ("Q1", 6, 44), ("Q1", 10, 76),
    ("Q2", 3, 12), ("Q2", 6, 52), ("Q2", 10, 92),
    ("Q3", 3, 36), ("Q3", 6, 132), ("Q3", 10, 332),
])
def test_frozen_slice_counts(which, T, expected):
    fam = ExceptionalFamily(which)
    assert s_count(fam, T) == expected
    assert s_count(fam, T, method="trial") == expected


@pytest.mark.parametrize("which", FAMILIES)
@pytest.mark.parametrize("T", [3, 6])
def test_slice_matches_enumeration(which, T):
    fam = ExceptionalFamily(which)
    pts = s_points(fam, T)
    assert len(pts) == s_count(fam, T)
    Q, L = fam.form(), fam.linear()
    for x in pts:
        assert Q(x) == 1 and L(x)[0] == 0 and sum(c * c for c in x) <= T * T
    R = Region.box((0, 0))
    assert count_points(Q, 1, Annulus.ball(T), L, R) == len(pts)


def test_slice_matches_oracle_small():
    fam = ExceptionalFamily("Q1", alpha=Fraction(1, 4))
    assert s_count(fam, 5) == brute_force_oracle(fam.form(), 1, Annulus.ball(5), fam.linear(),
                                                 Region.box((0, 0)))


def test_threads_agree():
    fam = ExceptionalFamily("Q1")
    assert s_count(fam, 400, threads=3) == s_count(fam, 400)


def test_r2():
    assert [r2_factor(n) for n in range(11)] == [1, 4, 4, 0, 4, 8, 0, 0, 4, 4, 8]
    assert all(r2_trial(n) == r2_factor(n) for n in range(300))
    assert len(two_square_reps(25)) == 12
    # x4^2 - x3^2 = 15 with x3^2 + x4^2 <= 100: only (+-1, +-4)
    assert sorted(hyperbola_reps(15, 100)) == [(-1, -4), (-1, 4), (1, -4), (1, 4)]


def test_beta_examples():
    assert beta_perturbation(1, 10, 1) == pytest.approx(1.17320508, abs=1e-8)
    assert beta_perturbation(1, 10, -1) == pytest.approx(0.82679492, abs=1e-8)
    assert beta_perturbation(0, 4, 1) == 0.25
    assert beta_perturbation(0, 4, -1) == -0.25
    b = beta_exact(Fraction(1), 10, 1)
    assert float(b) == pytest.approx(beta_perturbation(1, 10, 1), abs=1e-15)
    assert (b - beta_exact(Fraction(1), 10, -1)) == beta_exact(Fraction(1), 5, 1) - 1


def test_band_check_small():
    r = band_containment_check(ExceptionalFamily("Q1"), 64)
    assert r.points == 464 and r.violations == 0 and r.sharp_violations == 0


def test_banded_count_exceeds_slice():
    fam = ExceptionalFamily("Q1")
    T = 128
    c = banded_count(fam, beta_exact(Fraction(1), T, 1), T, Fraction(9, 20), 1)
    assert c > 0


def test_growth_fit_synthetic():
    T = [2.0 ** k for k in range(4, 12)]
    f = growth_fit([(t, 3 * t * math.log(t)) for t in T])
    assert f.exponent == pytest.approx(1, abs=1e-9) and f.log_coef == pytest.approx(1, abs=1e-9)
    f = growth_fit([(t, 5 * t * t) for t in T])
    assert f.exponent == pytest.approx(2, abs=1e-9) and f.log_coef == pytest.approx(0, abs=1e-9)
    with pytest.raises(QuadsurfError):
        growth_fit([(t, t) for t in T[:3]])
    with pytest.raises(QuadsurfError):
        growth_fit([(1.5, 1), (2, 1), (2.5, 1), (3, 1)])


def test_series_columns():
    s = s_series(ExceptionalFamily("Q1"), [16, 32])
    assert list(s.columns) == ["T", "count", "count_over_TlogT"]
    assert s.rows[0][1] == s_count(ExceptionalFamily("Q1"), 16)


def test_family_validation():
    assert ExceptionalFamily("Q3").dim == 5
    assert ExceptionalFamily("Q1", alpha=Fraction(9, 4)).sqrt_alpha_rational
    assert not ExceptionalFamily("Q1", alpha=2).sqrt_alpha_rational
    with pytest.raises(QuadsurfError):
        ExceptionalFamily("Q1", alpha=-1)
    with pytest.raises(ValueError):
        ExceptionalFamily("Q4")
    assert Family("Q2") is Family.Q2
