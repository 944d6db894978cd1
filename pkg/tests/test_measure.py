import math

import pytest

from quadsurf import QuadraticForm, canonicalize_pair
from quadsurf.enumerate import Annulus, Region
from quadsurf.errors import QuadsurfError
from quadsurf.measure import (PolarData, c1_constant, c3_constant, dyadic_leading, polar_volume,
                              shell_volume_mc, sphere_area)

DATA31 = PolarData(1, 3, 1, 1.0)


def test_constants():
    assert sphere_area(0) == 2
    assert sphere_area(2) == pytest.approx(4 * math.pi)
    assert c1_constant(3, 1, 1, 5) == pytest.approx(4 * math.pi)
    assert c3_constant(3, 1, 1, 5) == pytest.approx(4 * math.pi / 4)
    with pytest.raises(QuadsurfError):
        c1_constant(3, 0, 2, 5)


def test_hyperboloid_closed_form():
    # x^2 + y^2 - z^2 = 1 in the ball of radius T has measure 2 pi sqrt((T^2 - 1) / 2)
    Q = QuadraticForm.diagonal([1, 1, -1])
    T = 5
    v = shell_volume_mc(Q, 1, None, None, Annulus.ball(T), h=0.01, n=400_000, seed=3)
    exact = 2 * math.pi * math.sqrt((T * T - 1) / 2)
    assert abs(v.value - exact) < 5 * v.stderr + 0.01 * exact


def test_polar_additive_in_region_and_shell():
    ann = Annulus(2, 6)
    whole = polar_volume(DATA31, Region.box((-1, 1)), ann).value
    parts = polar_volume(DATA31, Region([[(-1, 0)], [(0, 1)]]), ann).value
    assert parts == pytest.approx(whole, rel=1e-9)
    split = polar_volume(DATA31, Region.box((-1, 1)), Annulus(2, 4)).value + \
        polar_volume(DATA31, Region.box((-1, 1)), Annulus(4, 6)).value
    assert split == pytest.approx(whole, rel=1e-8)


def test_polar_approaches_leading_term():
    R = Region.box((0, 1))
    rel = []
    for T in (16, 64, 256):
        v = polar_volume(DATA31, R, Annulus.dyadic(T))
        assert v.leading == pytest.approx(dyadic_leading(DATA31, 1.0, T))
        rel.append(abs(v.value / v.leading - 1))
    assert rel[0] > rel[1] > rel[2]
    assert rel[2] < 1e-3


def test_mc_matches_polar(canonical_pair):
    R = Region.box((0, 1))
    ann = Annulus.dyadic(12)
    p = polar_volume(DATA31, R, ann).value
    m = shell_volume_mc(canonical_pair.Q, 1, canonical_pair.M, R, ann, h=0.01, n=400_000, seed=1)
    assert abs(m.value - p) < 5 * m.stderr + 0.01 * p


def test_mc_reproducible(canonical_pair):
    args = (canonical_pair.Q, 1, canonical_pair.M, Region.box((0, 1)), Annulus.dyadic(8))
    a = shell_volume_mc(*args, n=20_000, seed=5)
    b = shell_volume_mc(*args, n=20_000, seed=5)
    assert a.value == b.value and a.stderr == b.stderr


def test_from_canonical(canonical_pair, main_pair):
    d = PolarData.from_canonical(canonicalize_pair(canonical_pair.Q, canonical_pair.M), 1)
    assert (d.s, d.r1, d.r2, d.d) == (1, 3, 1, 5)
    with pytest.raises(QuadsurfError):
        PolarData.from_canonical(canonicalize_pair(main_pair.Q, main_pair.M), 1)


def test_bad_inputs():
    with pytest.raises(QuadsurfError):
        polar_volume(DATA31, Region.box((0, 1), (0, 1)), Annulus.ball(4))
    with pytest.raises(QuadsurfError):
        shell_volume_mc(QuadraticForm.diagonal([1, -1]), 1, None, None, Annulus.ball(2), h=0)
