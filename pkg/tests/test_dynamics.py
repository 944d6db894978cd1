import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from quadsurf import canonicalize_pair
from quadsurf.bumps import PlateauBump, ProductBump, Zero, plateau
from quadsurf.dynamics import (CompactSampler, DiagonalFlow, F_value, conjugated_flow, f_basis,
                               flow_matrix, haar_block, j_approximation, j_integral,
                               spherical_alpha_average, spherical_F_average, surface_vector)
from quadsurf.enumerate import Annulus, count_points
from quadsurf.errors import QuadsurfError
from quadsurf.forms import canonical_gram
from quadsurf.measure import PolarData

DATA31 = PolarData(1, 3, 1, 1.0)


def test_flow_matrix_example():
    A = flow_matrix(5, 1, math.log(2))
    np.testing.assert_allclose(np.diag(A), [1, 0.5, 1, 1, 2])
    np.testing.assert_allclose(flow_matrix(5, 1, 0.3) @ flow_matrix(5, 1, 0.4),
                               flow_matrix(5, 1, 0.7))
    with pytest.raises(QuadsurfError):
        DiagonalFlow(3, 2)


def test_flow_preserves_canonical_form():
    G = canonical_gram(1, 3, 1)
    A = flow_matrix(5, 1, 1.3)
    np.testing.assert_allclose(A.T @ G @ A, G, atol=1e-12)


def test_conjugated_flow_preserves_pair(main_pair):
    cf = canonicalize_pair(main_pair.Q, main_pair.M)
    h = conjugated_flow(cf.g, cf.s, 0.8)
    G = main_pair.Q.to_float()
    np.testing.assert_allclose(h.T @ G @ h, G, atol=1e-9)
    Mf = main_pair.M.to_float()
    np.testing.assert_allclose(Mf @ h, Mf, atol=1e-9)


def test_haar_small_cases():
    rng = np.random.default_rng(0)
    assert haar_block(rng, 1).tolist() == [[1.0]]
    for _ in range(20):
        k = haar_block(rng, 3)
        np.testing.assert_allclose(k @ k.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(k) == pytest.approx(1)


def test_haar_moments_and_distribution():
    rng = np.random.default_rng(1)
    n = 4000
    ks = np.array([haar_block(rng, 3) for _ in range(n)])
    assert np.abs(ks.mean(0)).max() < 4 / math.sqrt(n)
    # first column is uniform on S^2: its first coordinate is uniform on [-1, 1]
    assert stats.kstest(ks[:, 0, 0], "uniform", args=(-1, 2)).pvalue > 1e-3


def test_sampler_preserves_canonical_form():
    S = CompactSampler(1, 3, 1, seed=2)
    G = canonical_gram(1, 3, 1)
    for k in S.sample(10):
        np.testing.assert_allclose(k.T @ G @ k, G, atol=1e-12)
        np.testing.assert_allclose(k @ k.T, np.eye(5), atol=1e-12)
        assert k[0, 0] == pytest.approx(1)
    P = f_basis(5, 1)
    np.testing.assert_allclose(P @ P.T, np.eye(5), atol=1e-15)


def test_sampler_rejects():
    with pytest.raises(QuadsurfError):
        CompactSampler(1, 0, 1)
    with pytest.raises(QuadsurfError):
        CompactSampler(1, 3, 1, orbit="U")


def test_alpha_average_standard_lattice():
    s = spherical_alpha_average(np.eye(5), DiagonalFlow(5, 1), CompactSampler(1, 3, 1, seed=0),
                                [0.0, 1.0], n=10)
    assert s.values[0] == pytest.approx(1.0)
    assert s.values[1] >= 1.0
    assert s.excluded == [0.0, 0.0]


def test_plateau_profile():
    np.testing.assert_allclose(plateau(np.array([-1, 0, 0.5, 1, 2])), [1, 1, 0.5, 0, 0])
    b = PlateauBump((0.0, 0.0), 1.0, 2.0)
    np.testing.assert_allclose(b(np.array([[0, 0.5], [1.5, 0], [3, 0]])), [1, 0.5, 0])
    assert b.support_radius == 2.0


def test_F_counts_ball_points(main_pair):
    # every integer point has |v|^2 <= 12 or >= 13 > 3.6^2, so F counts the ball
    f = PlateauBump((0.0,) * 5, 3.5, 3.6)
    assert F_value(f, main_pair.Q, 1, np.eye(5)) == count_points(main_pair.Q, 1, Annulus.ball(Fraction(7, 2)))
    assert F_value(Zero(5), main_pair.Q, 1, np.eye(5)) == 0.0


def test_F_average_zero_function(main_pair):
    s = spherical_F_average(Zero(5), main_pair.Q, 1, np.eye(5), DiagonalFlow(5, 1),
                            CompactSampler(1, 3, 1), [0.0, 1.0], n=3)
    assert s.values == [0.0, 0.0]


def test_j_integral_zero_and_linear():
    f = PlateauBump((0.5, 1.0, 0.1, 0.0, 0.3), 0.2, 0.4)
    j = j_integral(f, DATA31, [0.5], 1.0, nodes=2e5)
    assert j > 0
    assert j_integral(f.scaled(3.0), DATA31, [0.5], 1.0, nodes=2e5) == pytest.approx(3 * j)
    assert j_integral(Zero(5), DATA31, [0.5], 1.0) == 0.0


def test_j_integral_separable():
    # free last coordinate: J = r^-2 * phi_ell * phi_r * prod over middle of (inner + outer)
    inner = (0.1, 0.1, 0.2, 0.1, 0.0)
    outer = (0.3, 0.4, 0.5, 0.3, math.inf)
    f = ProductBump((0.5, 1.0, 0.0, 0.0, 0.0), inner, outer)
    ell, r = 0.6, 1.2
    expect = float(f.factor(0, ell) * f.factor(1, r)) * (0.2 + 0.5) * (0.1 + 0.3) / r ** 2
    assert j_integral(f, DATA31, [ell], r, nodes=4e5) == pytest.approx(expect, rel=1e-6)


def test_j_approximation_zero_function():
    v = surface_vector(DATA31, [0.5], 20.0, np.random.default_rng(0))
    r = j_approximation(Zero(5), DATA31, v, 2.0)
    assert r.error == 0.0 and r.j == 0.0


def test_surface_vector_on_surface():
    rng = np.random.default_rng(4)
    G = canonical_gram(1, 3, 1)
    v = surface_vector(DATA31, [0.5], 10.0, rng)
    assert v @ G @ v == pytest.approx(1.0)
    assert v[0] == pytest.approx(0.5)
    assert np.linalg.norm(v) == pytest.approx(10.0)
