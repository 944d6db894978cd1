import math

import numpy as np
import pytest
from scipy.stats import special_ortho_group

from quadsurf.alpha import UnimodularLattice, alpha, alpha_of
from quadsurf.errors import QuadsurfError
from quadsurf.lattice import covolume, integer_kernel, lll, short_vectors


def random_unimodular(rng, d, steps=12):
    U = np.eye(d, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(d, 2, replace=False)
        U[i] += int(rng.integers(-2, 3)) * U[j]
    return U


def random_lattice(rng, d):
    t = rng.uniform(-1.5, 1.5, d)
    t -= t.mean()
    return special_ortho_group.rvs(d, random_state=rng) @ np.diag(np.exp(t)) \
        @ random_unimodular(rng, d)


def test_standard_lattice():
    r = alpha_of(np.eye(5))
    assert r.alpha == 1.0 and r.certified
    assert r.per_degree == [1.0] * 6


def test_flowed_lattice():
    t = 1.5
    B = np.diag([math.exp(-t), 1, 1, math.exp(t)])
    assert alpha(B) == pytest.approx(math.exp(t))
    assert alpha(np.diag([2, 0.5, 1.0])) == pytest.approx(2.0)


def test_per_degree_witness_covolume():
    B = np.diag([0.25, 1, 4.0])
    r = alpha_of(B)
    w = r.witnesses[1]
    assert w.dim == 1 and w.covolume == pytest.approx(0.25)
    assert r.per_degree[2] == pytest.approx(4.0)


@pytest.mark.parametrize("seed", range(4))
def test_invariant_under_basis_change_and_rotation(seed):
    rng = np.random.default_rng(seed)
    d = 4
    B = random_lattice(rng, d)
    a0 = alpha(B)
    assert alpha(B @ random_unimodular(rng, d)) == pytest.approx(a0, rel=1e-9)
    assert alpha(special_ortho_group.rvs(d, random_state=rng) @ B) == pytest.approx(a0, rel=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_wedge_matches_subsets(seed):
    rng = np.random.default_rng(100 + seed)
    B = random_lattice(rng, 3)
    w = alpha_of(B)
    s = alpha_of(B, radius=6.0, method="subsets")
    assert s.alpha == pytest.approx(w.alpha, rel=1e-9)


def test_alpha_at_least_one():
    rng = np.random.default_rng(7)
    for _ in range(10):
        assert alpha(random_lattice(rng, 4)) >= 1 - 1e-12


def test_unimodular_check():
    with pytest.raises(QuadsurfError):
        UnimodularLattice(np.diag([2.0, 1.0]))
    with pytest.raises(QuadsurfError):
        alpha_of(np.eye(2), radius=-1)


def test_lll_reduces_and_tracks_transform():
    B = np.diag([0.3, 1, 1 / 0.3]) @ np.array([[1, 2, 0], [0, 1, 3], [0, 0, 1]])
    Bl, U = lll(B)
    np.testing.assert_allclose(B @ U.astype(float), Bl, atol=1e-12)
    assert round(abs(np.linalg.det(U.astype(float)))) == 1
    np.testing.assert_allclose(np.abs(Bl), np.diag([0.3, 1, 1 / 0.3]), atol=1e-12)


def test_short_vectors_cube():
    X = short_vectors(np.eye(3), 1.5)[0]
    # half of the 18 vectors with |v|^2 in {1, 2}
    assert len(X) == 9
    assert set(map(int, (np.asarray(X) ** 2).sum(1))) == {1, 2}


def test_integer_kernel_and_covolume():
    K = np.array(integer_kernel([[1, 2, 3]]))
    assert K.shape == (2, 3) and not (K @ [1, 2, 3]).any()
    assert covolume(np.eye(3), [[1, 1, 0]]) == pytest.approx(math.sqrt(2))
