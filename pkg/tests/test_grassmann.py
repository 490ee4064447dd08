import math

import numpy as np
import pytest

from margbounds import grassmann
from margbounds.grassmann import (
    ExponentAssignment,
    Frame,
    Subspace,
    box2_exponents,
    frame_of_complement,
    grassmann_search_max,
    haar_directions,
    haar_sample,
    orthonormal_complement,
    parallelepiped_projection_check,
    projection_weights,
)


def test_subspace_validation():
    with pytest.raises(ValueError):
        Subspace(np.array([[1.0, 0.0], [1.0, 0.0]]))  # not orthonormal
    with pytest.raises(ValueError):
        Subspace(np.ones((2, 3)))  # k > n


def test_subspace_vector_orientation():
    e = Subspace(np.array([1.0, 0.0, 0.0]))
    assert e.basis.shape == (3, 1)
    assert e.k == 1


def test_subspace_projector_idempotent():
    e = haar_sample(5, 2, seed=3)
    p = e.projector()
    assert np.allclose(p @ p, p, atol=1e-12)
    assert np.trace(p) == pytest.approx(2.0)


def test_subspace_json_roundtrip():
    e = haar_sample(4, 2, seed=5)
    e2 = Subspace.from_json_dict(e.to_json_dict())
    assert np.allclose(e.basis, e2.basis, atol=1e-15)


def test_span_and_coordinate():
    e = Subspace.span([np.array([1.0, 1.0, 0.0]), np.array([0.0, 0.0, 2.0])])
    assert e.k == 2
    c = Subspace.coordinate(4, [1, 3])
    assert c.basis[1, 0] == 1.0 and c.basis[3, 1] == 1.0


def test_haar_sample_deterministic():
    a = haar_sample(6, 3, seed=9)
    b = haar_sample(6, 3, seed=9)
    assert np.array_equal(a.basis, b.basis)
    assert not np.array_equal(a.basis, haar_sample(6, 3, seed=10).basis)


def test_haar_directions_unit_rows():
    d = haar_directions(5, 100, seed=2)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0, atol=1e-12)


def test_orthonormal_complement():
    e = haar_sample(7, 3, seed=1)
    v = orthonormal_complement(e)
    assert v.k == 4
    assert np.abs(e.basis.T @ v.basis).max() < 1e-12


def test_complement_of_full_space():
    e = haar_sample(3, 3, seed=4)
    assert orthonormal_complement(e).k == 0


def test_frame_identity():
    e = haar_sample(6, 2, seed=8)
    fr = frame_of_complement(e)
    assert fr.vectors.shape == (6, 4)
    # the defining property: sum of outer products is the identity
    gram = fr.vectors.T @ fr.vectors
    assert np.abs(gram - np.eye(4)).max() < 1e-12
    assert fr.norms.max() <= 1.0 + 1e-12
    assert np.sum(fr.norms**2) == pytest.approx(4.0)


def test_frame_rejects_non_tight():
    with pytest.raises(ValueError):
        Frame(np.array([[1.0, 0.0], [1.0, 0.0]]))


def test_exponent_assignment_validation():
    ExponentAssignment(np.array([0.5, 0.5, 1.0]), 2.0)
    with pytest.raises(ValueError):
        ExponentAssignment(np.array([1.5, 0.5]), 2.0)
    with pytest.raises(ValueError):
        ExponentAssignment(np.array([0.5, 0.5]), 2.0)


def test_projection_weights_sum():
    e = haar_sample(5, 2, seed=6)
    w = projection_weights(e)
    assert w.betas.sum() == pytest.approx(2.0)
    assert np.all(w.betas >= 0.0) and np.all(w.betas <= 1.0)


def test_box2_exponents_valid_assignment():
    for seed in range(30):
        n = 4 + seed % 3
        k = 1 + seed % (n // 2)
        h = orthonormal_complement(haar_sample(n, k, seed=seed))
        ea = box2_exponents(h)
        assert ea.betas.sum() == pytest.approx(n - k, abs=1e-9)
        assert np.all(ea.betas >= -1e-12) and np.all(ea.betas <= 1.0 + 1e-12)


def test_box2_exponents_base_branch():
    # coordinate complement: all projections onto H-perp are 0 or 1
    h = Subspace.coordinate(4, [0, 1, 2])  # k = 1
    betas = box2_exponents(h).betas
    assert betas == pytest.approx([1.0, 1.0, 1.0, 0.0])


def test_box2_exponents_k_limit():
    h = orthonormal_complement(haar_sample(4, 3, seed=0))  # k = 3 > n/2
    with pytest.raises(ValueError):
        box2_exponents(h)


def test_parallelepiped_projection_lemma():
    rng = np.random.default_rng(0)
    violations = 0
    for _ in range(1000):
        n = int(rng.integers(3, 7))
        m = int(rng.integers(1, n - 1))
        b = rng.normal(size=n)
        b /= np.linalg.norm(b)
        gens = rng.normal(size=(n, m))
        gens -= np.outer(b, b @ gens)
        i = int(rng.integers(0, n))
        lhs, rhs = parallelepiped_projection_check(b, gens.T, i)
        if lhs > rhs * (1.0 + 1e-9):
            violations += 1
    assert violations == 0


def test_parallelepiped_projection_equality_case():
    # b = e1, generators in e1-perp: projection along coordinate 1 is identity
    b = np.array([1.0, 0.0, 0.0])
    gens = [np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 2.0])]
    lhs, rhs = parallelepiped_projection_check(b, gens, 0)
    assert lhs == pytest.approx(2.0)
    assert rhs == pytest.approx(2.0)


def test_search_max_finds_cube_diagonal():
    # max over lines of |<theta, (1,1)>/sqrt(2)| peaks at the diagonal
    target = np.array([1.0, 1.0]) / math.sqrt(2.0)

    def objective(sub):
        return abs(float(sub.basis[:, 0] @ target))

    best, val = grassmann_search_max(objective, 2, 1, restarts=4, steps=150, seed=3)
    assert val == pytest.approx(1.0, abs=1e-3)


def test_search_max_deterministic():
    def objective(sub):
        return float(np.abs(sub.basis).max())

    a = grassmann_search_max(objective, 4, 2, restarts=2, steps=50, seed=11)
    b = grassmann_search_max(objective, 4, 2, restarts=2, steps=50, seed=11)
    assert a[1] == b[1]
    assert np.array_equal(a[0].basis, b[0].basis)
