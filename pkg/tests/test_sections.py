import math

import numpy as np
import pytest

from margbounds.grassmann import Subspace, haar_directions, haar_sample, orthonormal_complement
from margbounds.sections import (
    Box,
    hyperplane_section_exact,
    hyperplane_section_sinc,
    hyperplane_sections_exact_batch,
    section_mc,
    section_quadrature,
    sharp_block_subspace,
    sharp_paired_subspace,
    unit_cube,
)


def _diag(n):
    return np.ones(n) / math.sqrt(n)


def test_box_validation():
    with pytest.raises(ValueError):
        Box([1.0, -1.0])
    with pytest.raises(ValueError):
        Box([])
    assert unit_cube(4).volume() == 1.0


def test_q2_diagonal_exact():
    assert hyperplane_section_exact(unit_cube(2), _diag(2)) == pytest.approx(
        math.sqrt(2.0), abs=1e-12
    )


def test_q3_diagonal_exact():
    # 3 sqrt(3) / 4
    assert hyperplane_section_exact(unit_cube(3), _diag(3)) == pytest.approx(
        3.0 * math.sqrt(3.0) / 4.0, abs=1e-12
    )


def test_q4_diagonal_exact():
    assert hyperplane_section_exact(unit_cube(4), _diag(4)) == pytest.approx(
        4.0 / 3.0, abs=1e-12
    )


def test_exact_rejects_zero_coordinates():
    with pytest.raises(ValueError):
        hyperplane_section_exact(unit_cube(3), np.array([1.0, 0.0, 0.0]))


def test_sinc_facet_case():
    got = hyperplane_section_sinc(unit_cube(3), np.array([1.0, 0.0, 0.0]))
    assert got == pytest.approx(1.0, abs=1e-12)


def test_sinc_matches_exact_diagonals():
    for n in (2, 3, 4, 6):
        want = hyperplane_section_exact(unit_cube(n), _diag(n))
        got = hyperplane_section_sinc(unit_cube(n), _diag(n), tol=1e-10)
        assert got == pytest.approx(want, abs=1e-9)


def test_sinc_two_nonzero_coefficients():
    a = np.array([3.0, 4.0, 0.0]) / 5.0
    want = hyperplane_section_exact(Box([1.0, 1.0]), np.array([0.6, 0.8]))
    got = hyperplane_section_sinc(unit_cube(3), a, tol=1e-10)
    assert got == pytest.approx(want, abs=1e-9)


def test_cross_route_random_boxes():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(2, 5))
        sides = rng.uniform(0.3, 2.5, size=n)
        a = rng.normal(size=n)
        a /= np.linalg.norm(a)
        if np.abs(a).min() < 1e-3:
            continue
        box = Box(sides)
        exact = hyperplane_section_exact(box, a)
        sinc = hyperplane_section_sinc(box, a, tol=1e-9)
        quad = section_quadrature(box, orthonormal_complement(Subspace(a)))
        assert sinc == pytest.approx(exact, abs=2e-9)
        assert quad == pytest.approx(exact, rel=1e-9)


def test_batch_matches_single():
    box = unit_cube(5)
    dirs = haar_directions(5, 40, seed=4)
    batch = hyperplane_sections_exact_batch(box, dirs)
    singles = [hyperplane_section_exact(box, a) for a in dirs]
    assert batch == pytest.approx(singles, rel=1e-10)


def test_section_quadrature_coordinate_plane():
    h = Subspace.coordinate(4, [0, 1])
    assert section_quadrature(unit_cube(4), h) == pytest.approx(1.0)


def test_section_quadrature_decomposable_high_dim():
    # paired complement splits into orthogonal one-dimensional blocks
    e = sharp_paired_subspace(6, 2)
    h = orthonormal_complement(e)  # dimension 4, decomposable
    assert section_quadrature(unit_cube(6), h) == pytest.approx(2.0, abs=1e-12)


def test_section_quadrature_irreducible_guard():
    h = haar_sample(6, 4, seed=5)
    with pytest.raises(ValueError):
        section_quadrature(unit_cube(6), h)


def test_section_mc_agrees():
    # diagonal chord of the 2x1 rectangle clipped by the short sides: sqrt(2)
    a = np.array([1.0, 1.0]) / math.sqrt(2.0)
    h = Subspace(a)
    est, se = section_mc(Box([2.0, 1.0]), h, samples=200000, seed=8)
    assert se > 0.0
    assert est == pytest.approx(math.sqrt(2.0), abs=4.0 * se)


def test_section_mc_deterministic():
    h = haar_sample(4, 2, seed=2)
    a = section_mc(unit_cube(4), h, 50000, seed=3)
    b = section_mc(unit_cube(4), h, 50000, seed=3)
    assert a == b


def test_sharp_block_subspace_geometry():
    e = sharp_block_subspace(6, 3)
    h = orthonormal_complement(e)
    got = section_quadrature(unit_cube(6), h)
    assert got == pytest.approx((6.0 / 3.0) ** 1.5, abs=1e-10)


def test_sharp_block_divisibility_guard():
    with pytest.raises(ValueError):
        sharp_block_subspace(6, 2)  # n - k = 4 does not divide 6


def test_sharp_paired_subspace_geometry():
    for n, k in ((4, 2), (6, 2), (6, 3)):
        e = sharp_paired_subspace(n, k)
        h = orthonormal_complement(e)
        got = section_quadrature(unit_cube(n), h)
        assert got == pytest.approx(2.0 ** (k / 2.0), abs=1e-10)


def test_ball_upper_bound_on_haar_directions():
    box = unit_cube(6)
    dirs = haar_directions(6, 2000, seed=12)
    vals = hyperplane_sections_exact_batch(box, dirs)
    assert vals.max() <= math.sqrt(2.0) + 1e-8
    assert vals.min() >= 1.0 - 1e-8  # central sections of the cube are >= 1
