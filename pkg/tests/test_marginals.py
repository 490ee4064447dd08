import math

import numpy as np
import pytest

from margbounds.densities import (
    ProductDensity,
    StepDensity,
    cube_density,
    random_product_density,
    uniform_density,
)
from margbounds.grassmann import Subspace, haar_sample, orthonormal_complement
from margbounds.marginals import (
    MarginalQuery,
    cube_hyperplane_section,
    default_grid,
    marginal_at,
    marginal_grid_sup,
    marginal_mc,
    rogozin_check,
    small_ball,
    small_ball_bound,
    verify_main_theorem,
)
from margbounds.sections import section_quadrature, unit_cube


def _diag_subspace(n):
    return Subspace(np.ones(n) / math.sqrt(n))


def test_coordinate_marginal_of_cube():
    f = cube_density(4)
    e = Subspace.coordinate(4, [0, 1])
    assert marginal_at(MarginalQuery(f, e, [0.0, 0.0])) == pytest.approx(1.0, abs=1e-10)


def test_q2_diagonal_marginal():
    f = cube_density(2)
    got = marginal_at(MarginalQuery(f, _diag_subspace(2), [0.0]))
    assert got == pytest.approx(math.sqrt(2.0), abs=1e-8)


def test_shifted_coordinate_marginal():
    g = StepDensity([(0.0, 0.5, 2.0)])
    f = ProductDensity([g, g])
    e = Subspace.coordinate(2, [0])
    got = marginal_at(MarginalQuery(f, e, [0.25]))
    assert got == pytest.approx(2.0, abs=1e-10)


def test_zero_frame_row_zero_value():
    g = StepDensity([(0.0, 0.5, 2.0)])
    f = ProductDensity([g, g])
    e = Subspace.coordinate(2, [0])
    assert marginal_at(MarginalQuery(f, e, [-1.0])) == 0.0


def test_marginal_matches_section_for_cube():
    # Lemma: the cube marginal at 0 is the complement section volume
    for seed in range(10):
        n = 3 + seed % 2
        k = 1 + seed % 2
        e = haar_sample(n, k, seed=seed)
        f = cube_density(n)
        got = marginal_at(MarginalQuery(f, e, np.zeros(k)))
        want = section_quadrature(unit_cube(n), orthonormal_complement(e))
        assert got == pytest.approx(want, rel=1e-10)


def test_coordinate_marginal_normalization():
    # for coordinate E the marginal is the product of the kept factors, so
    # its integral is the product of their masses: exactly 1
    f = random_product_density(6, 4)
    e = Subspace.coordinate(4, [1, 2])
    total = 0.0
    for lo1, hi1, v1 in f.factors[1].pieces:
        for lo2, hi2, v2 in f.factors[2].pieces:
            x = [0.5 * (lo1 + hi1), 0.5 * (lo2 + hi2)]
            val = marginal_at(MarginalQuery(f, e, x))
            assert val == pytest.approx(v1 * v2, rel=1e-10)
            total += val * (hi1 - lo1) * (hi2 - lo2)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_marginal_mc_agrees_with_exact():
    rng = np.random.default_rng(5)
    misses = 0
    for trial in range(30):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(max(1, n - 3), n))
        f = random_product_density(trial, n)
        e = haar_sample(n, k, seed=trial)
        x = 0.1 * rng.normal(size=k) + e.basis.T @ f.support_midpoints()
        q = MarginalQuery(f, e, x)
        exact = marginal_at(q)
        est, se = marginal_mc(q, 60000, 1.0, seed=trial)
        if abs(est - exact) > 3.0 * se + 1e-12:
            misses += 1
    assert misses <= 1  # 3-sigma criterion: rare misses allowed


def test_marginal_mc_deterministic():
    f = cube_density(3)
    e = haar_sample(3, 1, seed=1)
    q = MarginalQuery(f, e, [0.0])
    assert marginal_mc(q, 5000, 1.0, seed=2) == marginal_mc(q, 5000, 1.0, seed=2)


def test_marginal_mc_se_scaling():
    f = random_product_density(8, 3)
    e = haar_sample(3, 1, seed=8)
    q = MarginalQuery(f, e, [0.0])
    _, se1 = marginal_mc(q, 20000, 1.0, seed=3)
    _, se2 = marginal_mc(q, 80000, 1.0, seed=3)
    assert se2 == pytest.approx(se1 / 2.0, rel=0.2)


def test_grid_sup_q2_diagonal():
    f = cube_density(2)
    e = _diag_subspace(2)
    radius, step = default_grid(f, e)
    got = marginal_grid_sup(f, e, radius, step)
    assert math.sqrt(2.0) - 1e-6 <= got <= math.sqrt(2.0) + 1e-9


def test_grid_sup_translation_covariance():
    u = uniform_density(5.0, 6.0)
    f = ProductDensity([u, u])
    e = _diag_subspace(2)
    radius, step = default_grid(f, e)
    got = marginal_grid_sup(f, e, radius, step)
    assert got == pytest.approx(math.sqrt(2.0), abs=1e-6)


def test_grid_sup_coordinate_subspace():
    f = random_product_density(11, 3)
    e = Subspace.coordinate(3, [0, 1])
    radius, step = default_grid(f, e)
    got = marginal_grid_sup(f, e, radius, step)
    want = f.factors[0].sup_norm() * f.factors[1].sup_norm()
    assert got == pytest.approx(want, rel=1e-6)


def test_grid_budget_guard():
    f = cube_density(4)
    e = haar_sample(4, 4, seed=0)
    with pytest.raises(ValueError):
        marginal_grid_sup(f, e, 1.0, 1e-4)


def test_verify_main_theorem_sharp():
    rec = verify_main_theorem(cube_density(2), _diag_subspace(2))
    assert rec["pass"]
    assert rec["slack"] == pytest.approx(0.0, abs=1e-6)


def test_verify_main_theorem_random():
    for trial in range(25):
        n = 3 + trial % 2
        k = trial % (n - 1) + 1
        if n - k > 3:
            continue
        f = random_product_density(trial, n)
        e = haar_sample(n, k, seed=trial + 100)
        rec = verify_main_theorem(f, e, tol=1e-4)
        assert rec["pass"], rec


def test_cube_hyperplane_section_zero_coords():
    assert cube_hyperplane_section(np.array([1.0, 0.0, 0.0])) == 1.0
    got = cube_hyperplane_section(np.array([0.6, 0.8, 0.0]))
    # reduces to the 2-D section with normal (0.6, 0.8)
    assert got == pytest.approx(1.0 / 0.8)


def test_rogozin_equality_cube_diagonal():
    for n in (2, 3, 4):
        f = cube_density(n)
        theta = np.ones(n) / math.sqrt(n)
        sup_lb, cs = rogozin_check(f, theta)
        assert sup_lb == pytest.approx(cs, abs=1e-6)


def test_rogozin_coordinate_direction():
    f = ProductDensity([uniform_density(0.0, 1.0)] * 3)
    sup_lb, cs = rogozin_check(f, np.array([1.0, 0.0, 0.0]))
    assert sup_lb == pytest.approx(1.0, abs=1e-9)
    assert cs == pytest.approx(1.0)


def test_rogozin_rejects_out_of_class():
    f = ProductDensity([StepDensity([(0.0, 0.5, 2.0)])] * 2)  # sup norm 2
    with pytest.raises(ValueError):
        rogozin_check(f, np.array([1.0, 0.0]))


def test_small_ball_uniform_coordinate():
    f = cube_density(3)
    e = Subspace.coordinate(3, [0])
    eps = 0.1
    est, se, bound = small_ball(f, e, [0.0], eps, 100000, seed=4)
    assert est == pytest.approx(2.0 * eps, abs=3.0 * se)
    assert bound == pytest.approx(math.sqrt(2.0) * math.sqrt(2.0 * math.e * math.pi) * eps)
    assert est <= bound + 3.0 * se


def test_small_ball_saturation():
    f = cube_density(2)
    e = Subspace.coordinate(2, [0])
    est, se, bound = small_ball(f, e, [0.0], 10.0, 2000, seed=5)
    assert est == 1.0
    assert bound > 1.0


def test_small_ball_bound_formula():
    assert small_ball_bound(4, 2, 0.1) == pytest.approx(
        2.0 * (math.sqrt(2.0 * math.e * math.pi) * 0.1) ** 2
    )
