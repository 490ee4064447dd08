import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from margbounds.densities import (
    DensityFormatError,
    ProductDensity,
    StepDensity,
    cube_density,
    random_density,
    random_product_density,
    uniform_density,
)


def test_canonicalization_sorts_and_merges():
    f = StepDensity([(0.5, 1.0, 2.0), (-1.0, 0.0, 1.0), (0.0, 0.5, 2.0)])
    assert f.pieces == ((-1.0, 0.0, 1.0), (0.0, 1.0, 2.0))


def test_zero_value_pieces_dropped():
    f = StepDensity([(0.0, 1.0, 1.0), (2.0, 3.0, 0.0)])
    assert f.support() == (0.0, 1.0)


def test_invalid_pieces_raise():
    with pytest.raises(DensityFormatError):
        StepDensity([(1.0, 0.0, 1.0)])
    with pytest.raises(DensityFormatError):
        StepDensity([(0.0, 1.0, -1.0)])
    with pytest.raises(DensityFormatError):
        StepDensity([(0.0, 1.0, 1.0), (0.5, 1.5, 1.0)])
    with pytest.raises(DensityFormatError):
        StepDensity([(0.0, 1.0, 0.0)])


def test_norms_and_level_sets():
    f = StepDensity([(0.0, 1.0, 2.0), (1.0, 3.0, 0.5)])
    assert f.l1_norm() == pytest.approx(3.0)
    assert f.sup_norm() == 2.0
    assert f.lp_norm(2) == pytest.approx(math.sqrt(4.0 + 0.5))
    assert f.lp_norm(math.inf) == 2.0
    assert f.level_set_measure(1.0) == pytest.approx(1.0)
    assert f.level_set_measure(0.4) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        f.lp_norm(0.5)


def test_value_at_half_open():
    f = StepDensity([(0.0, 1.0, 2.0)])
    assert f.value_at(0.0) == 2.0
    assert f.value_at(1.0) == 0.0
    assert f.value_at(-0.1) == 0.0


def test_normalized_and_scaled():
    f = StepDensity([(0.0, 2.0, 3.0)])
    g = f.normalized()
    assert g.is_normalized()
    assert f.scaled(2.0).sup_norm() == 6.0


def test_shift_and_dilate():
    f = uniform_density(-0.5, 0.5)
    g = f.shifted(5.0)
    assert g.support() == (4.5, 5.5)
    assert g.l1_norm() == pytest.approx(1.0)
    h = f.dilated(2.0)
    assert h.sup_norm() == pytest.approx(2.0)
    assert h.l1_norm() == pytest.approx(1.0)
    assert h.support() == (-0.25, 0.25)


def test_rearrange_properties():
    f = StepDensity([(0.0, 1.0, 0.3), (1.0, 1.5, 1.2), (2.0, 2.5, 0.7)])
    g = f.rearrange()
    # equimeasurable with the original
    for t in (0.0, 0.2, 0.5, 0.69, 0.71, 1.0, 1.19):
        assert g.level_set_measure(t) == pytest.approx(f.level_set_measure(t))
    assert g.l1_norm() == pytest.approx(f.l1_norm())
    assert g.sup_norm() == pytest.approx(f.sup_norm())
    # even and non-increasing away from zero
    lo, hi = g.support()
    assert lo == pytest.approx(-hi)
    xs = np.linspace(0.0, hi - 1e-9, 50)
    vals = [g.value_at(x) for x in xs]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.floats(-5, 5),
            st.floats(0.01, 3.0),
            st.floats(0.01, 4.0),
        ),
        min_size=1,
        max_size=5,
    )
)
def test_rearrange_equimeasurable_random(raw):
    # build disjoint pieces by stacking widths left to right
    pieces = []
    x = raw[0][0]
    for _, width, value in raw:
        pieces.append((x, x + width, value))
        x += width + 0.1
    f = StepDensity(pieces)
    g = f.rearrange()
    for t in sorted({0.0, *(v / 2 for _, _, v in pieces), *(v for _, _, v in pieces)}):
        assert g.level_set_measure(t) == pytest.approx(f.level_set_measure(t), abs=1e-9)


def test_inverse_cdf_exact_quantiles():
    f = StepDensity([(0.0, 1.0, 0.5), (1.0, 2.0, 0.5)])
    u = np.array([0.0, 0.25, 0.5, 0.75])
    assert f.inverse_cdf(u) == pytest.approx([0.0, 0.5, 1.0, 1.5])


def test_inverse_cdf_skips_gaps():
    f = StepDensity([(0.0, 1.0, 0.5), (3.0, 4.0, 0.5)])
    x = f.inverse_cdf(np.array([0.6, 0.99]))
    assert np.all((x >= 3.0) & (x < 4.0))


def test_json_roundtrip(tmp_path):
    f = StepDensity([(0.0, 1.0, 0.25), (1.5, 2.0, 1.5)])
    path = tmp_path / "d.json"
    path.write_text(json.dumps(f.to_json_dict()))
    g = StepDensity.from_json_file(path)
    assert g.pieces == f.pieces


def test_json_bad_shape():
    with pytest.raises(DensityFormatError):
        StepDensity.from_json_dict({"rows": []})


def test_random_density_in_class():
    for seed in range(30):
        f = random_density(seed, 3, 1.0)
        assert f.is_normalized(1e-9)
        assert f.sup_norm() <= 1.0 + 1e-12


def test_random_density_deterministic():
    assert random_density(4, 3, 1.0).pieces == random_density(4, 3, 1.0).pieces


def test_product_density():
    f = cube_density(3)
    assert f.n == 3
    assert f.sup_norms() == pytest.approx([1.0, 1.0, 1.0])
    assert f.in_class_f()
    x = f.sample(1, 1000)
    assert x.shape == (1000, 3)
    assert np.all(np.abs(x) <= 0.5)


def test_product_sampling_chunk_invariance():
    f = random_product_density(2, 3)
    whole = f.sample(5, 100)
    parts = np.vstack([f.sample(5, 50, start=0), f.sample(5, 50, start=50)])
    assert np.array_equal(whole, parts)


def test_product_json_roundtrip(tmp_path):
    f = random_product_density(9, 2)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(f.to_json_dict()))
    g = ProductDensity.from_json_file(path)
    assert all(a.pieces == b.pieces for a, b in zip(f.factors, g.factors))
