import math

import numpy as np
import pytest

from margbounds.quadrature import (
    ToleranceError,
    adaptive_panels,
    gk_panels,
    sinc_product_tail,
)


def test_gk_exact_on_polynomials():
    # K15 integrates polynomials of degree <= 22 exactly
    edges = np.array([0.0, 1.0])
    for deg in (0, 3, 7, 13):
        val, err = gk_panels(lambda t, d=deg: t**d, edges)
        assert val[0] == pytest.approx(1.0 / (deg + 1), rel=1e-14)


def test_gk_error_estimate_reported():
    edges = np.linspace(0.0, 10.0, 3)
    _, err = gk_panels(np.sin, edges)
    assert np.all(err >= 0.0)


def test_adaptive_meets_tolerance():
    edges = np.linspace(0.0, math.pi, 4)
    val, err = adaptive_panels(np.sin, edges, 1e-12)
    assert err <= 1e-12
    assert val == pytest.approx(2.0, abs=1e-11)


def test_adaptive_oscillatory():
    f = lambda t: np.sin(40.0 * t) ** 2
    edges = np.linspace(0.0, 1.0, 8)
    val, err = adaptive_panels(f, edges, 1e-10)
    exact = 0.5 - math.sin(80.0) / 160.0
    assert val == pytest.approx(exact, abs=1e-9)


def _tail_reference(c, t_start):
    """Brute-force high-panel quadrature out to where the envelope is tiny."""
    c = np.asarray(c, dtype=float)

    def f(t):
        x = c[None, :] * t[:, None]
        return np.prod(np.sin(x) / x, axis=1)

    # envelope decays like t^-m; go far enough that the remainder is < 1e-13
    m = c.size
    t_end = max((1.0 / (np.prod(c) * 1e-14)) ** (1.0 / m) if m > 1 else 1e13, t_start * 4)
    t_end = min(t_end, t_start + 2e5)
    edges = np.linspace(t_start, t_end, 20000)
    val, err = adaptive_panels(f, edges, 1e-12)
    return val


@pytest.mark.parametrize(
    "c",
    [
        np.array([1.0, 0.7, 0.3]),
        np.array([0.5, 0.5, 0.5, 0.5]),
        np.array([1.3, 0.9, 0.45, 0.2, 0.1]),
    ],
)
def test_sinc_product_tail_matches_quadrature(c):
    t_start = 40.0 * math.pi
    got = sinc_product_tail(c, t_start)
    ref = _tail_reference(c, t_start)
    assert got == pytest.approx(ref, abs=5e-10)


def test_sinc_product_tail_two_factors():
    # slowest-decaying case (t^-2 envelope); closed tail must still be tight
    c = np.array([1.0, 0.25])
    t_start = 100.0 * math.pi
    got = sinc_product_tail(c, t_start)
    ref = _tail_reference(c, t_start)
    assert got == pytest.approx(ref, abs=1e-9)


def test_sinc_product_tail_guard():
    with pytest.raises(ValueError):
        sinc_product_tail(np.ones(17), 10.0)


def test_tolerance_error_carries_value():
    err = ToleranceError("failed", 0.25)
    assert err.achieved == 0.25
    assert "0.25" in str(err) or "2.5" in str(err)
