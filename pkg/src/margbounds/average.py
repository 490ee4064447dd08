"""Grassmannian averages: marginal power moments, dual affine
quermassintegrals, and their invariance checks.

All estimators draw subspaces from per-sample substream offsets of a counter
RNG, so estimates are bitwise reproducible and independent of chunking or
worker count.  Inner values are exact (slab geometry or signed-sum section
formulas); only the subspace average is Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import randomness
from .densities import ProductDensity, cube_density
from .grassmann import haar_sample
from .marginals import MarginalQuery, marginal_at
from .sections import Box, hyperplane_sections_exact_batch, section_quadrature, unit_cube

_DIR_CHUNK = 1 << 14


@dataclass(frozen=True)
class GrassmannAverage:
    """Monte Carlo average over G_{n,k} of an inner value raised to `power`."""

    n: int
    k: int
    power: float
    samples: int
    estimate: float
    std_error: float
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "power": self.power,
            "samples": self.samples,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "seed": self.seed,
        }


def unit_ball_volume(n: int) -> float:
    """omega_n, the volume of the n-dimensional Euclidean unit ball."""
    return math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1.0))


def _haar_directions_chunk(n: int, seed: int, stream: int, start: int, count: int) -> np.ndarray:
    g = randomness.normals(seed, stream, start * n, count * n).reshape(count, n)
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def line_marginals_at_zero(factors, dirs: np.ndarray) -> np.ndarray:
    """int prod_i f_i(v_i y) dy for each unit row v of dirs, vectorized.

    This is the marginal at 0 onto a hyperplane with normal line span(v)
    rotated into one coordinate -- equivalently the codimension-one case of
    the tight-frame identity.  Exact: a sum over piece combinations of
    interval intersection lengths.
    """
    m, n = dirs.shape
    if len(factors) != n:
        raise ValueError("need one factor per column")
    out = np.zeros(m)
    small = np.abs(dirs) <= 1e-12
    # enumerate piece combinations across factors (step counts are tiny)
    counts = [len(f.pieces) for f in factors]
    combo = [0] * n
    while True:
        lows = np.full(m, -np.inf)
        highs = np.full(m, np.inf)
        value = np.ones(m)
        for i in range(n):
            lo, hi, v = factors[i].pieces[combo[i]]
            value *= v
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = lo / dirs[:, i]
                t2 = hi / dirs[:, i]
            lo_i = np.where(small[:, i], -np.inf, np.minimum(t1, t2))
            hi_i = np.where(small[:, i], np.inf, np.maximum(t1, t2))
            # a vanishing coefficient leaves the factor constant at f_i(0)
            value = np.where(small[:, i] & ~((lo <= 0.0) & (0.0 < hi)), 0.0, value)
            lows = np.maximum(lows, lo_i)
            highs = np.minimum(highs, hi_i)
        out += value * np.maximum(highs - lows, 0.0)
        # odometer increment over the combination lattice
        j = 0
        while j < n:
            combo[j] += 1
            if combo[j] < counts[j]:
                break
            combo[j] = 0
            j += 1
        if j == n:
            break
    return out


def _powered(values: np.ndarray, power: float) -> np.ndarray:
    """values**power via exp(power*log), with zeros passed through."""
    out = np.zeros_like(values)
    pos = values > 0.0
    out[pos] = np.exp(power * np.log(values[pos]))
    return out


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    m = values.size
    mean = float(values.mean())
    return mean, float(math.sqrt(values.var() / m))


def _marginal_values_at_zero(
    f: ProductDensity, k: int, samples: int, inner_tol: float, seed: int, stream: int
) -> np.ndarray:
    """pi_E(f)(0) over Haar E in G_{n,k}, one value per subspace sample."""
    n = f.n
    if not (1 <= k < n):
        raise ValueError("need 1 <= k < n")
    if n - k == 1:
        # the complement is a Haar line: integrate f along random directions
        vals = np.empty(samples)
        for start in range(0, samples, _DIR_CHUNK):
            count = min(_DIR_CHUNK, samples - start)
            dirs = _haar_directions_chunk(n, seed, stream, start, count)
            vals[start : start + count] = line_marginals_at_zero(f.factors, dirs)
        return vals
    zero = np.zeros(k)
    vals = np.empty(samples)
    for i in range(samples):
        e = haar_sample(n, k, seed, stream=stream + 1 + i)
        vals[i] = marginal_at(MarginalQuery(f, e, zero), inner_tol)
    return vals


def avg_marginal_power(
    f: ProductDensity,
    k: int,
    subspace_samples: int,
    inner_tol: float = 1e-9,
    seed: int = 0,
    stream: int = 0,
) -> GrassmannAverage:
    """Estimate of int_{G_{n,k}} pi_E(f)(0)^n dmu over Haar subspaces."""
    if subspace_samples < 1000:
        raise ValueError("need subspace_samples >= 1000")
    n = f.n
    vals = _marginal_values_at_zero(f, k, subspace_samples, inner_tol, seed, stream)
    mean, se = _mean_se(_powered(vals, float(n)))
    return GrassmannAverage(n, k, float(n), subspace_samples, mean, se, seed)


def _cube_marginal_values(
    n: int, k: int, samples: int, seed: int, stream: int
) -> np.ndarray:
    """pi_E(1_{Q_n})(0) = |Q_n cap E^perp| over Haar E, batched when k = 1."""
    if k == 1:
        box = unit_cube(n)
        vals = np.empty(samples)
        for start in range(0, samples, _DIR_CHUNK):
            count = min(_DIR_CHUNK, samples - start)
            dirs = _haar_directions_chunk(n, seed, stream, start, count)
            vals[start : start + count] = hyperplane_sections_exact_batch(box, dirs)
        return vals
    return _marginal_values_at_zero(cube_density(n), k, samples, 1e-9, seed, stream)


def cube_avg_power(
    n: int, k: int, subspace_samples: int, seed: int = 0, stream: int = 0
) -> GrassmannAverage:
    """The cube side of the marginal power average (the comparison's rhs)."""
    if subspace_samples < 1000:
        raise ValueError("need subspace_samples >= 1000")
    if not (1 <= k < n):
        raise ValueError("need 1 <= k < n")
    vals = _cube_marginal_values(n, k, subspace_samples, seed, stream)
    mean, se = _mean_se(_powered(vals, float(n)))
    return GrassmannAverage(n, k, float(n), subspace_samples, mean, se, seed)


def prop_avg_check(
    f: ProductDensity,
    k: int,
    samples: int,
    tol: float = 0.0,
    seed: int = 0,
    stream: int = 0,
) -> dict:
    """Paired comparison of the f-average against the cube average.

    Both integrands are evaluated on identical subspace samples; the pass
    verdict uses the paired-difference standard error, which is far tighter
    than comparing the two marginal errors.
    """
    if samples < 1000:
        raise ValueError("need samples >= 1000")
    n = f.n
    lhs_vals = _powered(_marginal_values_at_zero(f, k, samples, 1e-9, seed, stream), float(n))
    if n - k == 1:
        cube_raw = np.empty(samples)
        cube = cube_density(n).factors
        for start in range(0, samples, _DIR_CHUNK):
            count = min(_DIR_CHUNK, samples - start)
            dirs = _haar_directions_chunk(n, seed, stream, start, count)
            cube_raw[start : start + count] = line_marginals_at_zero(cube, dirs)
        rhs_vals = _powered(cube_raw, float(n))
    else:
        # same haar_sample streams as the lhs -> identical subspace samples
        rhs_vals = _powered(
            _marginal_values_at_zero(cube_density(n), k, samples, 1e-9, seed, stream),
            float(n),
        )
    lhs, lhs_se = _mean_se(lhs_vals)
    rhs, rhs_se = _mean_se(rhs_vals)
    diff, diff_se = _mean_se(lhs_vals - rhs_vals)
    return {
        "lhs": lhs,
        "lhs_se": lhs_se,
        "rhs": rhs,
        "rhs_se": rhs_se,
        "paired_diff": diff,
        "paired_se": diff_se,
        "pass": bool(diff <= tol + 3.0 * diff_se),
    }


def _box_section_values(
    box: Box, k: int, samples: int, seed: int, stream: int, section_fn=None
) -> np.ndarray:
    """|K cap E| over Haar E in G_{n,k} for a box K, one value per sample."""
    n = box.n
    if k == 1:
        half = box.sides / 2.0
        vals = np.empty(samples)
        for start in range(0, samples, _DIR_CHUNK):
            count = min(_DIR_CHUNK, samples - start)
            dirs = _haar_directions_chunk(n, seed, stream, start, count)
            with np.errstate(divide="ignore"):
                reach = half[None, :] / np.abs(dirs)
            vals[start : start + count] = 2.0 * reach.min(axis=1)
        return vals
    vals = np.empty(samples)
    for i in range(samples):
        e = haar_sample(n, k, seed, stream=stream + 1 + i)
        vals[i] = section_quadrature(box, e) if section_fn is None else section_fn(box, e)
    return vals


def dual_affine_quermass(
    box: Box, k: int, samples: int, seed: int = 0, stream: int = 0, _section_fn=None
) -> GrassmannAverage:
    """(omega_n/omega_k) (int |K cap E|^n dmu)^{1/n} for a box K.

    The standard error for the 1/n power comes from the delta method applied
    to the sample mean of the n-th powers.
    """
    if samples < 1000:
        raise ValueError("need samples >= 1000")
    n = box.n
    if not (1 <= k < n):
        raise ValueError("need 1 <= k < n")
    if _section_fn is None and k > 3:
        raise ValueError("section dimension k > 3 needs a Monte Carlo section engine")
    raw = _box_section_values(box, k, samples, seed, stream, _section_fn)
    mean, se = _mean_se(_powered(raw, float(n)))
    ratio = unit_ball_volume(n) / unit_ball_volume(k)
    estimate = ratio * mean ** (1.0 / n)
    std_error = ratio * se * mean ** (1.0 / n - 1.0) / n if mean > 0.0 else math.inf
    return GrassmannAverage(n, k, float(n), samples, estimate, std_error, seed)


def grinberg_check(
    diag, n: int, k: int, samples: int, seed: int = 0, stream: int = 0
) -> dict:
    """Invariance of the dual affine quermassintegral under a diagonal
    volume-preserving map S: compares Phi_k(Q_n) and Phi_k(S Q_n) on common
    subspace samples."""
    s = np.asarray(diag, dtype=float)
    if s.size != n:
        raise ValueError("diag must have n entries")
    if abs(abs(np.prod(s)) - 1.0) > 1e-12:
        raise ValueError("S must be volume-preserving (|det S| = 1 within 1e-12)")
    phi_q = dual_affine_quermass(unit_cube(n), k, samples, seed, stream)
    phi_sq = dual_affine_quermass(Box(np.abs(s)), k, samples, seed, stream)
    diff = abs(phi_q.estimate - phi_sq.estimate)
    combined_se = math.hypot(phi_q.std_error, phi_sq.std_error)
    return {
        "phi_cube": phi_q.estimate,
        "phi_cube_se": phi_q.std_error,
        "phi_image": phi_sq.estimate,
        "phi_image_se": phi_sq.std_error,
        "difference": diff,
        "combined_se": combined_se,
        "pass": bool(diff <= 3.0 * combined_se),
    }
