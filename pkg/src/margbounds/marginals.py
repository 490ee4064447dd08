"""Marginal densities of product densities on subspaces.

The marginal of f(x) = prod f_i(x_i) onto a k-dimensional subspace E,
evaluated at x in E, is an integral over E-perp that the complement tight
frame turns into

    pi_E(f)(x) = int_{R^{n-k}} prod_i f_i(x_i + <y, w_i>) dy,

with w_i the rows of an orthonormal basis of E-perp and x_i the ambient
coordinates of x.  For step factors this is a finite sum of slab-intersection
volumes, so the deterministic route is exact; a stratified Monte Carlo
fallback covers high codimension.  On top sit the theorem verifier, the
one-dimensional worst-case (cube) comparison, and the small-ball estimator.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import bounds, randomness, slabgeom
from .densities import ProductDensity
from .grassmann import Subspace, orthonormal_complement
from .sections import ZERO_COORD_TOL, Box, hyperplane_section_exact

_ROW_ZERO_TOL = 1e-12
_GRID_BUDGET = 400_000


@dataclass(frozen=True)
class MarginalQuery:
    """Evaluation point of pi_E(f): x is given in coordinates of E's basis."""

    f: ProductDensity
    e: Subspace
    x: np.ndarray

    def __init__(self, f: ProductDensity, e: Subspace, x):
        x = np.array(x, dtype=float, copy=True).reshape(-1)
        if e.n != f.n:
            raise ValueError("density and subspace live in different dimensions")
        if x.size != e.k:
            raise ValueError("x must have one coordinate per basis column of E")
        x.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "x", x)

    def ambient_shifts(self) -> np.ndarray:
        """x_i = <x, e_i> for the ambient point represented by x."""
        return self.e.basis @ self.x


def marginal_at(q: MarginalQuery, tol: float = 1e-9) -> float:
    """pi_E(f)(x) by exact slab-arrangement integration.

    Factors whose frame vector vanishes contribute the constant f_i(x_i);
    the rest integrate exactly over the orthogonal blocks of the frame rows,
    so any positive tol is met.  Requires every irreducible block to span at
    most 3 dimensions (always true for n - k <= 3); otherwise marginal_mc is
    the fallback.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    e = q.e
    if e.k == e.n:
        shifts = q.ambient_shifts()
        return math.prod(f.value_at(s) for f, s in zip(q.f.factors, shifts))
    w = orthonormal_complement(e).basis  # rows w_i, (n, n-k)
    shifts = q.ambient_shifts()
    norms = np.sqrt(np.einsum("ij,ij->i", w, w))
    const = 1.0
    for i in np.nonzero(norms <= _ROW_ZERO_TOL)[0]:
        const *= q.f.factors[i].value_at(shifts[i])
        if const == 0.0:
            return 0.0
    active = np.nonzero(norms > _ROW_ZERO_TOL)[0]
    value = const
    for comp, local in slabgeom.component_blocks(w[active]):
        idx = active[comp]
        piece_lists = [q.f.factors[i].pieces for i in idx]
        sub = 0.0
        for combo in itertools.product(*piece_lists):
            lo = np.array([p[0] for p in combo]) - shifts[idx]
            hi = np.array([p[1] for p in combo]) - shifts[idx]
            sub += math.prod(p[2] for p in combo) * slabgeom.kernels.slab_volume(local, lo, hi)
        value *= sub
        if value == 0.0:
            return 0.0
    return value


_MC_CHUNK = 1 << 15


def marginal_mc(
    q: MarginalQuery, samples: int, bandwidth: float = 1.0, seed: int = 0, stream: int = 0
) -> tuple[float, float]:
    """Stratified Monte Carlo estimate of pi_E(f)(x) with a standard error.

    Integrates over a bounding cube of the integrand's support in E-perp
    coordinates, inflated by the bandwidth factor (>= 1); deterministic in
    (seed, stream) and independent of chunking.
    """
    if samples < 1000:
        raise ValueError("need samples >= 1000")
    if bandwidth < 1.0:
        raise ValueError("bandwidth is an inflation factor, must be >= 1")
    e = q.e
    if e.k >= e.n:
        raise ValueError("nothing to integrate when k = n")
    w = orthonormal_complement(e).basis
    d = e.n - e.k
    shifts = q.ambient_shifts()
    norms = np.sqrt(np.einsum("ij,ij->i", w, w))
    const = 1.0
    for i in np.nonzero(norms <= _ROW_ZERO_TOL)[0]:
        const *= q.f.factors[i].value_at(shifts[i])
    if const == 0.0:
        return 0.0, 0.0
    active = np.nonzero(norms > _ROW_ZERO_TOL)[0]
    # the integrand vanishes unless <w_i, y> stays within each factor's
    # support; the frame identity then bounds |y|
    reach = 0.0
    for i in active:
        lo, hi = q.f.factors[i].support()
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo) - shifts[i]
        reach += (abs(mid) + half) ** 2
    radius = bandwidth * math.sqrt(reach)
    if radius == 0.0:
        return 0.0, 0.0
    cube_vol = (2.0 * radius) ** d
    vals = np.empty(samples)
    for start in range(0, samples, _MC_CHUNK):
        count = min(_MC_CHUNK, samples - start)
        u = randomness.uniforms(seed, stream, start * d, count * d).reshape(count, d)
        idx = np.arange(start, start + count, dtype=float)
        u[:, 0] = (idx + u[:, 0]) / samples
        y = (2.0 * u - 1.0) * radius
        prod = np.full(count, const)
        for i in active:
            t = shifts[i] + y @ w[i]
            fi = q.f.factors[i]
            piece_vals = np.zeros(count)
            for lo, hi, v in fi.pieces:
                piece_vals = np.where((t >= lo) & (t < hi), v, piece_vals)
            prod *= piece_vals
        vals[start : start + count] = prod
    mean = float(vals.mean())
    var = float(vals.var())
    return cube_vol * mean, cube_vol * math.sqrt(var / samples)


def _axis_offsets(radius: float, step: float) -> np.ndarray:
    half_count = int(math.floor(radius / step + 1e-12))
    return step * np.arange(-half_count, half_count + 1, dtype=float)


def marginal_grid_sup(
    f: ProductDensity,
    e: Subspace,
    grid_radius: float,
    grid_step: float,
    tol: float = 1e-9,
) -> float:
    """Grid maximum of pi_E(f): a certified lower bound for its sup.

    The grid is centered at the image in E of the per-factor support
    midpoints, scanned at the given step, then refined locally (step halving
    around the running argmax) until the improvement drops below tol.  Every
    reported value is an exact marginal evaluation, so the result can only
    under-, never over-estimate the true supremum.
    """
    if grid_radius <= 0.0 or grid_step <= 0.0:
        raise ValueError("grid parameters must be positive")
    k = e.k
    offs = _axis_offsets(grid_radius, grid_step)
    if offs.size**k > _GRID_BUDGET:
        raise ValueError(
            f"grid budget exceeded: {offs.size}^{k} points (limit {_GRID_BUDGET})"
        )
    center = e.basis.T @ f.support_midpoints()

    def scan(origin: np.ndarray, offsets: np.ndarray) -> tuple[float, np.ndarray]:
        best_v, best_x = -1.0, origin
        for combo in itertools.product(offsets, repeat=k):
            x = origin + np.array(combo)
            v = marginal_at(MarginalQuery(f, e, x), tol)
            if v > best_v:
                best_v, best_x = v, x
        return best_v, best_x

    best_v, best_x = scan(center, offs)
    step = grid_step
    for _ in range(40):
        step *= 0.5
        refined_v, refined_x = scan(best_x, step * np.arange(-2.0, 3.0))
        gain = refined_v - best_v
        if refined_v > best_v:
            best_v, best_x = refined_v, refined_x
        if gain < tol:
            break
    return best_v


_GRID_POINTS_PER_AXIS = {1: 33, 2: 15, 3: 9, 4: 5}


def default_grid(f: ProductDensity, e: Subspace) -> tuple[float, float]:
    """(radius, step) covering the projected support at a per-k budget."""
    lo = np.array([fi.support()[0] for fi in f.factors])
    hi = np.array([fi.support()[1] for fi in f.factors])
    radius = 0.5 * math.sqrt(float(np.sum((hi - lo) ** 2)))
    points = _GRID_POINTS_PER_AXIS.get(e.k, 5)
    return radius, 2.0 * radius / (points - 1)


def verify_main_theorem(f: ProductDensity, e: Subspace, tol: float = 1e-4) -> dict:
    """Compare the grid sup of pi_E(f) against the marginal product bound.

    Returns {sup_lower_bound, bound, branch, slack, pass}; pass iff
    sup_lower_bound <= bound * (1 + tol).
    """
    report = bounds.bound_main(e, f.sup_norms())
    radius, step = default_grid(f, e)
    # the grid sup only needs to resolve the bound comparison: refining it
    # further can make the lower bound larger (safe direction) but never flips
    # a pass into a fail, so the refinement stop is scaled to the bound
    refine_tol = max(1e-9, 1e-2 * tol * report.bound_value)
    sup_lb = marginal_grid_sup(f, e, radius, step, refine_tol)
    sup_lb = float(sup_lb)
    return {
        "sup_lower_bound": sup_lb,
        "bound": report.bound_value,
        "branch": report.branch,
        "slack": report.bound_value - sup_lb,
        "pass": bool(sup_lb <= report.bound_value * (1.0 + tol)),
    }


def cube_hyperplane_section(theta) -> float:
    """|Q_n cap theta-perp| for a unit vector theta, zero coordinates factored
    out (each contributes a unit side)."""
    theta = np.asarray(theta, dtype=float)
    if abs(np.linalg.norm(theta) - 1.0) > 1e-12:
        raise ValueError("theta must be a unit vector")
    keep = np.abs(theta) > ZERO_COORD_TOL
    reduced = theta[keep]
    if reduced.size <= 1:
        return 1.0
    return hyperplane_section_exact(Box(np.ones(reduced.size)), reduced)


def rogozin_check(f: ProductDensity, theta, tol: float = 1e-4) -> tuple[float, float]:
    """(grid sup of the line marginal along theta, |Q_n cap theta-perp|).

    The one-dimensional marginal of any density in the normalized class is
    dominated by the central cube section; the caller asserts
    sup_lb <= cube_section * (1 + tol).
    """
    if not f.in_class_f():
        raise ValueError("f must have normalized factors with sup norm <= 1")
    theta = np.asarray(theta, dtype=float)
    e = Subspace(theta)
    radius, step = default_grid(f, e)
    sup_lb = marginal_grid_sup(f, e, radius, step, min(tol, 1e-9))
    return sup_lb, cube_hyperplane_section(theta)


def small_ball_bound(n: int, k: int, eps: float) -> float:
    """(C sqrt(2 e pi) eps)^k with C^k the smaller of the two branch constants."""
    const = (n / (n - k)) ** ((n - k) / 2.0)
    if k <= n / 2:
        const = min(const, 2.0 ** (k / 2.0))
    return const * (math.sqrt(2.0 * math.e * math.pi) * eps) ** k


def small_ball(
    f: ProductDensity,
    e: Subspace,
    z,
    eps: float,
    samples: int,
    seed: int,
    stream: int = 0,
) -> tuple[float, float, float]:
    """(estimate, std_error, bound) for P(|P_E X - z| <= eps sqrt(k)).

    X is sampled exactly from f by per-factor inverse transform; the closed-
    form bound follows from the marginal sup bound.  The estimate saturates
    at 1, so the comparison is vacuous once the bound exceeds 1.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if samples < 1000:
        raise ValueError("need samples >= 1000")
    if not f.in_class_f():
        raise ValueError("f must have normalized factors with sup norm <= 1")
    z = np.asarray(z, dtype=float).reshape(-1)
    n, k = e.n, e.k
    if z.size != k:
        raise ValueError("z must have one coordinate per basis column of E")
    hits = 0
    r = eps * math.sqrt(k)
    for start in range(0, samples, _MC_CHUNK):
        count = min(_MC_CHUNK, samples - start)
        x = f.sample(seed, count, stream=stream, start=start)
        coords = x @ e.basis
        hits += int(np.sum(np.linalg.norm(coords - z[None, :], axis=1) <= r))
    p = hits / samples
    se = math.sqrt(max(p * (1.0 - p), 0.0) / samples)
    return p, se, small_ball_bound(n, k, eps)
