"""Oscillatory quadrature: panelized Gauss-Kronrod plus analytic tails.

Products of sinc factors decay only polynomially, so naive truncation cannot
reach 1e-9 tolerances.  The scheme here integrates [0, T] on panels cut at
the zeros of the fastest factor and evaluates the [T, oo) remainder in closed
form: the sine product expands into 2^m pure exponentials whose t^{-m}
moments reduce to Si/Ci via an integration-by-parts recurrence.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import sici

# 15-point Kronrod nodes/weights on [-1, 1] with the embedded 7-point Gauss rule.
_KRONROD_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_KRONROD_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_GAUSS_WEIGHTS_ON_KRONROD = np.array([
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0,
    0.381830050505119, 0.0, 0.417959183673469, 0.0,
    0.381830050505119, 0.0, 0.279705391489277, 0.0,
    0.129484966168870, 0.0,
])


class ToleranceError(RuntimeError):
    """Raised when a quadrature cannot certify the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error bound {achieved:.3e})")
        self.achieved = achieved


def gk_panels(f, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized G7/K15 on consecutive panels.

    f must accept a flat numpy array.  Returns (per-panel K15 values,
    per-panel |K15 - G7| error estimates).
    """
    lefts = edges[:-1]
    rights = edges[1:]
    half = 0.5 * (rights - lefts)
    mid = 0.5 * (rights + lefts)
    pts = mid[:, None] + half[:, None] * _KRONROD_NODES[None, :]
    vals = f(pts.reshape(-1)).reshape(pts.shape)
    k15 = half * (vals @ _KRONROD_WEIGHTS)
    g7 = half * (vals @ _GAUSS_WEIGHTS_ON_KRONROD)
    return k15, np.abs(k15 - g7)


def adaptive_panels(f, edges: np.ndarray, tol: float, max_rounds: int = 12):
    """Refine the worst panels by bisection until the error sum meets tol."""
    k15, err = gk_panels(f, edges)
    segs = list(zip(edges[:-1], edges[1:], k15, err))
    for _ in range(max_rounds):
        total_err = sum(s[3] for s in segs)
        if total_err <= tol:
            break
        segs.sort(key=lambda s: s[3])
        cut = max(1, len(segs) // 8)
        worst = segs[-cut:]
        segs = segs[:-cut]
        for w in worst:
            e = np.array([w[0], 0.5 * (w[0] + w[1]), w[1]])
            k, er = gk_panels(f, e)
            segs.append((e[0], e[1], k[0], er[0]))
            segs.append((e[1], e[2], k[1], er[1]))
    value = math.fsum(s[2] for s in segs)
    err = math.fsum(s[3] for s in segs)
    return value, err


def _exp_moment_table(omegas: np.ndarray, m: int, t_start: float) -> dict:
    """E_m(w) = int_T^oo t^{-m} e^{iwt} dt for each distinct |w| (w >= 0)."""
    table = {}
    for w in np.unique(np.abs(omegas)):
        if w == 0.0:
            # pure power tail; only valid (and only needed) for m >= 2
            table[0.0] = complex(t_start ** (1 - m) / (m - 1), 0.0) if m >= 2 else complex("nan")
            continue
        si, ci = sici(w * t_start)
        e = complex(-ci, math.pi / 2.0 - si)  # E_1
        for j in range(2, m + 1):
            e = (t_start ** (1 - j) * np.exp(1j * w * t_start) + 1j * w * e) / (j - 1)
        table[float(w)] = e
    return table


def sinc_product_tail(c: np.ndarray, t_start: float) -> float:
    """int_T^oo prod_j sinc(c_j t) dt, exactly (to Si/Ci precision).

    Expands prod sin(c_j t) = sum over sign patterns of +-e^{i omega t}/(2i)^m
    and reduces each t^{-m} exponential moment with the recurrence above.
    """
    c = np.asarray(c, dtype=float)
    m = c.size
    if m > 16:
        raise ValueError("tail expansion guard: more than 16 sinc factors")
    signs = np.array([[1.0 if (bits >> j) & 1 else -1.0 for j in range(m)] for bits in range(2**m)])
    omegas = signs @ c
    coef = np.prod(signs, axis=1) / (2.0j) ** m
    table = _exp_moment_table(omegas, m, t_start)
    total = 0.0 + 0.0j
    for w, cf in zip(omegas, coef):
        e = table[float(abs(w))]
        total += cf * (e if w >= 0.0 else np.conj(e))
    return float(total.real) / float(np.prod(c))
