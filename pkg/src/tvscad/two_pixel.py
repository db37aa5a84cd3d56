"""Closed-form minimizers of the two-pixel problem and a grid-search oracle.

The problem is

    Q(t1, t2) = (y1 - t1)**2 + (y2 - t2)**2 + pen(|t1 - t2|)

with ``pen`` either the SCAD penalty or ``lam * |.|`` (TV). Every minimizer
keeps ``t1 + t2 = y1 + y2``, so only the difference ``x = t1 - t2`` is free.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .penalty import ScadParams, scad_value, stationarity_lhs

NO_SHRINKAGE = "no_shrinkage"
POOLED = "pooled"
INTERIOR_STATIONARY = "interior_stationary"
TV_SHRUNK = "tv_shrunk"
TV_POOLED = "tv_pooled"
BRANCHES = (NO_SHRINKAGE, POOLED, INTERIOR_STATIONARY, TV_SHRUNK, TV_POOLED)


@dataclass(frozen=True)
class TwoPixelSolution:
    theta1: float
    theta2: float
    branch: str
    objective: float


def _penalty(diff, penalty):
    diff = np.abs(diff)
    if isinstance(penalty, ScadParams):
        return scad_value(diff, penalty)
    return float(penalty) * diff


def two_pixel_objective(y1, y2, theta1, theta2, penalty: Union[ScadParams, float]):
    """Q evaluated directly; ``penalty`` is ScadParams or a TV ``lam``."""
    return (y1 - theta1) ** 2 + (y2 - theta2) ** 2 + _penalty(np.subtract(theta1, theta2), penalty)


def _solution(y1, y2, hi, lo, branch, penalty, swapped):
    if swapped:
        hi, lo = lo, hi
    q = float(two_pixel_objective(y1, y2, hi, lo, penalty))
    return TwoPixelSolution(float(hi), float(lo), branch, q)


def _scad_stationary_difference(d, p: ScadParams):
    """Positive root of ``x + p'(x) = d``, or None when there is none.

    The left side is continuous and increasing with value ``2*lam`` at
    ``x = lam`` and ``a*lam`` at ``x = a*lam``, so ``d`` alone picks the
    branch. Choosing by ``d`` avoids losing the root to rounding at a knot.
    """
    lam, a = p.lam, p.a
    if d < lam:
        return None
    if d < 2.0 * lam:
        x = min(d - lam, lam)
    elif d <= a * lam:
        x = min(max(((a - 1.0) * d - a * lam) / (a - 2.0), lam), a * lam)
    else:
        x = d
    return x if x > 0 else None


def two_pixel_scad(y1, y2, p: ScadParams) -> TwoPixelSolution:
    """Global minimizer of the two-pixel SCAD problem.

    Differences above ``a*lam`` are left untouched and differences below
    ``lam`` are pooled to the mean. In between the pooled point competes with
    the unique stationary point, and the one with the smaller Q wins (ties
    go to the pooled point).
    """
    swapped = y1 < y2
    hi, lo = (y2, y1) if swapped else (y1, y2)
    d = hi - lo
    mean = (hi + lo) / 2.0
    if d > p.a * p.lam:
        return _solution(y1, y2, hi, lo, NO_SHRINKAGE, p, swapped)
    if d < p.lam:
        return _solution(y1, y2, mean, mean, POOLED, p, swapped)

    best = (d * d / 2.0, 0.0, POOLED)
    x = _scad_stationary_difference(d, p)
    if x is not None:
        assert math.isclose(stationarity_lhs(x, p), d, rel_tol=1e-9, abs_tol=1e-12)
        q = (d - x) ** 2 / 2.0 + scad_value(x, p)
        branch = NO_SHRINKAGE if x == d else INTERIOR_STATIONARY
        if q < best[0]:
            best = (q, x, branch)
    _, x, branch = best
    s = hi + lo
    return _solution(y1, y2, (s + x) / 2.0, (s - x) / 2.0, branch, p, swapped)


def two_pixel_tv(y1, y2, lam) -> TwoPixelSolution:
    """Two-pixel TV minimizer: the gap shrinks by exactly ``lam`` or collapses to the mean."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    swapped = y1 < y2
    hi, lo = (y2, y1) if swapped else (y1, y2)
    if hi - lo > lam:
        return _solution(y1, y2, hi - lam / 2.0, lo + lam / 2.0, TV_SHRUNK, lam, swapped)
    mean = (hi + lo) / 2.0
    return _solution(y1, y2, mean, mean, TV_POOLED, lam, swapped)


def default_grid(y1, y2, penalty):
    """Default ``(grid_halfwidth, grid_step)`` for :func:`two_pixel_brute_force`."""
    if isinstance(penalty, ScadParams):
        lam, a = penalty.lam, penalty.a
    else:
        lam, a = float(penalty), 3.7
    return lam * (a + 1.0), max(1e-3, abs(y1 - y2) * 1e-4)


def _grid(y1, y2, halfwidth, step):
    lo = min(y1, y2) - halfwidth
    hi = max(y1, y2) + halfwidth
    span = hi - lo
    if span <= 0:
        return np.array([lo])
    # uniform grid holding both ends; never coarser than ``step``
    n = max(2, int(math.ceil(span / step - 1e-9)) + 1)
    return np.linspace(lo, hi, n)


def two_pixel_brute_force(y1, y2, penalty: Union[ScadParams, float], grid_halfwidth=None,
                          grid_step=None) -> TwoPixelSolution:
    """Exact minimum of Q over the square grid ``[min - hw, max + hw]**2``.

    Grid pairs are grouped by their index offset ``k`` (so ``t1 - t2`` is
    fixed on each group). Within a group Q is a convex quadratic in ``t1``
    plus a constant penalty, so its best grid point is the floor or ceiling
    of the continuous optimum; scanning all offsets gives the same argmin as
    enumerating every pair, without building the full ``n x n`` table.
    """
    hw, step = default_grid(y1, y2, penalty)
    hw = hw if grid_halfwidth is None else grid_halfwidth
    step = step if grid_step is None else grid_step
    if not step > 0:
        raise ValueError("grid_step must be positive")
    g = _grid(y1, y2, hw, step)
    n = g.size
    if n == 1:
        i = j = np.array([0])
    else:
        h = g[1] - g[0]
        k = np.arange(-(n - 1), n)  # t1 index minus t2 index
        first = np.maximum(0, k)
        last = np.minimum(n - 1, n - 1 + k)
        centre = ((y1 + y2 + k * h) / 2.0 - g[0]) / h
        lower = np.clip(np.floor(centre), first, last).astype(int)
        upper = np.clip(lower + 1, first, last)
        i = np.concatenate([lower, upper])
        j = i - np.concatenate([k, k])
    q = two_pixel_objective(y1, y2, g[i], g[j], penalty)
    best = int(np.argmin(q))
    t1, t2 = float(g[i[best]]), float(g[j[best]])
    return TwoPixelSolution(t1, t2, _classify(y1, y2, t1, t2, penalty, step), float(q[best]))


def two_pixel_brute_force_naive(y1, y2, penalty, grid_halfwidth, grid_step) -> TwoPixelSolution:
    """Full ``n x n`` enumeration of the same grid; only for small grids."""
    g = _grid(y1, y2, grid_halfwidth, grid_step)
    t1, t2 = np.meshgrid(g, g, indexing="ij")
    q = two_pixel_objective(y1, y2, t1, t2, penalty)
    a, b = np.unravel_index(int(np.argmin(q)), q.shape)
    th1, th2 = float(g[a]), float(g[b])
    return TwoPixelSolution(th1, th2, _classify(y1, y2, th1, th2, penalty, grid_step), float(q[a, b]))


def _classify(y1, y2, t1, t2, penalty, step):
    pooled = t1 == t2
    if not isinstance(penalty, ScadParams):
        return TV_POOLED if pooled else TV_SHRUNK
    if pooled:
        return POOLED
    if abs(t1 - y1) <= step and abs(t2 - y2) <= step:
        return NO_SHRINKAGE
    return INTERIOR_STATIONARY
