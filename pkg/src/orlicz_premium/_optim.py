"""One-dimensional search helpers shared by the conjugate, norm and premium code."""

from __future__ import annotations

import math
from typing import Callable

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], lo: float, hi: float,
                   tol: float = 1e-9, max_iter: int = 500):
    """Minimize a unimodal ``f`` on ``[lo, hi]`` by golden-section search.

    Returns ``(x_best, f_best, iterations)``. The best point seen over the
    whole run is returned, endpoints included, so plateaus and minima sitting
    on the boundary are handled.
    """
    f_lo, f_hi = f(lo), f(hi)
    best_x, best_f = (lo, f_lo) if f_lo <= f_hi else (hi, f_hi)
    a, b = lo, hi
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        it += 1
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx < best_f:
            best_x, best_f = x, fx
    return best_x, best_f, it


def bracket_by_doubling(f: Callable[[float], float], lo: float, hi: float,
                        max_expand: int = 80):
    """Widen ``[lo, hi]`` around its midpoint until both endpoint values are at
    least the midpoint value.

    For a convex ``f`` this certifies that a global minimizer lies inside the
    returned interval.
    """
    for _ in range(max_expand):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        grow_lo = f(lo) < f_mid
        grow_hi = f(hi) < f_mid
        if not (grow_lo or grow_hi):
            return lo, hi
        width = hi - lo
        if grow_lo:
            lo -= width
        if grow_hi:
            hi += width
    raise RuntimeError("could not bracket a minimum; objective is not coercive")
