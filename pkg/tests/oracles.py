"""Independent reference computations used to check the engine.

Nothing here imports the package's solvers: conjugates are written out in
closed form, norms use scipy's brentq, and the dual problem is solved by
brute force on a grid.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar

E1 = math.e - 1.0


# ---------------------------------------------------------------- gauges


def phi_value(name: str, x, p: float = 2.0, a: float = 0.5):
    x = np.asarray(x, dtype=float)
    if name == "identity":
        return x
    if name == "power":
        return x ** p
    if name == "exponential":
        with np.errstate(over="ignore"):
            return np.expm1(x) / E1
    if name == "square-exponential":
        with np.errstate(over="ignore"):
            return np.expm1(x * x) / E1
    if name == "kinked":
        return np.maximum(x - a, 0.0) / (1.0 - a)
    raise KeyError(name)


def psi_value(name: str, y, p: float = 2.0, a: float = 0.5):
    """Closed-form conjugate of the catalog entry, ``inf`` outside its domain."""
    y = np.asarray(y, dtype=float)
    if name == "identity":
        return np.where(y <= 1.0, 0.0, np.inf)
    if name == "power":
        q = p / (p - 1.0)
        return (p - 1.0) * (y / p) ** q
    if name == "exponential":
        c = 1.0 / E1
        safe = np.maximum(y, c)
        return np.where(y > c, safe * np.log(safe / c) - safe + c, 0.0)
    if name == "kinked":
        top = 1.0 / (1.0 - a)
        return np.where(y <= top, a * y, np.inf)
    raise KeyError(name)


def psi_slope(name: str, a: float = 0.5) -> float:
    """Right end of the conjugate's finite domain."""
    return {"identity": 1.0, "kinked": 1.0 / (1.0 - a)}.get(name, math.inf)


def psi_alpha(name: str, y, alpha: float, **kw):
    w = 1.0 - alpha
    return psi_value(name, w * np.asarray(y, dtype=float), **kw) / w


# ---------------------------------------------------------------- norms and premia


def luxemburg(values, probs, name: str, alpha: float | None = None, **kw) -> float:
    """Root of ``E[phi(|X|/lam)] = 1`` by brentq (``phi/(1-alpha)`` when alpha is set)."""
    a = np.abs(np.asarray(values, dtype=float))
    p = np.asarray(probs, dtype=float)
    if not np.any(a > 0):
        return 0.0
    w = 1.0 if alpha is None else 1.0 - alpha
    # solve on a / max(a) where brentq's absolute xtol is meaningful, then rescale
    top = float(a.max())
    a = a / top

    def g(lam):
        return float(np.dot(p, phi_value(name, a / lam, **kw))) / w - 1.0

    lo, hi = 1e-3 * a.max(), 10.0 * a.max()
    while g(lo) < 0:
        lo /= 2.0
    while g(hi) > 0:
        hi *= 2.0
    return top * brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)


def premium(values, probs, name: str, alpha: float, **kw) -> float:
    """Minimize ``m + N_alpha((X-m)^+)`` with scipy's bounded Brent search."""
    v = np.asarray(values, dtype=float)

    def obj(m):
        return m + luxemburg(np.maximum(v - m, 0.0), probs, name, alpha, **kw)

    lo, hi = v.min() - 1.0, v.max()
    while obj(lo - 1.0) <= obj(lo):
        lo -= 2.0 * (hi - lo)
    res = minimize_scalar(obj, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-11, "maxiter": 1000})
    # convex and piecewise smooth: also try the atoms, where kinks sit
    best = min([res.fun] + [obj(m) for m in v if lo <= m <= hi])
    return float(best)


def expected_shortfall(values, probs, alpha: float) -> float:
    """Greedy fill: put density 1/(1-alpha) on the largest outcomes."""
    order = np.argsort(values)[::-1]
    budget = 1.0 - alpha
    total = 0.0
    for i in order:
        take = min(probs[i], budget)
        total += take * values[i]
        budget -= take
        if budget <= 0.0:
            break
    return total / (1.0 - alpha)


# ---------------------------------------------------------------- dual problem


def _vector_golden(h, lo, hi, iters: int = 120):
    """Golden-section search applied elementwise to a unimodal batch ``h``."""
    r = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo.copy(), hi.copy()
    for _ in range(iters):
        c, d = b - r * (b - a), a + r * (b - a)
        left = h(c) <= h(d)
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    t = 0.5 * (a + b)
    return t, h(t)


def dual_violation(Y, probs, name: str, alpha: float, **kw):
    """``min_k [1 + E psi_alpha(k Y) - k]`` per row of ``Y``; feasible iff <= 0.

    This is the amalgam norm condition ``||Y|| <= 1`` rewritten without the
    division. The minimization runs in ``t = log k``, where the convex
    objective stays unimodal.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    p = np.asarray(probs, dtype=float)
    ymax = np.maximum(Y.max(axis=1), 1e-300)
    w = 1.0 - alpha
    top = psi_slope(name, kw.get("a", 0.5))
    k_hi = np.full(len(Y), 1e6) if math.isinf(top) else top / (w * ymax)

    def h(t):
        k = np.exp(t)
        with np.errstate(over="ignore", invalid="ignore"):
            val = psi_alpha(name, k[:, None] * Y, alpha, **kw) @ p
        return np.where(np.isfinite(val), 1.0 + val - k, np.inf)

    t, v = _vector_golden(h, np.full(len(Y), math.log(1e-6)), np.log(k_hi))
    # the constrained optimum of a finite-domain conjugate sits on the boundary
    v = np.minimum(v, h(np.log(k_hi) - 1e-15))
    return v


def grid_dual(values, probs, name: str, alpha: float, step: float = 1e-3,
              zoom: int = 3, **kw) -> float:
    """Brute-force ``sup E[XY]`` over feasible densities on three atoms.

    The density is parametrized by the masses ``q_i = p_i y_i`` on the
    2-simplex, scanned at ``step``, then refined ``zoom`` times by a factor of
    ten in a window of five coarse steps around the best feasible point.
    """
    x = np.asarray(values, dtype=float)
    p = np.asarray(probs, dtype=float)
    if len(x) != 3:
        raise ValueError("grid oracle is limited to three atoms")

    def scan(c0, c1, half, h):
        g0 = np.arange(max(0.0, c0 - half), min(1.0, c0 + half) + h / 2, h)
        g1 = np.arange(max(0.0, c1 - half), min(1.0, c1 + half) + h / 2, h)
        q0, q1 = np.meshgrid(g0, g1, indexing="ij")
        q0, q1 = q0.ravel(), q1.ravel()
        q2 = 1.0 - q0 - q1
        keep = q2 >= -1e-15
        Q = np.stack([q0[keep], q1[keep], np.maximum(q2[keep], 0.0)], axis=1)
        obj = Q @ x
        best_val, best_q = -math.inf, None
        # test candidates in decreasing objective order, in chunks
        order = np.argsort(-obj)
        for start in range(0, len(order), 4096):
            idx = order[start:start + 4096]
            feas = dual_violation(Q[idx] / p, p, name, alpha, **kw) <= 1e-12
            if feas.any():
                j = idx[np.argmax(feas)]
                best_val, best_q = float(obj[j]), Q[j]
                break
        return best_val, best_q

    val, q = scan(0.5, 0.5, 0.5, step)
    h = step
    for _ in range(zoom):
        if q is None:
            break
        # the objective is nearly tangent to the feasible boundary, so the
        # best coarse point can sit several coarse steps from the optimum
        v2, q2 = scan(q[0], q[1], 5.0 * h, h / 10.0)
        h /= 10.0
        if q2 is not None and v2 > val:
            val, q = v2, q2
    return val
