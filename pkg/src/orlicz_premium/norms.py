"""Luxemburg norms, the inner norm N_alpha, and the Orlicz norm on the dual side.

The Luxemburg norm is found in the reciprocal scale ``s = 1/lambda``: the
modular ``F(s) = E[phi(|X| s)] - 1`` is convex and nondecreasing with
``F(0) = -1``. Newton steps from the right then never overshoot, and the chord
through ``(0, -1)`` gives a certified lower end, so every iterate carries a
two-sided bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.optimize import linprog

from ._optim import golden_section
from ._quadrature import CONVERGED, DIVERGENT
from .errors import QuadratureInconclusive
from .orlicz import ScaledOrlicz
from .randvar import DiscreteRV, QuantileRV

__all__ = [
    "NormResult",
    "DualNormResult",
    "Conjugate",
    "luxemburg_norm",
    "n_alpha",
    "orlicz_norm",
    "dual_norm_oracle",
]

BISECTION_REL = 1e-10
MAX_ITER = 200


@dataclass(frozen=True)
class NormResult:
    """Norm value with its final search interval.

    For Luxemburg norms ``bracket`` encloses the norm and ``modular_at_value``
    is ``E[phi(|X|/value)]``. For Orlicz norms ``bracket`` is the final
    interval for the minimizing multiplier ``k`` and ``modular_at_value`` is
    ``E[psi(k |Y|)]`` there.
    """

    value: float
    bracket: tuple
    modular_at_value: float
    iterations: int = 0
    kind: str = "luxemburg"

    def to_dict(self) -> dict:
        return {"value": self.value, "bracket": list(self.bracket),
                "modular_at_value": self.modular_at_value, "iterations": self.iterations,
                "kind": self.kind}


@lru_cache(maxsize=256)
def _unit_level(f) -> float:
    """``f^{-1}(1)``: the norm of the constant 1 is its reciprocal."""
    return float(f.inverse_at(1.0))


# ---------------------------------------------------------------- Luxemburg


def _lux_array(a: np.ndarray, p: np.ndarray, f, rel: float = BISECTION_REL,
               max_iter: int = MAX_ITER, guess: float | None = None):
    """Luxemburg norm of the finite law ``(a, p)`` with ``a >= 0``.

    ``guess`` is an optional nearby inverse norm (``1/lambda``) used to start
    Newton close to the root. Returns ``(value, lam_lo, lam_hi, modular,
    iterations)``.
    """
    top = float(a.max())
    if top == 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0
    with np.errstate(over="ignore", invalid="ignore"):
        return _lux_array_core(a, p, f, rel, max_iter, guess, top)


def _lux_array_core(a, p, f, rel, max_iter, guess, top):
    if isinstance(f, ScaledOrlicz):
        func, deriv, w = f.base.func, f.base.deriv, f.weight
    else:
        func, deriv, w = f.func, f.deriv, 1.0
    mean = float(np.dot(p, a))
    c = _unit_level(f)
    pw = p / w

    def F(s):
        return float(np.dot(pw, func(a * s))) - 1.0

    lo, hi = c / top, c / mean          # F(lo) <= 0 <= F(hi) (sup bound, Jensen)
    f_lo = F(lo)
    if f_lo >= 0.0:
        return 1.0 / lo, 1.0 / lo, 1.0 / lo, f_lo + 1.0, 0
    f_hi = math.nan
    if guess is not None and lo < guess < hi:
        f_g = F(guess)
        if f_g > 0.0:
            hi, f_hi = guess, f_g
        else:
            lo, f_lo = guess, f_g
    if math.isnan(f_hi):
        f_hi = F(hi)
        if f_hi <= 0.0:
            return 1.0 / hi, 1.0 / hi, 1.0 / hi, f_hi + 1.0, 0
    it = 0
    while it < max_iter and hi - lo > rel * hi:
        it += 1
        cand = None
        if math.isfinite(f_hi):
            lo = max(lo, hi / (1.0 + f_hi))    # chord through (0, -1)
            if hi - lo <= rel * hi:
                break
            slope = float(np.dot(pw, a * deriv(a * hi)))
            if math.isfinite(slope) and slope > 0.0:
                cand = hi - f_hi / slope
        if cand is None or not lo < cand < hi:
            cand = math.sqrt(lo * hi)
        f_c = F(cand)
        if f_c > 0.0:
            hi, f_hi = cand, f_c
        else:
            lo, f_lo = cand, f_c
            if f_c == 0.0:
                hi, f_hi = cand, f_c
    return 1.0 / lo, 1.0 / hi, 1.0 / lo, F(lo) + 1.0, it


def _lux_quantile(X: QuantileRV, f, rel: float = BISECTION_REL, max_iter: int = MAX_ITER):
    grid = X.grid
    mean_abs, status = grid.integrate(grid.abs_lower, grid.abs_upper)
    if status != CONVERGED:
        if status == DIVERGENT:
            return math.inf, math.inf, math.inf, math.inf, 0
        raise QuadratureInconclusive("mean of |X|: quadrature neither converged nor diverged")
    if mean_abs == 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0

    def F(s):
        value, st = grid.modular(f, s, strict=False)
        if st == DIVERGENT:
            return math.inf
        if st != CONVERGED:
            raise QuadratureInconclusive(
                f"gauge expectation at lambda={1.0 / s:.6g}: quadrature inconclusive")
        return value - 1.0

    c = _unit_level(f)
    hi = c / mean_abs                   # Jensen: F(hi) >= 0
    f_hi = F(hi)
    if f_hi <= 0.0:
        return 1.0 / hi, 1.0 / hi, 1.0 / hi, f_hi + 1.0, 0
    lo = hi
    for _ in range(200):
        lo *= 0.5
        f_lo = F(lo)
        if f_lo <= 0.0:
            break
        hi, f_hi = lo, f_lo
    else:
        return math.inf, math.inf, math.inf, math.inf, 0
    it = 0
    while it < max_iter and hi - lo > rel * hi:
        it += 1
        cand = None
        if math.isfinite(f_hi):
            lo = max(lo, hi / (1.0 + f_hi))
            if hi - lo <= rel * hi:
                break
            slope, st = grid.modular_slope(f, hi)
            if st == CONVERGED and math.isfinite(slope) and slope > 0.0:
                cand = hi - f_hi / slope
        if cand is None or not lo < cand < hi:
            cand = math.sqrt(lo * hi)
        f_c = F(cand)
        if f_c > 0.0:
            hi, f_hi = cand, f_c
        else:
            lo, f_lo = cand, f_c
            if f_c == 0.0:
                hi, f_hi = cand, f_c
    modular = F(lo) + 1.0
    return 1.0 / lo, 1.0 / hi, 1.0 / lo, modular, it


def luxemburg_norm(X, f, rel: float = BISECTION_REL, max_iter: int = MAX_ITER) -> NormResult:
    """``inf{lam > 0 : E[f(|X|/lam)] <= 1}`` for a finite-valued gauge ``f``.

    The returned value is the upper end of the final bracket, so the modular
    there is at most one. Returns ``inf`` when ``X`` is outside ``L^f``.
    """
    if not getattr(f, "finite_valued", True):
        raise ValueError("Luxemburg norms need a finite-valued gauge")
    if isinstance(X, DiscreteRV):
        out = _lux_array(np.abs(X.values), X.probs, f, rel, max_iter)
    else:
        out = _lux_quantile(X, f, rel, max_iter)
    value, lam_lo, lam_hi, modular, it = out
    return NormResult(value=float(value), bracket=(float(lam_lo), float(lam_hi)),
                      modular_at_value=float(modular), iterations=it)


def n_alpha(X, f, alpha: float, rel: float = BISECTION_REL) -> NormResult:
    """The premium's inner norm, ``||X||`` under ``f / (1 - alpha)``."""
    return luxemburg_norm(X, ScaledOrlicz(f, alpha), rel)


# ---------------------------------------------------------------- dual side


@dataclass(frozen=True, eq=False)
class Conjugate:
    """The conjugate ``psi`` of a primal gauge, used as a (possibly infinite)
    Orlicz function on the dual side. ``psi`` is finite on ``[0, domain]``."""

    primal: object

    @property
    def domain(self) -> float:
        return float(self.primal.slope)

    @cached_property
    def _raw(self):
        f = self.primal
        if isinstance(f, ScaledOrlicz) and f.base.conj is not None:
            conj, w = f.base.conj, f.weight
            return lambda y: conj(w * y) / w
        if getattr(f, "conj", None) is not None:
            return f.conj
        return lambda y: np.asarray(f.conjugate(y), dtype=float)

    def func(self, y):
        y = np.asarray(y, dtype=float)
        d = self.domain
        if math.isfinite(d):
            # boundary points that land a few ulps outside by rounding
            y = np.where((y > d) & (y <= d * (1.0 + 1e-13)), d, y)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return np.asarray(self._raw(y), dtype=float)

    def __call__(self, y):
        out = self.func(y)
        return float(out) if np.ndim(y) == 0 else out


def _as_conjugate(g) -> Conjugate:
    return g if isinstance(g, Conjugate) else Conjugate(g)


def _orlicz_array(a: np.ndarray, p: np.ndarray, g: Conjugate, tol: float = 1e-13):
    top = float(a.max())
    if top == 0.0:
        return 0.0, (0.0, 0.0), 0.0, 0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _orlicz_array_core(a, p, g, tol, top)


def _orlicz_array_core(a, p, g, tol, top):
    t_min = top / g.domain if math.isfinite(g.domain) else 0.0

    raw, d = g._raw, g.domain
    finite_d = math.isfinite(d)

    def G(k):
        y = a * k
        if finite_d:
            y = np.where((y > d) & (y <= d * (1.0 + 1e-13)), d, y)
        return float(np.dot(p, raw(y)))

    def phi(t):
        # perspective form of (1 + G(k)) / k with t = 1/k; convex in t
        if t <= 0.0:
            return math.inf
        v = t * (1.0 + G(1.0 / t))
        return v if math.isfinite(v) else math.inf

    t0 = max(t_min, float(np.dot(p, a)))
    cap = phi(t0)
    if not math.isfinite(cap):
        t0 = max(t_min, top)
        cap = phi(t0)
    if not math.isfinite(cap):
        return math.inf, (0.0, 0.0), math.inf, 0
    hi = max(cap, t0)                  # phi(t) >= t, so the minimizer is below cap
    t_best, v_best, it = golden_section(phi, t_min, hi, tol=tol * hi)
    if phi(t0) < v_best:
        t_best, v_best = t0, phi(t0)
    k = 1.0 / t_best if t_best > 0 else math.inf
    return v_best, (1.0 / hi, (1.0 / t_min) if t_min > 0 else math.inf), G(k), it


def orlicz_norm(Y: DiscreteRV, g) -> NormResult:
    """Orlicz norm of ``Y`` for the conjugate-side gauge ``g``.

    ``g`` is a :class:`Conjugate` or a primal gauge whose conjugate is meant.
    Computed as ``inf_k (1 + E[g(k|Y|)])/k`` by golden-section search on the
    convex perspective in ``t = 1/k``; the infimum may sit on the finiteness
    boundary ``k = domain / max|Y|``.
    """
    if not isinstance(Y, DiscreteRV):
        raise TypeError("orlicz_norm is implemented on finite spaces only")
    value, bracket, modular, it = _orlicz_array(np.abs(Y.values), Y.probs, _as_conjugate(g))
    return NormResult(value=value, bracket=bracket, modular_at_value=modular,
                      iterations=it, kind="orlicz")


# ---------------------------------------------------------------- sup oracle


@dataclass(frozen=True)
class DualNormResult:
    value: float
    maximizer: np.ndarray
    iterations: int
    stagnated: bool
    upper: float = math.nan


def dual_norm_oracle(Y: DiscreteRV, f, rel: float = 1e-6, max_iter: int = 300) -> DualNormResult:
    """``sup{E[XY] : ||X||_f <= 1}`` over variables on the atoms of ``Y``.

    Solved on the primal side, independently of the amalgam formula used by
    :func:`orlicz_norm`: the unit ball is the modular ball
    ``{X >= 0 : E[f(X)] <= 1}`` (the maximizer may be taken nonnegative), and
    Kelley's cutting-plane method replaces ``f`` by tangent lines, so each
    round is a linear program. The LP value bounds the supremum from above;
    the LP solution rescaled to unit Luxemburg norm bounds it from below.
    Stops when the two agree to ``rel``; ``value`` is the certified lower bound.
    """
    if not isinstance(Y, DiscreteRV):
        raise TypeError("dual_norm_oracle needs a DiscreteRV")
    if Y.size > 8:
        raise ValueError("dual_norm_oracle is limited to 8 atoms")
    y = np.abs(Y.values)
    p = Y.probs
    n = y.size
    if y.max() == 0.0:
        return DualNormResult(0.0, np.zeros(n), 0, False, 0.0)

    # X_i <= f^{-1}(1/p_i) on the modular ball
    ub = np.array([f.inverse_at(1.0 / q) for q in p])
    cost = np.concatenate([-p * y, np.zeros(n)])
    budget = np.concatenate([np.zeros(n), p])
    rows, rhs = [], []

    def add_cut(i: int, x0: float) -> None:
        with np.errstate(over="ignore"):
            fx = float(f.func(np.array([x0]))[0])
            slope = float(f.deriv(np.array([x0]))[0])
        if not (math.isfinite(fx) and math.isfinite(slope)):
            return
        row = np.zeros(2 * n)
        row[i], row[n + i] = slope, -1.0
        rows.append(row)
        rhs.append(slope * x0 - fx)

    for i in range(n):
        for x0 in (0.0, min(1.0, ub[i]), ub[i]):
            add_cut(i, x0)
    bounds = [(0.0, float(u)) for u in ub] + [(0.0, None)] * n
    best_x, lower, upper = None, -math.inf, math.inf
    it = 0
    for it in range(1, max_iter + 1):
        res = linprog(cost, A_ub=np.vstack([budget] + rows), b_ub=np.array([1.0] + rhs),
                      bounds=bounds, method="highs")
        if res.status != 0:
            break
        x = np.asarray(res.x[:n])
        upper = min(upper, -float(res.fun))
        if np.any(x > 0):
            lam = _lux_array(x, p, f)[0]
            val = float(np.dot(p, x * y)) / lam if lam > 0 else -math.inf
            if val > lower:
                lower, best_x = val, x / lam
        if upper - lower <= rel * upper:
            break
        with np.errstate(over="ignore"):
            fx = f.func(x)
        for i in np.flatnonzero(fx > res.x[n:] + 1e-15 * np.maximum(1.0, fx)):
            add_cut(int(i), float(x[i]))
        if best_x is not None:
            # tangents at the feasible rescale tighten the model where it matters
            for i in np.flatnonzero(best_x > 0):
                add_cut(int(i), float(best_x[i]))
    stagnated = not upper - lower <= rel * upper
    return DualNormResult(float(lower), best_x, it, stagnated, float(upper))
