"""Dual side of the premium on finite probability spaces.

The premium is a supremum of ``E[XY]`` over densities ``Y >= 0`` with
``E[Y] = 1`` and Orlicz norm ``||Y||_{psi_alpha} <= 1``. Every feasible density
gives a lower bound for the premium, so the dual value reported here is only
ever backed by a density whose feasibility was checked with the amalgam norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .norms import Conjugate, _lux_array, _orlicz_array
from .orlicz import ScaledOrlicz
from .premium import PremiumResult, premium
from .randvar import DiscreteRV

__all__ = [
    "DualDensity",
    "FeasibilityCertificate",
    "ConjugateValue",
    "DualResult",
    "WeakDualityResult",
    "conjugate_value",
    "dual_premium",
    "weak_duality_sample",
    "primal_dual_report",
]

MEAN_TOL = 1e-10
NORM_MARGIN = 1e-8
GAP_FAIL = 1e-3
MAX_ATOMS_CONJ = 64
MAX_ATOMS_DUAL = 16


@dataclass(frozen=True)
class DualDensity:
    """Candidate ``dQ/dP`` on the atoms of a finite space with weights ``base``."""

    density: np.ndarray
    base: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.density, dtype=float).ravel()
        b = np.asarray(self.base, dtype=float).ravel()
        if d.shape != b.shape:
            raise ValueError("density and base probabilities must have the same length")
        object.__setattr__(self, "density", d)
        object.__setattr__(self, "base", b)

    @property
    def mean(self) -> float:
        return float(np.dot(self.base, self.density))

    def to_dict(self) -> dict:
        return {"density": self.density.tolist(), "base": self.base.tolist()}


@dataclass(frozen=True)
class FeasibilityCertificate:
    nonneg: bool
    mean_one: bool
    norm_value: float
    feasible: bool

    def to_dict(self) -> dict:
        return {"nonneg": self.nonneg, "mean_one": self.mean_one,
                "norm_value": self.norm_value, "feasible": self.feasible}


@dataclass(frozen=True)
class ConjugateValue:
    value: float
    certificate: FeasibilityCertificate
    violation: str | None


def _dual_norm(y: np.ndarray, p: np.ndarray, g: Conjugate) -> float:
    return _orlicz_array(np.abs(y), p, g)[0]


def _certify(y: np.ndarray, p: np.ndarray, g: Conjugate) -> FeasibilityCertificate:
    nonneg = bool(np.all(y >= 0.0))
    mean_one = bool(abs(float(np.dot(p, y)) - 1.0) <= MEAN_TOL)
    norm = float(_dual_norm(y, p, g))
    feasible = nonneg and mean_one and norm <= 1.0 + NORM_MARGIN
    return FeasibilityCertificate(nonneg, mean_one, norm, feasible)


def conjugate_value(Y: DualDensity, f, alpha: float) -> ConjugateValue:
    """Conjugate of the premium at ``Y``: 0 on the dual set, ``+inf`` off it.

    The first violated condition is named (``nonneg``, ``mean_one`` or
    ``norm``).
    """
    if Y.density.size > MAX_ATOMS_CONJ:
        raise ValueError(f"conjugate_value is limited to {MAX_ATOMS_CONJ} atoms")
    g = Conjugate(ScaledOrlicz(f, alpha))
    cert = _certify(Y.density, Y.base, g)
    if cert.feasible:
        return ConjugateValue(0.0, cert, None)
    violation = ("nonneg" if not cert.nonneg else
                 "mean_one" if not cert.mean_one else "norm")
    return ConjugateValue(math.inf, cert, violation)


# ---------------------------------------------------------------- ascent helpers


def _project_mean_one(v: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Projection onto ``{y >= 0, sum p y = 1}`` in the ``p``-weighted norm:
    ``y = (v - tau)^+`` with ``tau`` fixing the mean."""
    order = np.argsort(-v)
    vs, ps = v[order], p[order]
    cp = np.cumsum(ps)
    cpv = np.cumsum(ps * vs)
    taus = (cpv - 1.0) / cp
    nxt = np.concatenate([vs[1:], [-np.inf]])
    k = int(np.nonzero((vs > taus) & (taus >= nxt))[0][0])
    return np.maximum(v - taus[k], 0.0)


def _pull_back(y: np.ndarray, p: np.ndarray, g: Conjugate, norm_y: float):
    """Largest ``theta`` in [0, 1] with ``||1 + theta (y - 1)|| <= 1``.

    The segment stays in the mean-one nonnegative set. ``theta -> norm`` is
    convex and the unit density has norm below one, so Illinois regula falsi
    on ``norm - 1`` brackets the crossing from the feasible side.
    """
    if norm_y <= 1.0:
        return y, norm_y
    ones = np.ones_like(y)
    a, fa = 0.0, _dual_norm(ones, p, g) - 1.0
    b, fb = 1.0, norm_y - 1.0
    if not math.isfinite(fb):
        fb = 1e30
    side = 0
    for _ in range(100):
        c = (a * fb - b * fa) / (fb - fa)
        if not a < c < b:
            c = 0.5 * (a + b)
        fc = _dual_norm(ones + c * (y - ones), p, g) - 1.0
        if not math.isfinite(fc):
            fc = 1e30
        if fc <= 0.0:
            a, fa = c, fc
            if side == -1:
                fb *= 0.5
            side = -1
            if fc > -1e-12:
                break
        else:
            b, fb = c, fc
            if side == 1:
                fa *= 0.5
            side = 1
        if b - a < 1e-15:
            break
    out = ones + a * (y - ones)
    return out, _dual_norm(out, p, g)


@dataclass(frozen=True)
class DualResult:
    value: float
    argmax: DualDensity
    gap_vs_primal: float
    certificate: FeasibilityCertificate
    primal: PremiumResult
    iterations: int
    stagnated: bool

    @property
    def relative_gap(self) -> float:
        return abs(self.gap_vs_primal) / max(1.0, abs(self.primal.value))


def _excess_mean(x: np.ndarray, p: np.ndarray, fa: ScaledOrlicz, m: float):
    """``E[y(m)] - 1`` for the norming density of ``(x - m)^+``, with its norm."""
    lam = _lux_array(np.maximum(x - m, 0.0), p, fa, rel=1e-15)[0]
    z = np.maximum(x - m, 0.0) / lam
    with np.errstate(over="ignore", invalid="ignore"):
        dz = np.asarray(fa.deriv(z), dtype=float)
    c = float(np.dot(p, z * dz))
    return float(np.dot(p, np.where(x > m, dz, 0.0))) / c - 1.0, lam


def _refine_minimizer(x: np.ndarray, p: np.ndarray, fa: ScaledOrlicz, m: float, lam: float):
    """Sharpen an interior minimizer through its first-order condition.

    Between two adjacent atoms the derivative of ``m + N((x - m)^+)`` is
    ``-(E[y(m)] - 1)``, so the exact minimizer is the root of the excess mean.
    Atom minimizers and failed brackets return the input unchanged.
    """
    below, above = x[x < m], x[x > m]
    if below.size == 0 or above.size == 0:
        return m, lam
    lo, hi = float(below.max()), float(above.min())
    scale = 1e-9 * max(1.0, abs(m))
    if m - lo <= scale or hi - m <= scale:
        return m, lam
    try:
        h_lo, h_hi = _excess_mean(x, p, fa, lo)[0], _excess_mean(x, p, fa, hi)[0]
        if not (math.isfinite(h_lo) and math.isfinite(h_hi) and h_lo > 0.0 > h_hi):
            return m, lam
        root = brentq(lambda t: _excess_mean(x, p, fa, t)[0], lo, hi, xtol=1e-15, rtol=1e-15)
    except (ValueError, ZeroDivisionError):
        return m, lam
    return root, _excess_mean(x, p, fa, root)[1]


def _warm_start(x: np.ndarray, p: np.ndarray, fa: ScaledOrlicz, res: PremiumResult):
    """Density built from the primal optimum ``(m*, lambda*)``.

    ``s / E[z s]`` with ``z = (x - m*)^+ / lambda*`` and ``s`` a subgradient of
    ``phi_alpha`` at ``z``. Where the subgradient is an interval (atoms at
    ``m*``, atoms on a kink of the gauge) the two ends are mixed with a common
    weight chosen so that ``E[s] = E[z s]``, which makes the mean one.
    """
    m, lam = res.m_star, res.inner_norm
    if not lam > 0.0:
        return None
    m, lam = _refine_minimizer(x, p, fa, m, lam)
    # the minimizer usually sits on an atom; snap it there so that atom is
    # treated as lying at m* rather than just below it
    near = np.abs(x - m) <= 1e-9 * max(1.0, abs(m))
    if np.any(near):
        m = float(x[near][np.argmin(np.abs(x[near] - m))])
    z = np.maximum(x - m, 0.0) / lam
    with np.errstate(over="ignore", invalid="ignore"):
        s_mid = np.asarray(fa.deriv(z), dtype=float)
        s_lo = np.asarray(fa.deriv(z * (1.0 - 1e-9)), dtype=float)
        s_hi = np.asarray(fa.deriv(z * (1.0 + 1e-9)), dtype=float)
    kink = np.abs(s_hi - s_lo) > 1e-6 * np.maximum(1.0, np.abs(s_hi))
    lo = np.where(kink, s_lo, s_mid)
    hi = np.where(kink, s_hi, s_mid)
    lo = np.where(x > m, lo, 0.0)
    hi = np.where(x >= m, np.where(x > m, hi, s_mid), 0.0)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        return None
    r_lo = float(np.dot(p, lo * (1.0 - z)))
    r_hi = float(np.dot(p, hi * (1.0 - z)))
    if r_lo != r_hi and (r_lo <= 0.0 <= r_hi or r_hi <= 0.0 <= r_lo):
        theta = r_lo / (r_lo - r_hi)
    else:
        theta = 0.0 if abs(r_lo) <= abs(r_hi) else 1.0
    sub = lo + theta * (hi - lo)
    c = float(np.dot(p, z * sub))
    if not (math.isfinite(c) and c > 0.0):
        return None
    y = sub / c
    mean = float(np.dot(p, y))
    if not mean > 0.0:
        return None
    return y / mean


def _ascend(y: np.ndarray, x: np.ndarray, p: np.ndarray, g: Conjugate, max_iter: int,
            target: float = math.inf, min_delta: float = 1e-12):
    """Projected ascent of ``E[xy]`` followed by pairwise coordinate moves.

    Stops early once the value reaches ``target`` (the primal premium, an
    upper bound by weak duality) to within 1e-9 relative.
    """
    y, norm = _pull_back(y, p, g, _dual_norm(y, p, g))
    val = float(np.dot(p, x * y))
    goal = target - 1e-9 * max(1.0, abs(target))
    if val >= goal:
        return y, val, 0
    direction = x - float(np.dot(p, x))
    scale = max(float(np.abs(direction).max()), 1e-300)
    step = 0.5 / scale
    it = 0
    for _ in range(max_iter):
        it += 1
        cand = _project_mean_one(y + step * direction, p)
        cand, cn = _pull_back(cand, p, g, _dual_norm(cand, p, g))
        cv = float(np.dot(p, x * cand))
        if cv > val + 1e-15 * max(1.0, abs(val)):
            y, norm, val = cand, cn, cv
            step *= 2.0
            if val >= goal:
                return y, val, it
        else:
            step *= 0.25
            if step * scale < 1e-12:
                break
    # pairwise moves between atoms adjacent in x: shift mass toward the larger x
    order = np.argsort(x)
    delta = 0.25
    while delta > min_delta and it < 5 * max_iter:
        moved = False
        for lo_i, hi_i in zip(order[:-1], order[1:]):
            if x[hi_i] <= x[lo_i] or y[lo_i] <= 0.0:
                continue
            mass = min(delta, p[lo_i] * y[lo_i])
            cand = y.copy()
            cand[lo_i] -= mass / p[lo_i]
            cand[hi_i] += mass / p[hi_i]
            cand[lo_i] = max(cand[lo_i], 0.0)
            cand, cn = _pull_back(cand, p, g, _dual_norm(cand, p, g))
            cv = float(np.dot(p, x * cand))
            it += 1
            if cv > val + 1e-15 * max(1.0, abs(val)):
                y, norm, val, moved = cand, cn, cv, True
                if val >= goal:
                    return y, val, it
        if not moved:
            delta *= 0.5
    return y, val, it


def dual_premium(X: DiscreteRV, f, alpha: float, n_starts: int = 3, seed: int = 0,
                 max_iter: int = 200, primal: PremiumResult | None = None) -> DualResult:
    """Maximize ``E[XY]`` over the dual density set of the premium.

    Starts: the density built from the primal optimum, ``y = 1``, and
    ``n_starts`` seeded random densities. The reported value is the best
    certified-feasible start after ascent.
    """
    if X.size > MAX_ATOMS_DUAL:
        raise ValueError(f"dual_premium is limited to {MAX_ATOMS_DUAL} atoms")
    x, p = X.values, X.probs
    fa = ScaledOrlicz(f, alpha)
    g = Conjugate(fa)
    res = primal if primal is not None else premium(X, f, alpha)
    rng = np.random.default_rng(seed)
    starts = []
    warm = _warm_start(x, p, fa, res)
    if warm is not None:
        starts.append(warm)
    starts.append(np.ones_like(x))
    random_starts = [rng.exponential(size=x.size) for _ in range(n_starts)]
    starts += [e / float(np.dot(p, e)) for e in random_starts]
    goal = res.value - 1e-9 * max(1.0, abs(res.value))
    best_y, best_v, best_cert = None, -math.inf, None
    total = 0
    for i, y0 in enumerate(starts):
        if best_v >= goal:
            break       # further starts only when the earlier ones fall short
        if X.size == 1:
            y, it = np.ones(1), 0
        else:
            y, _, it = _ascend(y0, x, p, g, max_iter, target=res.value)
        total += it
        # renormalize the mean exactly before certifying
        y = y / float(np.dot(p, y))
        cert = _certify(y, p, g)
        v = float(np.dot(p, x * y))
        if cert.feasible and v > best_v:
            best_y, best_v, best_cert = y, v, cert
    stagnated = best_y is None
    if stagnated:
        best_y = np.ones_like(x)
        best_cert = _certify(best_y, p, g)
        best_v = float(np.dot(p, x))
    return DualResult(value=best_v, argmax=DualDensity(best_y, p),
                      gap_vs_primal=res.value - best_v, certificate=best_cert,
                      primal=res, iterations=total, stagnated=stagnated)


@dataclass(frozen=True)
class WeakDualityResult:
    max_value: float
    bound: float
    accepted: int
    rejected: int
    shrunk: int
    holds: bool

    def to_dict(self) -> dict:
        return {"max_value": self.max_value, "primal": self.bound, "accepted": self.accepted,
                "rejected": self.rejected, "shrunk": self.shrunk, "holds": self.holds}


def weak_duality_sample(X: DiscreteRV, f, alpha: float, n_samples: int = 200,
                        seed: int = 0, primal: PremiumResult | None = None,
                        max_shrink: int = 20) -> WeakDualityResult:
    """Largest ``E[XY]`` over random feasible densities; never above the premium.

    Random exponential densities are scaled to mean one; infeasible ones are
    shrunk toward ``y = 1`` (always feasible) by halving. ``y = 1`` itself is
    always included.
    """
    x, p = X.values, X.probs
    g = Conjugate(ScaledOrlicz(f, alpha))
    res = primal if primal is not None else premium(X, f, alpha)
    rng = np.random.default_rng(seed)
    best = float(np.dot(p, x))
    accepted, rejected, shrunk = 1, 0, 0
    ones = np.ones_like(x)
    for _ in range(n_samples):
        e = rng.exponential(size=x.size)
        y = e / float(np.dot(p, e))
        ok = _dual_norm(y, p, g) <= 1.0
        if not ok:
            rejected += 1
            for _ in range(max_shrink):
                y = 0.5 * (y + ones)
                if _dual_norm(y, p, g) <= 1.0:
                    ok = True
                    shrunk += 1
                    break
        if ok:
            accepted += 1
            best = max(best, float(np.dot(p, x * y)))
    return WeakDualityResult(max_value=best, bound=res.value, accepted=accepted,
                             rejected=rejected, shrunk=shrunk,
                             holds=bool(best <= res.value + 1e-8))


def primal_dual_report(X: DiscreteRV, f, alpha: float, n_samples: int = 200,
                       seed: int = 0, gap_tol: float = GAP_FAIL) -> dict:
    """Premium, dual value and weak-duality sampling bundled as a JSON-ready dict."""
    primal = premium(X, f, alpha)
    dual = dual_premium(X, f, alpha, seed=seed, primal=primal)
    weak = weak_duality_sample(X, f, alpha, n_samples=n_samples, seed=seed, primal=primal)
    verdict = "PASS" if (dual.gap_vs_primal <= gap_tol and weak.holds
                         and dual.certificate.feasible) else "FAIL"
    return {
        "phi": f.label,
        "alpha": float(alpha),
        "atoms": [[v, q] for v, q in X.atoms],
        "primal": primal.to_dict(),
        "dual": dual.value,
        "gap": dual.gap_vs_primal,
        "relative_gap": dual.relative_gap,
        "argmax_density": dual.argmax.density.tolist(),
        "feasibility": dual.certificate.to_dict(),
        "weak_duality": weak.to_dict(),
        "stagnated": dual.stagnated,
        "verdict": verdict,
    }
