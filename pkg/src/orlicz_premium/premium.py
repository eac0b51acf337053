"""The Haezendonck-Goovaerts premium, VaR and Expected Shortfall.

``premium_at(X, m) = m + N_alpha((X - m)^+)`` is convex and coercive in ``m``;
the premium is its minimum, located by a doubling bracket and golden-section
search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._optim import bracket_by_doubling, golden_section
from .errors import MembershipInconclusive, NotInOrliczSpace
from .norms import BISECTION_REL, _lux_array, luxemburg_norm
from .orlicz import ScaledOrlicz
from .randvar import DiscreteRV, QuantileRV, coarsen, expectation, membership

__all__ = [
    "PremiumResult",
    "HalfLineEval",
    "CoarseningCheck",
    "premium_at",
    "premium",
    "var",
    "expected_shortfall",
    "coarsening_bound_check",
]

MINIMIZER_ABS = 1e-9


@dataclass(frozen=True)
class PremiumResult:
    value: float
    m_star: float
    inner_norm: float
    iterations: int
    phi: str = ""
    alpha: float = math.nan

    def to_dict(self) -> dict:
        return {"value": self.value, "m_star": self.m_star, "inner_norm": self.inner_norm,
                "phi": self.phi, "alpha": self.alpha, "iterations": self.iterations}


@dataclass(frozen=True)
class HalfLineEval:
    m: float
    value: float


@dataclass(frozen=True)
class CoarseningCheck:
    lhs: float
    rhs: float
    holds: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


def _inner_norm(X, fa: ScaledOrlicz, m: float, rel: float) -> float:
    if isinstance(X, DiscreteRV):
        return _lux_array(np.maximum(X.values - m, 0.0), X.probs, fa, rel)[0]
    return luxemburg_norm(X.positive_part(m), fa, rel).value


def premium_at(X, f, alpha: float, m: float, rel: float = BISECTION_REL) -> HalfLineEval:
    """``m + N_alpha((X - m)^+)``."""
    fa = ScaledOrlicz(f, alpha)
    return HalfLineEval(m=float(m), value=float(m + _inner_norm(X, fa, m, rel)))


def _check_membership(X, f) -> None:
    if isinstance(X, DiscreteRV):
        return
    mem = membership(X, f)
    if not mem.in_L_Phi:
        if mem.inconclusive:
            raise MembershipInconclusive(f"cannot decide whether {X.name} lies in L^{f.label}")
        raise NotInOrliczSpace(f"{X.name} is not in the Orlicz space of {f.label}")


def _initial_bracket(X):
    if isinstance(X, DiscreteRV):
        return float(X.values[0]) - 1.0, float(X.values[-1]) + 1.0
    lo = X.quantile(1e-3)
    hi = X.quantile(1.0 - 1e-3)
    return float(lo) - 1.0, float(hi) + 1.0


def premium(X, f, alpha: float, tol: float = MINIMIZER_ABS,
            rel: float = BISECTION_REL) -> PremiumResult:
    """Minimize ``m -> m + N_alpha((X - m)^+)``.

    Raises :class:`NotInOrliczSpace` for ``X`` outside ``L^f``. Any minimizer
    is accepted as ``m_star``; only the value is meaningful across runs.
    """
    _check_membership(X, f)
    fa = ScaledOrlicz(f, alpha)
    count = 0
    cache: dict[float, float] = {}
    discrete = isinstance(X, DiscreteRV)
    last = [None, 0.0]      # previous inverse norm and its relative change

    def inner(m: float) -> float:
        if not discrete:
            return _inner_norm(X, fa, m, rel)
        guess = None
        if last[0] is not None:
            guess = last[0] * (1.0 + 2.0 * last[1] + 1e-12)
        lam = _lux_array(np.maximum(X.values - m, 0.0), X.probs, fa, rel, guess=guess)[0]
        if lam > 0.0:
            s = 1.0 / lam
            if last[0] is not None:
                last[1] = min(abs(s - last[0]) / last[0], 1.0)
            last[0] = s
        return lam

    def objective(m: float) -> float:
        nonlocal count
        if m not in cache:
            count += 1
            cache[m] = m + inner(m)
        return cache[m]

    lo, hi = _initial_bracket(X)
    if isinstance(X, DiscreteRV) and X.size == 1:
        c = float(X.values[0])
        return PremiumResult(c, c, 0.0, 0, f.label, float(alpha))
    lo, hi = bracket_by_doubling(objective, lo, hi)
    m, v, _ = golden_section(objective, lo, hi, tol=tol)
    # polish on a five-point stencil around the golden-section estimate
    for k in (-2, -1, 1, 2):
        mk = m + k * tol
        vk = objective(mk)
        if vk < v:
            m, v = mk, vk
    norm = v - m
    return PremiumResult(float(m + norm), float(m), float(norm), count, f.label, float(alpha))


# ---------------------------------------------------------------- quantile functionals


def var(X, p: float) -> float:
    """Lower ``p``-quantile ``inf{x : P(X <= x) >= p}``."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if isinstance(X, DiscreteRV):
        cum = np.cumsum(X.probs)
        idx = int(np.searchsorted(cum, p - 1e-12, side="left"))
        return float(X.values[min(idx, X.size - 1)])
    if not X.monotone:
        raise ValueError("VaR needs a monotone quantile representation")
    return float(X.quantile(p))


def expected_shortfall(X, lam: float) -> float:
    """``1/(1-lam) * int_lam^1 VaR_p(X) dp``."""
    if not 0.0 < lam < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    if isinstance(X, DiscreteRV):
        upper = np.cumsum(X.probs)
        upper[-1] = 1.0
        lower = np.concatenate([[0.0], upper[:-1]])
        overlap = np.clip(upper, lam, 1.0) - np.clip(lower, lam, 1.0)
        return float(np.dot(overlap, X.values) / (1.0 - lam))
    if not X.monotone:
        raise ValueError("Expected Shortfall needs a monotone quantile representation")
    q = var(X, lam)
    tail = expectation(X.positive_part(q))
    return float(q + tail / (1.0 - lam))


def coarsening_bound_check(X: DiscreteRV, partition, f, alpha: float) -> CoarseningCheck:
    """Compare ``premium(coarsen(X))`` with ``premium(X)``; holds within 1e-8."""
    lhs = premium(coarsen(X, partition), f, alpha).value
    rhs = premium(X, f, alpha).value
    return CoarseningCheck(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs + 1e-8))
