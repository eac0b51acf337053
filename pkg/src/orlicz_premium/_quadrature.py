"""Ring quadrature on (0, 1) with divergence detection at the endpoints.

The unit interval is split at 1/2 into two halves, each parametrized by the
distance ``t`` to its endpoint (``u`` for the lower half, ``1 - u`` for the
upper half) so that points close to 1 are represented without cancellation.
Each half is covered by dyadic rings ``[2^-(k+2), 2^-(k+1)]`` (further split at
user breakpoints) with a Gauss-Legendre rule per panel. Integrals of
nonnegative integrands are classified from the ring masses closest to the
endpoint: growing masses mean divergence, geometric decay means convergence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureInconclusive

GL_ORDER = 10
DEPTH_SINGULAR = 400
DEPTH_REGULAR = 80
WINDOW = 8
NEGLIGIBLE = 1e-15
RATIO_ONE = 1.0 - 1e-9
STABLE = 1e-6

_XI, _OMEGA = np.polynomial.legendre.leggauss(GL_ORDER)

CONVERGED, DIVERGENT, INCONCLUSIVE = "converged", "divergent", "inconclusive"


@dataclass(frozen=True)
class HalfGrid:
    t: np.ndarray       # node coordinates, distance to the endpoint
    w: np.ndarray       # quadrature weights
    ring: np.ndarray    # ring index per node; index ``depth`` is the last panel (0, t_K]
    depth: int


def half_grid(breaks, depth: int) -> HalfGrid:
    ladder = 0.5 * 2.0 ** -np.arange(depth + 1, dtype=float)
    inner = 0.75 * ladder[:-1]          # split each ring in two
    t_min = ladder[-1]
    extra = [b for b in breaks if t_min < b < 0.5]
    edges = np.unique(np.concatenate([ladder, inner, np.asarray(extra, dtype=float)]))
    edges = np.concatenate([[0.0], edges])
    left, right = edges[:-1], edges[1:]
    mid = 0.5 * (left + right)
    ring = np.where(left == 0.0, depth,
                    np.minimum(np.floor(np.log2(0.5 / mid)), depth - 1)).astype(np.int64)
    half = 0.5 * (right - left)
    t = (mid[:, None] + half[:, None] * _XI[None, :]).ravel()
    w = (half[:, None] * _OMEGA[None, :]).ravel()
    return HalfGrid(t=t, w=w, ring=np.repeat(ring, GL_ORDER), depth=depth)


def classify(masses: np.ndarray, depth: int):
    """Sum ring masses of a nonnegative integrand and classify the endpoint."""
    rings = masses[:depth]
    final = masses[depth]
    if np.isnan(masses).any():
        return np.nan, INCONCLUSIVE
    if not np.isfinite(masses).all():
        return np.inf, DIVERGENT
    total = float(rings.sum())
    tail = rings[-WINDOW:]
    last = tail[-1]
    if last == 0.0:
        return total + final, CONVERGED
    if np.any(tail <= 0.0):
        if last <= NEGLIGIBLE * total:
            return total + final, CONVERGED
        return total, INCONCLUSIVE
    r = tail[1:] / tail[:-1]
    r_max, r_min = float(r.max()), float(r.min())
    if r_max < 1.0 and last * r_max / (1.0 - r_max) <= NEGLIGIBLE * total:
        return total + final, CONVERGED
    if r_min >= RATIO_ONE:
        return np.inf, DIVERGENT
    if r_max < 1.0 and r_max - r_min <= STABLE * r_max:
        return total + last * r[-1] / (1.0 - r[-1]), CONVERGED
    return total, INCONCLUSIVE


class Grid:
    """Quadrature nodes for a function of a uniform variable on (0, 1)."""

    def __init__(self, lower_fn, upper_fn, breaks_lower=(), breaks_upper=(),
                 singular=(True, True)):
        self.lower = half_grid(breaks_lower, DEPTH_SINGULAR if singular[0] else DEPTH_REGULAR)
        self.upper = half_grid(breaks_upper, DEPTH_SINGULAR if singular[1] else DEPTH_REGULAR)
        with np.errstate(all="ignore"):
            self.g_lower = np.asarray(lower_fn(self.lower.t), dtype=float)
            self.g_upper = np.asarray(upper_fn(self.upper.t), dtype=float)
        self.abs_lower = np.abs(self.g_lower)
        self.abs_upper = np.abs(self.g_upper)

    @property
    def size(self) -> int:
        return self.lower.t.size + self.upper.t.size

    def integrate(self, h_lower: np.ndarray, h_upper: np.ndarray):
        """Integral of a nonnegative integrand given by its node values.

        Returns ``(value, status)`` with status one of converged / divergent /
        inconclusive.
        """
        out = []
        for half, h in ((self.lower, h_lower), (self.upper, h_upper)):
            masses = np.bincount(half.ring, weights=half.w * h, minlength=half.depth + 1)
            out.append(classify(masses, half.depth))
        (v1, s1), (v2, s2) = out
        if DIVERGENT in (s1, s2):
            return np.inf, DIVERGENT
        if INCONCLUSIVE in (s1, s2):
            return v1 + v2, INCONCLUSIVE
        return v1 + v2, CONVERGED

    def integrate_strict(self, h_lower, h_upper, what: str = "integral") -> float:
        value, status = self.integrate(h_lower, h_upper)
        if status == INCONCLUSIVE:
            raise QuadratureInconclusive(f"{what}: quadrature neither converged nor diverged")
        return float(value)

    def modular(self, phi, scale: float, strict: bool = True):
        """``E[phi(|X| * scale)]``."""
        with np.errstate(over="ignore", invalid="ignore"):
            hl = phi.func(self.abs_lower * scale)
            hu = phi.func(self.abs_upper * scale)
        if strict:
            return self.integrate_strict(hl, hu, "gauge expectation")
        return self.integrate(hl, hu)

    def modular_slope(self, phi, scale: float):
        """``E[|X| phi'(|X| scale)]``, the derivative of the modular in ``scale``."""
        with np.errstate(over="ignore", invalid="ignore"):
            hl = self.abs_lower * phi.deriv(self.abs_lower * scale)
            hu = self.abs_upper * phi.deriv(self.abs_upper * scale)
        return self.integrate(hl, hu)
