"""Orlicz functions and their calculus.

Every catalog entry is a finite-valued, convex, nondecreasing gauge with
``phi(0) = 0`` and ``phi(1) = 1``. Conjugates ``psi(y) = sup_x {x*y - phi(x)}``
are extended-real valued: they are ``+inf`` beyond the asymptotic slope of
``phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.special import lambertw

from ._optim import golden_section

__all__ = [
    "OrliczFunction",
    "ScaledOrlicz",
    "Delta2Diagnostic",
    "catalog",
    "get_orlicz",
    "identity",
    "power",
    "exponential",
    "square_exponential",
    "kinked_linear",
    "piecewise_linear",
    "conjugate",
    "conjugate_scaled",
    "legendre_numeric",
    "generalized_inverse",
    "check_delta2",
]

E1 = math.expm1(1.0)  # e - 1, chosen so exponential entries hit phi(1) == 1 exactly
LEGENDRE_RADIUS = 1e8


def _as_array(x):
    return np.asarray(x, dtype=float)


def _out(x, arr):
    return float(arr) if np.ndim(x) == 0 else arr


@dataclass(frozen=True, eq=False)
class OrliczFunction:
    """A catalog Orlicz function.

    ``func`` and ``deriv`` act on nonnegative numpy arrays; ``deriv`` is the
    right derivative. ``conj`` is the closed-form conjugate when known.
    ``slope`` is ``lim phi(x)/x`` (``inf`` for superlinear growth); the
    conjugate is finite exactly on ``[0, slope]``.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    delta2: bool
    slope: float
    params: Mapping[str, float] = field(default_factory=dict)
    conj: Optional[Callable[[np.ndarray], np.ndarray]] = None
    inv: Optional[Callable[[float], float]] = None
    finite_valued: bool = True

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        args = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.name}({args})"

    def __call__(self, x):
        with np.errstate(over="ignore", invalid="ignore"):
            return _out(x, self.func(_as_array(x)))

    def derivative(self, x):
        with np.errstate(over="ignore", invalid="ignore"):
            return _out(x, self.deriv(_as_array(x)))

    def conjugate(self, y):
        """Conjugate value(s); closed form if available, numeric otherwise."""
        y_arr = _as_array(y)
        if self.conj is not None:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                return _out(y, self.conj(y_arr))
        vals = np.array([legendre_numeric(self, float(v)) for v in y_arr.ravel()])
        return _out(y, vals.reshape(y_arr.shape))

    def inverse_at(self, y: float) -> float:
        """``sup{x >= 0 : phi(x) <= y}``; closed form when the catalog has one."""
        if self.inv is not None:
            return float(self.inv(y))
        return generalized_inverse(self, y)

    def scaled(self, alpha: float) -> "ScaledOrlicz":
        return ScaledOrlicz(self, alpha)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "delta2": self.delta2,
                "finite_valued": self.finite_valued, "asymptotic_slope": self.slope}


@dataclass(frozen=True, eq=False)
class ScaledOrlicz:
    """``phi / (1 - alpha)``, the gauge behind the premium's inner norm."""

    base: OrliczFunction
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def weight(self) -> float:
        return 1.0 - self.alpha

    @property
    def name(self) -> str:
        return f"{self.base.name}/(1-alpha)"

    @property
    def label(self) -> str:
        return f"{self.base.label}/(1-{self.alpha:g})"

    @property
    def delta2(self) -> bool:
        return self.base.delta2

    @property
    def finite_valued(self) -> bool:
        return self.base.finite_valued

    @property
    def slope(self) -> float:
        return self.base.slope / self.weight

    def func(self, x):
        return self.base.func(x) / self.weight

    def deriv(self, x):
        return self.base.deriv(x) / self.weight

    def __call__(self, x):
        return self.base(x) / self.weight

    def derivative(self, x):
        return self.base.derivative(x) / self.weight

    def conjugate(self, y):
        w = self.weight
        return self.base.conjugate(w * _as_array(y) if np.ndim(y) else w * y) / w

    def inverse_at(self, y: float) -> float:
        return self.base.inverse_at(self.weight * y)

    def scaled(self, alpha: float):
        raise TypeError("ScaledOrlicz cannot be rescaled again")


# ---------------------------------------------------------------- catalog


def identity() -> OrliczFunction:
    return OrliczFunction(
        name="identity",
        func=lambda x: x.copy(),
        deriv=lambda x: np.ones_like(x),
        conj=lambda y: np.where(y <= 1.0, 0.0, np.inf),
        inv=lambda y: y,
        delta2=True,
        slope=1.0,
    )


def power(p: float = 2.0) -> OrliczFunction:
    if not p > 1.0:
        raise ValueError(f"power entry needs p > 1, got {p}")
    q = p / (p - 1.0)
    return OrliczFunction(
        name="power",
        params={"p": float(p)},
        func=lambda x: x ** p,
        deriv=lambda x: p * x ** (p - 1.0),
        conj=lambda y: (p - 1.0) * (y / p) ** q,
        inv=lambda y: y ** (1.0 / p),
        delta2=True,
        slope=math.inf,
    )


def _exp_conj(y):
    t = 1.0 / E1
    safe = np.where(y > t, y, 2.0 * t)
    val = safe * np.log(safe * E1) - safe + t
    return np.where(y > t, val, 0.0)


def exponential() -> OrliczFunction:
    return OrliczFunction(
        name="exponential",
        func=lambda x: np.expm1(x) / E1,
        deriv=lambda x: np.exp(x) / E1,
        conj=_exp_conj,
        inv=lambda y: math.log1p(y * E1),
        delta2=False,
        slope=math.inf,
    )


def _sqexp_func(x):
    return np.expm1(x * x) / E1


def _sqexp_conj(y):
    w = lambertw((y * E1) ** 2 / 2.0).real
    x = np.sqrt(np.maximum(w, 0.0) / 2.0)
    return np.maximum(y * x - _sqexp_func(x), 0.0)


def square_exponential() -> OrliczFunction:
    return OrliczFunction(
        name="square-exponential",
        func=_sqexp_func,
        deriv=lambda x: 2.0 * x * np.exp(x * x) / E1,
        conj=_sqexp_conj,
        inv=lambda y: math.sqrt(math.log1p(y * E1)),
        delta2=False,
        slope=math.inf,
    )


def kinked_linear(a: float = 0.5) -> OrliczFunction:
    if not 0.0 <= a < 1.0:
        raise ValueError(f"kink must lie in [0, 1), got {a}")
    top = 1.0 / (1.0 - a)
    return OrliczFunction(
        name="kinked",
        params={"a": float(a)},
        func=lambda x: np.maximum(x - a, 0.0) / (1.0 - a),
        deriv=lambda x: np.where(x >= a, top, 0.0),
        conj=lambda y: np.where(y <= top, a * y, np.inf),
        inv=lambda y: a + y * (1.0 - a),
        delta2=True,
        slope=top,
    )


def piecewise_linear(knots, values, name: str = "piecewise-linear") -> OrliczFunction:
    """Convex piecewise-linear gauge through ``(knots, values)``.

    ``knots`` must start at 0 with value 0; the last slope is extended to
    infinity. The normalization ``phi(1) = 1`` is enforced.
    """
    xs = np.asarray(knots, dtype=float)
    vs = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 2:
        raise ValueError("knots and values must be 1-d arrays of equal length >= 2")
    if xs[0] != 0.0 or vs[0] != 0.0:
        raise ValueError("piecewise-linear gauge must start at (0, 0)")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("knots must be strictly increasing")
    slopes = np.diff(vs) / np.diff(xs)
    if np.any(slopes < 0) or np.any(np.diff(slopes) < -1e-12):
        raise ValueError("piecewise-linear gauge must be nondecreasing and convex")
    if slopes[-1] <= 0:
        raise ValueError("piecewise-linear gauge must be nonconstant")

    def func(x):
        inside = np.interp(x, xs, vs)
        return np.where(x > xs[-1], vs[-1] + slopes[-1] * (x - xs[-1]), inside)

    def deriv(x):
        idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, slopes.size - 1)
        return slopes[idx]

    def conj(y):
        y = np.asarray(y, dtype=float)
        best = np.max(np.multiply.outer(y, xs) - vs, axis=-1)
        return np.where(y <= slopes[-1], np.maximum(best, 0.0), np.inf)

    out = OrliczFunction(name=name, func=func, deriv=deriv, conj=conj, delta2=True,
                         slope=float(slopes[-1]),
                         params={f"x{i}": float(v) for i, v in enumerate(xs[1:], 1)})
    if abs(out(1.0) - 1.0) > 1e-12:
        raise ValueError(f"gauge must satisfy phi(1) = 1, got {out(1.0)!r}")
    return out


_BUILDERS = {
    "identity": identity,
    "power": power,
    "exponential": exponential,
    "square-exponential": square_exponential,
    "kinked": kinked_linear,
}


def get_orlicz(name: str, **params) -> OrliczFunction:
    """Look up a catalog entry by name, e.g. ``get_orlicz("power", p=2)``."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown Orlicz function {name!r}; "
                         f"choose from {sorted(_BUILDERS)}") from None
    params = {k: v for k, v in params.items() if v is not None}
    return builder(**params)


def catalog() -> list[OrliczFunction]:
    """Default catalog used by tests, experiments and the CLI listing."""
    return [identity(), power(2.0), exponential(), square_exponential(), kinked_linear(0.5)]


# ---------------------------------------------------------------- calculus


def legendre_numeric(f, y: float, radius: float = LEGENDRE_RADIUS) -> float:
    """Numeric conjugate ``sup_{x>=0} {x*y - f(x)}`` by golden-section search.

    The bracket doubles from 1 while the objective keeps increasing; if it is
    still increasing at ``radius`` the supremum is declared ``+inf``.
    """
    if y < 0:
        raise ValueError("conjugate is only defined on [0, inf)")
    if y == 0:
        return 0.0

    def neg(x: float) -> float:
        v = x * y - f(x)
        return -v if math.isfinite(v) else math.inf

    hi = 1.0
    while neg(2.0 * hi) < neg(hi):
        hi *= 2.0
        if hi > radius:
            return math.inf
    x, fx, _ = golden_section(neg, 0.0, 2.0 * hi, tol=1e-13 * max(1.0, hi))
    return max(-fx, 0.0)


def conjugate(f, y: float) -> float:
    """``psi(y)`` for a catalog or scaled gauge; ``+inf`` outside its domain."""
    if y < 0:
        raise ValueError("conjugate is only defined on [0, inf)")
    return float(f.conjugate(float(y)))


def conjugate_scaled(f: OrliczFunction, alpha: float, y: float) -> float:
    """Conjugate of ``f / (1 - alpha)`` via ``psi((1-alpha) y) / (1-alpha)``."""
    return conjugate(ScaledOrlicz(f, alpha), y)


def generalized_inverse(f, y: float, max_iter: int = 2000) -> float:
    """``sup{x >= 0 : f(x) <= y}`` by bisection on a doubling bracket."""
    if y < 0:
        raise ValueError("generalized inverse is only defined on [0, inf)")
    lo, hi = 0.0, 1.0
    while f(hi) <= y:
        lo = hi
        hi *= 2.0
        if hi > 1e300:
            return math.inf
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) <= y:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class Delta2Diagnostic:
    ratio_max: float
    ratio_top: float
    declared: bool
    consistent: bool

    def to_dict(self) -> dict:
        return {"ratio_max": self.ratio_max, "ratio_top": self.ratio_top,
                "declared_delta2": self.declared, "consistent": self.consistent}


def check_delta2(f, x_lo: float = 1.0, x_hi: float = 100.0, samples: int = 200,
                 threshold: float = 1e6) -> Delta2Diagnostic:
    """Scan ``f(2x)/f(x)`` on a geometric grid and compare with the declared flag.

    Declared Delta2 entries are consistent when the scanned ratio stays below
    ``threshold``; declared non-Delta2 entries when the ratio at the top of the
    scan exceeds it. This is a diagnostic only; Delta2 is asymptotic.
    """
    if not 0 < x_lo < x_hi:
        raise ValueError("need 0 < x_lo < x_hi")
    xs = np.geomspace(x_lo, x_hi, samples)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        num = np.asarray(f(2.0 * xs), dtype=float)
        den = np.asarray(f(xs), dtype=float)
        ok = (den > 0) & np.isfinite(den)
        if not ok.any():
            raise ValueError("degenerate scan: f vanishes (or overflows) on the whole range; "
                             "x_lo is probably below a kink")
        ratio = np.where(ok, num / np.where(ok, den, 1.0), np.nan)
    valid = ratio[ok]
    ratio_max = float(np.max(valid))
    ratio_top = float(valid[-1])
    if f.delta2:
        consistent = ratio_max < threshold
    else:
        consistent = ratio_top >= threshold
    return Delta2Diagnostic(ratio_max, ratio_top, bool(f.delta2), bool(consistent))
