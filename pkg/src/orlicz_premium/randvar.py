"""Laws of random variables: finite discrete laws and quantile-function laws.

A :class:`QuantileRV` represents ``X = Q(U)`` with ``U`` uniform on (0, 1).
Its quantile is stored as two callables, one per half of the unit interval,
each taking the distance to the nearest endpoint. This keeps heavy upper tails
(``u -> 1``) resolvable down to ``1 - u ~ 1e-120``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

from ._quadrature import CONVERGED, DIVERGENT, INCONCLUSIVE, Grid
from .errors import QuadratureInconclusive

__all__ = [
    "DiscreteRV",
    "QuantileRV",
    "SpaceMembership",
    "CSVFormatError",
    "gauge_expectation",
    "membership",
    "transform",
    "expectation",
    "same_law",
    "coarsen",
    "cdf_distance",
    "read_csv",
    "log_singular",
    "power_tail",
    "bounded_uniform",
    "shrinking_log",
    "quantile_family",
    "QUANTILE_FAMILIES",
]

PROB_TOL = 1e-12
CROSS_T_MIN = 2.0 ** -1070


class DiscreteRV:
    """Finite law with sorted, merged atoms.

    ``probs`` may be omitted for equally weighted samples.
    """

    __slots__ = ("values", "probs")

    def __init__(self, values, probs=None):
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("a discrete law needs at least one atom")
        if not np.all(np.isfinite(v)):
            raise ValueError("atom values must be finite")
        if probs is None:
            p = np.full(v.size, 1.0 / v.size)
        else:
            p = np.asarray(probs, dtype=float).ravel()
            if p.shape != v.shape:
                raise ValueError("values and probs must have the same length")
            if not np.all(p > 0) or not np.all(np.isfinite(p)):
                raise ValueError("atom probabilities must be positive")
            total = p.sum()
            if abs(total - 1.0) > PROB_TOL:
                raise ValueError(f"atom probabilities sum to {total!r}, not 1")
            p = p / total
        uniq, inv = np.unique(v, return_inverse=True)
        merged = np.bincount(inv, weights=p, minlength=uniq.size)
        uniq.setflags(write=False)
        merged.setflags(write=False)
        object.__setattr__(self, "values", uniq)
        object.__setattr__(self, "probs", merged)

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteRV is immutable")

    @classmethod
    def constant(cls, c: float) -> "DiscreteRV":
        return cls([c], [1.0])

    @classmethod
    def indicator(cls, prob: float, value: float = 1.0) -> "DiscreteRV":
        """``value * 1_A`` with ``P(A) = prob``."""
        if prob >= 1.0:
            return cls.constant(value)
        return cls([0.0, value], [1.0 - prob, prob])

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.probs.tolist()))

    @property
    def size(self) -> int:
        return self.values.size

    def cdf(self, x):
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    def shift(self, c: float) -> "DiscreteRV":
        return DiscreteRV(self.values + c, self.probs)

    def scale(self, t: float) -> "DiscreteRV":
        if t < 0:
            raise ValueError("scale factor must be nonnegative")
        return DiscreteRV(self.values * t, self.probs)

    def positive_part(self, m: float = 0.0) -> "DiscreteRV":
        return DiscreteRV(np.maximum(self.values - m, 0.0), self.probs)

    def truncate(self, a: float) -> "DiscreteRV":
        return DiscreteRV(np.minimum(self.values, a), self.probs)

    def abs(self) -> "DiscreteRV":
        return DiscreteRV(np.abs(self.values), self.probs)

    def __repr__(self):
        body = ", ".join(f"({v:.6g}, {p:.6g})" for v, p in self.atoms[:6])
        more = ", ..." if self.size > 6 else ""
        return f"DiscreteRV([{body}{more}])"


def _const(value: float):
    return lambda t: np.full(np.shape(t), value, dtype=float)


@dataclass(frozen=True, eq=False)
class QuantileRV:
    """Law of ``Q(U)``.

    ``lower(u) = Q(u)`` and ``upper(s) = Q(1 - s)`` for ``u, s`` in (0, 1/2].
    ``breaks_*`` list jump or kink locations in the same coordinates, and
    ``singular`` flags whether ``|Q|`` may be unbounded at the lower/upper end.
    ``monotone`` is False only for derived variables such as ``|X|`` of a
    sign-changing ``X``; quantile-based functionals reject those.
    """

    lower: Callable[[np.ndarray], np.ndarray]
    upper: Callable[[np.ndarray], np.ndarray]
    breaks_lower: tuple = ()
    breaks_upper: tuple = ()
    singular: tuple = (True, True)
    monotone: bool = True
    name: str = "quantile"

    @classmethod
    def from_quantile(cls, q: Callable[[np.ndarray], np.ndarray], name: str = "quantile",
                      singular=(True, True)) -> "QuantileRV":
        return cls(lower=q, upper=lambda s: q(1.0 - s), singular=tuple(singular), name=name)

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        with np.errstate(all="ignore"):
            lo = np.asarray(self.lower(np.minimum(p_arr, 0.5)), dtype=float)
            hi = np.asarray(self.upper(np.minimum(1.0 - p_arr, 0.5)), dtype=float)
        out = np.where(p_arr <= 0.5, lo, hi)
        return float(out) if np.ndim(p) == 0 else out

    @cached_property
    def grid(self) -> Grid:
        return Grid(self.lower, self.upper, self.breaks_lower, self.breaks_upper, self.singular)

    def check_monotone(self, points: int = 257) -> bool:
        u = np.linspace(0.0, 1.0, points + 2)[1:-1]
        q = self.quantile(u)
        return bool(np.all(np.diff(q) >= -1e-12 * np.maximum(1.0, np.abs(q[1:]))))

    # ---- transforms

    def _map(self, op: Callable[[np.ndarray], np.ndarray], **changes) -> "QuantileRV":
        lower, upper = self.lower, self.upper
        return replace(self, lower=lambda t: op(lower(t)), upper=lambda t: op(upper(t)),
                       **changes)

    def _with_break(self, level: float) -> dict:
        if not self.monotone:
            return {}
        half, t = _crossing(self, level)
        if half == "lower":
            return {"breaks_lower": tuple(sorted(set(self.breaks_lower) | {t}))}
        if half == "upper":
            return {"breaks_upper": tuple(sorted(set(self.breaks_upper) | {t}))}
        return {}

    def shift(self, c: float) -> "QuantileRV":
        return self._map(lambda x: x + c, name=f"{self.name}{c:+g}")

    def scale(self, t: float) -> "QuantileRV":
        if t < 0:
            raise ValueError("scale factor must be nonnegative")
        if t == 0:
            return replace(self, lower=_const(0.0), upper=_const(0.0), breaks_lower=(),
                           breaks_upper=(), singular=(False, False), monotone=True,
                           name="0")
        return self._map(lambda x: x * t, name=f"{t:g}*{self.name}")

    def positive_part(self, m: float = 0.0) -> "QuantileRV":
        changes = self._with_break(m)
        changes["singular"] = (False, self.singular[1]) if self.monotone else self.singular
        return self._map(lambda x: np.maximum(x - m, 0.0), name=f"({self.name}-{m:g})+",
                         **changes)

    def truncate(self, a: float) -> "QuantileRV":
        changes = self._with_break(a)
        changes["singular"] = (self.singular[0], False) if self.monotone else self.singular
        return self._map(lambda x: np.minimum(x, a), name=f"min({self.name},{a:g})", **changes)

    def abs(self) -> "QuantileRV":
        q_lo = self.quantile(1e-300 if not self.singular[0] else 1e-12)
        if self.monotone and q_lo >= 0.0:
            return self
        changes = self._with_break(0.0)
        return self._map(np.abs, name=f"|{self.name}|", monotone=False, **changes)


RandomVariable = Union[DiscreteRV, QuantileRV]


def _crossing(rv: QuantileRV, level: float):
    """Locate where a monotone quantile passes ``level``.

    Returns ``(half, t)`` with ``half`` in {"lower", "upper", None}.
    """
    mid = float(rv.lower(np.array([0.5]))[0])
    if mid > level:
        g = lambda t: float(rv.lower(np.array([t]))[0])
        if g(CROSS_T_MIN) > level:
            return None, None
        a, b = math.log(CROSS_T_MIN), math.log(0.5)      # g(e^a) <= level < g(e^b)
        half = "lower"
        below_at_small = True
    else:
        g = lambda t: float(rv.upper(np.array([t]))[0])
        if g(CROSS_T_MIN) <= level:
            return None, None
        a, b = math.log(CROSS_T_MIN), math.log(0.5)      # g(e^a) > level >= g(e^b)
        half = "upper"
        below_at_small = False
    with np.errstate(all="ignore"):
        for _ in range(200):
            c = 0.5 * (a + b)
            if c <= a or c >= b:
                break
            below = g(math.exp(c)) <= level
            if below == below_at_small:
                a = c
            else:
                b = c
    t = math.exp(b) if half == "lower" else math.exp(a)
    if not 0.0 < t < 0.5:
        return None, None
    return half, t


# ---------------------------------------------------------------- families


def log_singular(c: float = 1.0) -> QuantileRV:
    """``c * log(1/(1-u))``: an exponential law with mean ``c``."""
    if c < 0:
        raise ValueError("scale must be nonnegative")
    return QuantileRV(lower=lambda u: -c * np.log1p(-u), upper=lambda s: -c * np.log(s),
                      singular=(False, True), name=f"log-singular(c={c:g})")


def power_tail(beta: float = 0.5, scale: float = 1.0) -> QuantileRV:
    """Pareto-type law with quantile ``scale * (1-u)^(-beta)``."""
    if beta <= 0:
        raise ValueError("tail exponent must be positive")
    return QuantileRV(lower=lambda u: scale * (1.0 - u) ** -beta,
                      upper=lambda s: scale * s ** -beta,
                      singular=(False, True), name=f"power-tail(beta={beta:g})")


def bounded_uniform(lo: float = 0.0, hi: float = 1.0) -> QuantileRV:
    if hi < lo:
        raise ValueError("need lo <= hi")
    width = hi - lo
    return QuantileRV(lower=lambda u: lo + width * u, upper=lambda s: hi - width * s,
                      singular=(False, False), name=f"bounded-uniform(lo={lo:g},hi={hi:g})")


def shrinking_log(eps: float, c: float = 1.0) -> QuantileRV:
    """``c * log(1/U) * 1{U <= eps}``: log-singular mass squeezed onto an event of
    probability ``eps``. Decreases to 0 as ``eps`` goes to 0."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")

    def upper(s):
        s = np.asarray(s, dtype=float)
        return np.where(s < eps, -c * np.log(s), 0.0)

    def lower(u):
        u = np.asarray(u, dtype=float)
        return np.where(u > 1.0 - eps, -c * np.log1p(-u), 0.0)

    if eps < 0.5:
        breaks = {"breaks_upper": (eps,)}
    elif eps > 0.5 and eps < 1.0:
        breaks = {"breaks_lower": (1.0 - eps,)}
    else:
        breaks = {}
    return QuantileRV(lower=lower, upper=upper, singular=(False, True),
                      name=f"shrinking-log(eps={eps:g})", **breaks)


QUANTILE_FAMILIES = {
    "log-singular": log_singular,
    "power-tail": power_tail,
    "bounded-uniform": bounded_uniform,
    "shrinking-log": shrinking_log,
}


def quantile_family(spec: str) -> QuantileRV:
    """Parse ``name[:key=value,...]``, e.g. ``power-tail:beta=0.3``."""
    name, _, rest = spec.partition(":")
    name = name.strip()
    if name not in QUANTILE_FAMILIES:
        raise ValueError(f"unknown quantile family {name!r}; "
                         f"choose from {sorted(QUANTILE_FAMILIES)}")
    kwargs = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"bad family parameter {item!r}; expected key=value")
        try:
            kwargs[key.strip()] = float(val)
        except ValueError:
            raise ValueError(f"family parameter {key!r} is not a number: {val!r}") from None
    try:
        return QUANTILE_FAMILIES[name](**kwargs)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name!r}: {exc}") from None


# ---------------------------------------------------------------- operations


@dataclass(frozen=True)
class SpaceMembership:
    in_L_Phi: bool
    in_H_Phi: bool
    in_Young: bool
    inconclusive: bool = False

    def to_dict(self) -> dict:
        return {"in_L_Phi": self.in_L_Phi, "in_H_Phi": self.in_H_Phi,
                "in_Young": self.in_Young, "inconclusive": self.inconclusive}


def gauge_expectation(X: RandomVariable, f, lam: float) -> float:
    """``E[f(|X| / lam)]``; ``inf`` when divergent.

    Raises :class:`QuadratureInconclusive` if a quantile integral cannot be
    classified.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if isinstance(X, DiscreteRV):
        with np.errstate(over="ignore"):
            return float(np.dot(X.probs, f.func(np.abs(X.values) / lam)))
    return X.grid.modular(f, 1.0 / lam)


def _status_at(X: QuantileRV, f, lam: float) -> str:
    return X.grid.modular(f, 1.0 / lam, strict=False)[1]


def membership(X: RandomVariable, f, up_to: int = 40, down_to: int = 20) -> SpaceMembership:
    """Classify ``X`` in ``L^f``, its heart ``H^f`` and the Young class.

    The scale scan doubles from 1 to ``2**up_to`` (Orlicz space) and halves to
    ``2**-down_to`` (heart). Finite laws are bounded and belong to all three.
    """
    if isinstance(X, DiscreteRV):
        return SpaceMembership(True, True, True)
    unsure = False
    at_one = _status_at(X, f, 1.0)
    young = at_one == CONVERGED
    unsure |= at_one == INCONCLUSIVE
    in_l = young
    if not in_l:
        for k in range(1, up_to + 1):
            st = _status_at(X, f, 2.0 ** k)
            if st == CONVERGED:
                in_l = True
                break
            unsure |= st == INCONCLUSIVE
    in_h = young
    if in_h:
        for k in range(1, down_to + 1):
            st = _status_at(X, f, 2.0 ** -k)
            if st != CONVERGED:
                in_h = False
                unsure |= st == INCONCLUSIVE
                break
    if in_l and not young and unsure:
        unsure = False      # finiteness at some larger scale is a certificate
    return SpaceMembership(in_l, in_h, young, unsure)


def transform(X: RandomVariable, op: str, arg: float | None = None) -> RandomVariable:
    """Apply ``shift``, ``scale``, ``positive_part`` (``(X - m)^+``), ``truncate``
    (``min(X, a)``) or ``abs``."""
    if op == "abs":
        return X.abs()
    if arg is None:
        raise ValueError(f"transform {op!r} needs an argument")
    if op == "shift":
        return X.shift(arg)
    if op == "scale":
        return X.scale(arg)
    if op == "positive_part":
        return X.positive_part(arg)
    if op == "truncate":
        return X.truncate(arg)
    raise ValueError(f"unknown transform {op!r}")


def _signed_integral(X: QuantileRV, mask_lower=None, mask_upper=None) -> float:
    grid = X.grid
    gl, gu = grid.g_lower, grid.g_upper
    if mask_lower is not None:
        gl = np.where(mask_lower, gl, 0.0)
        gu = np.where(mask_upper, gu, 0.0)
    pos, st_pos = grid.integrate(np.maximum(gl, 0.0), np.maximum(gu, 0.0))
    neg, st_neg = grid.integrate(np.maximum(-gl, 0.0), np.maximum(-gu, 0.0))
    if INCONCLUSIVE in (st_pos, st_neg):
        raise QuadratureInconclusive("expectation: quadrature neither converged nor diverged")
    if st_pos == DIVERGENT and st_neg == DIVERGENT:
        raise ValueError("variable is not integrable: both tails diverge")
    if st_pos == DIVERGENT:
        return math.inf
    if st_neg == DIVERGENT:
        return -math.inf
    return float(pos - neg)


def expectation(X: RandomVariable) -> float:
    """``E[X]``; a divergent tail is reported as a signed infinity."""
    if isinstance(X, DiscreteRV):
        return float(np.dot(X.probs, X.values))
    return _signed_integral(X)


def same_law(X: DiscreteRV, Y: DiscreteRV, tol: float = 1e-12) -> bool:
    if not isinstance(X, DiscreteRV) or not isinstance(Y, DiscreteRV):
        raise TypeError("same_law compares discrete laws only")
    pts = np.union1d(X.values, Y.values)
    return bool(np.max(np.abs(X.cdf(pts) - Y.cdf(pts))) <= tol)


def cdf_distance(X: DiscreteRV, Y: DiscreteRV, grid=None) -> float:
    """Sup distance between CDFs on the union of atoms plus an optional grid."""
    pts = np.union1d(X.values, Y.values)
    if grid is not None:
        pts = np.union1d(pts, np.asarray(grid, dtype=float))
    return float(np.max(np.abs(X.cdf(pts) - Y.cdf(pts))))


def coarsen(X: DiscreteRV, partition: Sequence[Sequence[int]]) -> DiscreteRV:
    """Average ``X`` over blocks of atom indices (conditional expectation onto the
    sigma-algebra generated by the partition)."""
    seen: set[int] = set()
    values, probs = [], []
    for block in partition:
        idx = list(block)
        if not idx:
            raise ValueError("empty partition block")
        if any(i < 0 or i >= X.size for i in idx):
            raise ValueError("partition refers to a nonexistent atom")
        if seen.intersection(idx) or len(set(idx)) != len(idx):
            raise ValueError("partition blocks must be disjoint")
        seen.update(idx)
        p = X.probs[idx]
        mass = float(p.sum())
        values.append(float(np.dot(p, X.values[idx]) / mass))
        probs.append(mass)
    if len(seen) != X.size:
        raise ValueError("partition does not cover all atoms")
    return DiscreteRV(values, np.asarray(probs) / math.fsum(probs))


class CSVFormatError(ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


def read_csv(path) -> DiscreteRV:
    """Read ``value`` rows (equal weights) or ``value,prob`` rows; header optional."""
    values: list[float] = []
    probs: list[float] = []
    width = None
    with open(path, newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(c == "" for c in cells):
                continue
            try:
                nums = [float(c) for c in cells]
            except ValueError:
                if row_no == 1 and not values:
                    continue      # header
                raise CSVFormatError(row_no, f"non-numeric cell in {row!r}") from None
            if len(nums) not in (1, 2):
                raise CSVFormatError(row_no, f"expected 1 or 2 columns, got {len(nums)}")
            if width is None:
                width = len(nums)
            elif len(nums) != width:
                raise CSVFormatError(row_no, "inconsistent column count")
            if not all(math.isfinite(v) for v in nums):
                raise CSVFormatError(row_no, "non-finite value")
            if width == 2 and nums[1] <= 0:
                raise CSVFormatError(row_no, "probabilities must be positive")
            values.append(nums[0])
            if width == 2:
                probs.append(nums[1])
    if not values:
        raise CSVFormatError(0, "no data rows")
    if width == 2:
        total = math.fsum(probs)
        if abs(total - 1.0) > 1e-9:
            raise CSVFormatError(len(values), f"probabilities sum to {total!r}, not 1")
        return DiscreteRV(values, np.asarray(probs) / total)
    return DiscreteRV(values)
