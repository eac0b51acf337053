"""Named stability experiments for the premium.

Each experiment evaluates the premium along an explicit sequence of laws and
records pass/fail verdicts for the corresponding continuity statement:
continuity from below and the Fatou property, failure of the Lebesgue
property for a non-Delta2 gauge, lower semicontinuity under Phi-weak
convergence (and the failure of continuity there), and the failure of
continuity under plain convergence in distribution.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._quadrature import DIVERGENT, INCONCLUSIVE
from .norms import n_alpha
from .orlicz import ScaledOrlicz, identity
from .premium import premium
from .randvar import (DiscreteRV, QuantileRV, cdf_distance, expectation, gauge_expectation,
                      log_singular, membership, shrinking_log)

__all__ = [
    "SequenceSpec",
    "ExperimentReport",
    "MODES",
    "fatou_specs",
    "phi_weak_specs",
    "check_mode",
    "run_fatou",
    "run_lebesgue_failure",
    "run_phi_weak",
    "run_phi_weak_failure",
    "run_dist_counterexample",
    "EXPERIMENTS",
]

MODES = ("monotone-up", "monotone-down", "dominated-a.s.", "phi-dist", "dist-only")
CSV_COLUMNS = ("n", "premium", "n_alpha", "mean", "modular")
MODE_GRID = np.linspace(0.0, 1.0, 203)[1:-1]


@dataclass(frozen=True, eq=False)
class SequenceSpec:
    name: str
    generator: Callable[[int], object]
    limit: object
    mode: str
    description: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown convergence mode {self.mode!r}; choose from {MODES}")


@dataclass
class ExperimentReport:
    name: str
    phi: str
    alpha: float
    rows: list = field(default_factory=list)
    verdict: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.verdict.values())

    def to_dict(self, include_runtime: bool = True) -> dict:
        out = {"name": self.name, "phi": self.phi, "alpha": self.alpha,
               "rows": self.rows, "verdict": self.verdict,
               "passed": self.passed, "info": self.info}
        if include_runtime:
            out["runtime"] = self.runtime
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in self.rows:
                writer.writerow([_fmt(row.get(c)) for c in CSV_COLUMNS])


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def _quantities(X, f, alpha: float) -> dict:
    """Per-n row: premium, inner norm, mean and Young modular."""
    pr = premium(X, f, alpha)
    return {"premium": pr.value, "n_alpha": n_alpha(X, f, alpha).value,
            "mean": expectation(X), "modular": _modular(X, f)}


def _modular(X, f) -> float:
    if isinstance(X, DiscreteRV):
        return gauge_expectation(X, f, 1.0)
    value, status = X.grid.modular(f, 1.0, strict=False)
    if status == INCONCLUSIVE:
        return math.nan
    return math.inf if status == DIVERGENT else float(value)


def _nondecreasing(values, slack: float) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) >= -slack))


def _nonincreasing(values, slack: float) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) <= slack))


def _tail(n_max: int) -> range:
    return range(max(1, n_max // 2), n_max + 1)


# ---------------------------------------------------------------- specs


def fatou_specs(X: QuantileRV | None = None) -> dict[str, SequenceSpec]:
    """Default Fatou sequences around ``X`` (log-singular unless given)."""
    X = log_singular() if X is None else X
    return {
        "truncation": SequenceSpec("truncation", lambda n: X.truncate(2.0 * n), X,
                                   "monotone-up", "X ^ a_n with a_n = 2n"),
        "constant": SequenceSpec("constant", lambda n: X, X, "monotone-up", "X_n = X"),
        "shift": SequenceSpec("shift", lambda n: X.shift(1.0 / n), X, "dominated-a.s.",
                              "X_n = X + 1/n"),
        "oscillating": SequenceSpec("oscillating", lambda n: X.scale(1.0 + (-0.25) ** n), X,
                                    "dominated-a.s.", "X_n = X (1 + (-1/4)^n)"),
    }


def phi_weak_specs(X: QuantileRV | None = None) -> dict[str, SequenceSpec]:
    """Phi-weak sequences around ``X``; the default base is ``log-singular / 2``,
    which lies in the Young class of the exponential gauge."""
    X = log_singular(0.5) if X is None else X
    return {
        "geometric": SequenceSpec("geometric", lambda n: X.scale(1.0 + 2.0 ** -n), X,
                                  "phi-dist", "X_n = X (1 + 2^-n)"),
        "harmonic": SequenceSpec("harmonic", lambda n: X.scale(1.0 + 1.0 / n), X,
                                 "phi-dist", "X_n = X (1 + 1/n)"),
        "constant": SequenceSpec("constant", lambda n: X, X, "phi-dist", "X_n = X"),
    }


def check_mode(spec: SequenceSpec, n_max: int) -> bool:
    """Spot-check the declared convergence mode on a quantile grid."""
    lim = spec.limit
    if spec.mode in ("phi-dist", "dist-only"):
        return True
    qs = [np.asarray(_quantile_on_grid(spec.generator(n))) for n in range(1, n_max + 1)]
    q_lim = np.asarray(_quantile_on_grid(lim))
    slack = 1e-12
    if spec.mode == "monotone-up":
        return bool(all(np.all(b >= a - slack) for a, b in zip(qs, qs[1:]))
                    and np.all(qs[-1] <= q_lim + slack))
    if spec.mode == "monotone-down":
        return bool(all(np.all(b <= a + slack) for a, b in zip(qs, qs[1:]))
                    and np.all(qs[-1] >= q_lim - slack))
    errs = [float(np.max(np.abs(q - q_lim))) for q in qs]
    return errs[-1] <= errs[len(errs) // 2] + slack


def _quantile_on_grid(X):
    if isinstance(X, DiscreteRV):
        cum = np.cumsum(X.probs)
        idx = np.minimum(np.searchsorted(cum, MODE_GRID - 1e-12), X.size - 1)
        return X.values[idx]
    return X.quantile(MODE_GRID)


# ---------------------------------------------------------------- experiments


def run_fatou(spec: SequenceSpec, f, alpha: float, n_max: int = 20) -> ExperimentReport:
    """Premium along ``spec``: nondecreasing and convergent for monotone-up
    sequences, lower semicontinuous (tail minimum proxy) for dominated ones."""
    if spec.mode not in ("monotone-up", "dominated-a.s."):
        raise ValueError(f"run_fatou needs a monotone-up or dominated-a.s. sequence, "
                         f"got {spec.mode!r}")
    start = time.perf_counter()
    report = ExperimentReport(name="fatou", phi=f.label, alpha=float(alpha))
    limit = premium(spec.limit, f, alpha).value
    for n in range(1, n_max + 1):
        row = {"n": n, **_quantities(spec.generator(n), f, alpha)}
        report.rows.append(row)
    values = [r["premium"] for r in report.rows]
    report.verdict["mode_spot_check"] = check_mode(spec, n_max)
    if spec.mode == "monotone-up":
        report.verdict["nondecreasing"] = _nondecreasing(values, 1e-8)
        report.verdict["converges_to_limit"] = abs(values[-1] - limit) <= 1e-4
    else:
        tail_min = min(values[n - 1] for n in _tail(n_max))
        report.verdict["fatou_tail_liminf"] = limit <= tail_min + 1e-4
        report.info["tail_min"] = tail_min
    report.info.update({"sequence": spec.name, "mode": spec.mode,
                        "description": spec.description, "limit_premium": limit,
                        "liminf_proxy": "min over n in [n_max/2, n_max]"})
    report.runtime = time.perf_counter() - start
    return report


def _identity_es_closed_form(eps: float, alpha: float) -> float:
    t = min(eps, 1.0 - alpha)
    return t * (1.0 + math.log(1.0 / t)) / (1.0 - alpha)


def run_lebesgue_failure(f, alpha: float, n_max: int = 20, contrast=None,
                         contrast_bound: float | None = None) -> ExperimentReport:
    """``X_n = log(1/U) 1{U <= 1/n}`` decreases to 0 yet keeps ``N_alpha >= 1``
    under a non-Delta2 gauge, with the premium above ``1 - f^{-1}(1-alpha)``.

    The same sequence under ``contrast`` (identity by default) has premium
    equal to the Expected Shortfall, which decreases to 0. ``contrast_bound``
    optionally asserts the contrast's last value.
    """
    if f.delta2:
        raise ValueError("run_lebesgue_failure needs a non-Delta2 gauge")
    start = time.perf_counter()
    contrast = identity() if contrast is None else contrast
    fa = ScaledOrlicz(f, alpha)
    floor = 1.0 - f.inverse_at(1.0 - alpha)
    report = ExperimentReport(name="lebesgue-failure", phi=f.label, alpha=float(alpha))
    divergent_all, inconclusive_any, norm_ok, floor_ok = True, False, True, True
    contrast_vals, contrast_match = [], True
    for n in range(1, n_max + 1):
        X = shrinking_log(1.0 / n)
        statuses = {}
        for lam in (0.5, 0.9, 1.0):
            statuses[lam] = X.grid.modular(fa, 1.0 / lam, strict=False)[1]
        inconclusive_any |= INCONCLUSIVE in statuses.values()
        div = all(s == DIVERGENT for s in statuses.values())
        divergent_all &= div
        row = {"n": n, **_quantities(X, f, alpha)}
        norm_ok &= row["n_alpha"] >= 1.0
        floor_ok &= row["premium"] >= floor - 1e-3
        c_val = premium(X, contrast, alpha).value
        contrast_vals.append(c_val)
        if contrast.name == "identity":
            contrast_match &= abs(c_val - _identity_es_closed_form(1.0 / n, alpha)) <= 1e-6
        row.update({"divergence_certified": div, "contrast_premium": c_val})
        report.rows.append(row)
    report.verdict.update({
        "quadrature_conclusive": not inconclusive_any,
        "divergence_certified": divergent_all,
        "n_alpha_at_least_one": norm_ok,
        "premium_above_floor": floor_ok,
        "contrast_decreasing": _nonincreasing(contrast_vals, 1e-8),
    })
    if contrast.name == "identity":
        report.verdict["contrast_matches_closed_form"] = contrast_match
    if contrast_bound is not None:
        report.verdict["contrast_below_bound"] = contrast_vals[-1] <= contrast_bound
    report.info.update({"floor": floor, "inverse_at_1_minus_alpha": f.inverse_at(1.0 - alpha),
                        "contrast_phi": contrast.label, "contrast_last": contrast_vals[-1],
                        "contrast_bound": contrast_bound,
                        "lambdas_checked": [0.5, 0.9, 1.0],
                        "sequence": "log(1/U) 1{U <= 1/n}"})
    report.runtime = time.perf_counter() - start
    return report


def run_phi_weak(spec: SequenceSpec, f, alpha: float, n_max: int = 20,
                 modular_tol: float = 1e-3) -> ExperimentReport:
    """Phi-weak convergence of ``spec`` and lower semicontinuity of the premium."""
    if spec.mode != "phi-dist":
        raise ValueError(f"run_phi_weak needs a phi-dist sequence, got {spec.mode!r}")
    start = time.perf_counter()
    if not membership(spec.limit, f).in_Young:
        raise ValueError("Phi-weak convergence is only formulated on the Young class; "
                         "the limit is outside it")
    report = ExperimentReport(name="phi-weak", phi=f.label, alpha=float(alpha))
    limit_pr = premium(spec.limit, f, alpha).value
    limit_mod = _modular(spec.limit, f)
    for n in range(1, n_max + 1):
        X = spec.generator(n)
        if not membership(X, f).in_Young:
            raise ValueError(f"sequence element n={n} is outside the Young class")
        report.rows.append({"n": n, **_quantities(X, f, alpha)})
    values = [r["premium"] for r in report.rows]
    tail_min = min(values[n - 1] for n in _tail(n_max))
    last_mod = report.rows[-1]["modular"]
    report.verdict.update({
        "modular_converges": abs(last_mod - limit_mod) <= modular_tol,
        "lsc_tail_liminf": limit_pr <= tail_min + 1e-4,
    })
    report.info.update({"variant": "lsc", "sequence": spec.name,
                        "description": spec.description, "limit_premium": limit_pr,
                        "limit_modular": limit_mod, "tail_min": tail_min,
                        "liminf_proxy": "min over n in [n_max/2, n_max]"})
    report.runtime = time.perf_counter() - start
    return report


def run_phi_weak_failure(f, alpha: float, n_max: int = 20, delta: float = 0.5,
                         bound: float = 1e-2) -> ExperimentReport:
    """Continuity failure under Phi-weak convergence for a non-Delta2 gauge.

    ``X_n = log(1/U) 1{U <= 2^-n}`` has ``N_alpha(X_n) >= 1``; ``Y_n = X_n ^ a_n``
    with ``a_n`` doubled from 1 until ``N_alpha(Y_n) >= delta``. Then
    ``Y_n -> 0`` in distribution and ``E[f(Y_n)] -> 0`` while the inner norm
    stays above ``delta``. Premia of ``Y_n`` are reported only.
    """
    if f.delta2:
        raise ValueError("the continuity-failure variant needs a non-Delta2 gauge")
    start = time.perf_counter()
    report = ExperimentReport(name="phi-weak", phi=f.label, alpha=float(alpha))
    norms_ok = True
    for n in range(1, n_max + 1):
        eps = 2.0 ** -n
        X = shrinking_log(eps)
        a = 1.0
        Y = X.truncate(a)
        norm = n_alpha(Y, f, alpha).value
        while norm < delta:
            a *= 2.0
            if a > 2.0 ** 12:
                raise RuntimeError(f"no truncation level found for n={n}")
            Y = X.truncate(a)
            norm = n_alpha(Y, f, alpha).value
        if not membership(Y, f).in_Young:
            raise ValueError(f"Y_{n} is outside the Young class")
        norms_ok &= norm >= delta
        row = {"n": n, "premium": premium(Y, f, alpha).value, "n_alpha": norm,
               "mean": expectation(Y), "modular": _modular(Y, f), "a_n": a,
               "cdf_distance": eps}
        report.rows.append(row)
    mods = [r["modular"] for r in report.rows]
    report.verdict.update({
        "n_alpha_at_least_delta": norms_ok,
        "modular_small_at_n_max": mods[-1] <= bound,
        "cdf_distance_small_at_n_max": report.rows[-1]["cdf_distance"] <= bound,
    })
    report.info.update({"variant": "continuity-failure", "delta": delta, "bound": bound,
                        "sequence": "min(log(1/U) 1{U <= 2^-n}, a_n)",
                        "cdf_distance": "P(Y_n != 0) = 2^-n, exact"})
    report.runtime = time.perf_counter() - start
    return report


def run_dist_counterexample(f, alpha: float, n_max: int = 100,
                            cdf_tol: float = 1e-2) -> ExperimentReport:
    """``X_n = n 1_{A_n}`` with ``P(A_n) = 1/n`` tends to 0 in distribution
    while its mean stays 1, so every premium stays at least 1."""
    start = time.perf_counter()
    report = ExperimentReport(name="dist-counterexample", phi=f.label, alpha=float(alpha))
    zero = DiscreteRV.constant(0.0)
    grid = np.linspace(-1.0, float(n_max) + 1.0, 1001)
    mean_ok, floor_ok = True, True
    dists = []
    for n in range(1, n_max + 1):
        X = DiscreteRV.indicator(1.0 / n, float(n))
        mean = expectation(X)
        pr = premium(X, f, alpha).value
        dist = cdf_distance(X, zero, grid)
        dists.append(dist)
        mean_ok &= abs(mean - 1.0) <= 1e-12
        floor_ok &= pr >= 1.0 - 1e-9
        report.rows.append({"n": n, "premium": pr, "n_alpha": n_alpha(X, f, alpha).value,
                            "mean": mean, "modular": gauge_expectation(X, f, 1.0),
                            "cdf_distance": dist})
    report.verdict.update({
        "mean_is_one": mean_ok,
        "premium_at_least_one": floor_ok,
        "cdf_distance_nonincreasing": _nonincreasing(dists, 1e-12),
        "cdf_distance_small_at_n_max": dists[-1] <= cdf_tol + 1e-12,
    })
    report.info.update({"sequence": "n 1_{A_n}, P(A_n) = 1/n", "cdf_tol": cdf_tol})
    report.runtime = time.perf_counter() - start
    return report


EXPERIMENTS = {
    "fatou": run_fatou,
    "lebesgue-failure": run_lebesgue_failure,
    "phi-weak": run_phi_weak,
    "dist-counterexample": run_dist_counterexample,
}
