"""Command-line front end.

Exit codes: 0 success or all assertions passed, 1 an assertion failed,
2 input or configuration error, 3 the variable is rejected by the domain
(outside the Orlicz space, or membership could not be decided).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .duality import MAX_ATOMS_DUAL, primal_dual_report
from .errors import MembershipInconclusive, NotInOrliczSpace, QuadratureInconclusive
from .norms import BISECTION_REL, luxemburg_norm
from .orlicz import ScaledOrlicz, catalog, check_delta2, get_orlicz
from .premium import MINIMIZER_ABS, expected_shortfall, premium, var
from .randvar import CSVFormatError, DiscreteRV, quantile_family, read_csv
from .stability import (EXPERIMENTS, fatou_specs, phi_weak_specs, run_dist_counterexample,
                        run_fatou, run_lebesgue_failure, run_phi_weak, run_phi_weak_failure)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3
SIG_DIGITS = 12
PHI_NAMES = ("identity", "power", "exponential", "square-exponential", "kinked")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    phi: str = "identity"
    p: float | None = None
    a: float | None = None
    alpha: float = 0.5
    input: str | None = None
    quantile: str | None = None
    n_max: int | None = None
    seed: int = 0
    out_dir: str = "."
    no_timestamp: bool = False
    alpha_given: bool = False
    tolerances: dict = field(default_factory=lambda: {
        "bisection_rel": BISECTION_REL, "minimizer_abs": MINIMIZER_ABS, "duality_gap": 1e-3})

    def validate(self) -> None:
        if self.phi not in PHI_NAMES:
            raise ConfigError(f"unknown --phi {self.phi!r}; choose from {list(PHI_NAMES)}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"--alpha must lie in (0, 1), got {self.alpha}")
        for key, val in self.tolerances.items():
            if not (isinstance(val, (int, float)) and val > 0):
                raise ConfigError(f"tolerance {key} must be positive, got {val!r}")
        if self.n_max is not None and self.n_max < 1:
            raise ConfigError("--n-max must be at least 1")
        try:
            self.orlicz()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def orlicz(self):
        params = {}
        if self.phi == "power" and self.p is not None:
            params["p"] = self.p
        if self.phi == "kinked" and self.a is not None:
            params["a"] = self.a
        return get_orlicz(self.phi, **params)


_CONFIG_KEYS = ("phi", "p", "a", "alpha", "input", "quantile", "n_max", "seed", "out_dir",
                "no_timestamp")
_TOL_KEYS = ("bisection_rel", "minimizer_abs", "duality_gap")


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge built-in defaults, an optional JSON config file and flags (flags win)."""
    cfg = RunConfig()
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - set(_CONFIG_KEYS) - {"tolerances"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in _CONFIG_KEYS:
            if key in data:
                setattr(cfg, key, data[key])
        cfg.alpha_given = "alpha" in data
        for key, val in data.get("tolerances", {}).items():
            if key not in _TOL_KEYS:
                raise ConfigError(f"unknown tolerance {key!r}")
            cfg.tolerances[key] = val
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            setattr(cfg, key, val)
    cfg.alpha_given = cfg.alpha_given or args.alpha is not None
    for key in _TOL_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg.tolerances[key] = val
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- output


def _clean(obj):
    """Round floats to 12 significant digits; infinities become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        v = float(f"{v:.{SIG_DIGITS}g}")
        return 0.0 if v == 0.0 else v
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True)


def _stamp(payload: dict, cfg: RunConfig) -> dict:
    if not cfg.no_timestamp:
        payload["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return payload


def _emit(payload: dict, cfg: RunConfig) -> None:
    sys.stdout.write(dumps(_stamp(payload, cfg)) + "\n")


# ---------------------------------------------------------------- inputs


def load_variable(cfg: RunConfig):
    if cfg.input and cfg.quantile:
        raise ConfigError("give either --input or --quantile, not both")
    if cfg.input:
        try:
            return read_csv(cfg.input)
        except CSVFormatError as exc:
            raise ConfigError(f"{cfg.input}: {exc}") from None
        except OSError as exc:
            raise ConfigError(f"cannot read {cfg.input}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{cfg.input}: {exc}") from None
    if cfg.quantile:
        try:
            return quantile_family(cfg.quantile)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    raise ConfigError("no input: give --input FILE.csv or --quantile FAMILY[:k=v,...]")


def _source(cfg: RunConfig) -> dict:
    return {"input": cfg.input} if cfg.input else {"quantile": cfg.quantile}


# ---------------------------------------------------------------- commands


def cmd_catalog(cfg: RunConfig) -> int:
    entries = []
    for f in catalog():
        diag = check_delta2(f)
        entry = f.to_dict()
        entry["label"] = f.label
        entry["delta2_scan"] = diag.to_dict()
        entry["inverse_at_1_minus_alpha"] = f.inverse_at(1.0 - cfg.alpha)
        entries.append(entry)
    _emit({"command": "catalog", "alpha": cfg.alpha, "entries": entries}, cfg)
    return EXIT_OK


def cmd_norm(cfg: RunConfig) -> int:
    X = load_variable(cfg)
    f = cfg.orlicz()
    gauge = ScaledOrlicz(f, cfg.alpha) if cfg.alpha_given else f
    res = luxemburg_norm(X, gauge, rel=cfg.tolerances["bisection_rel"])
    if math.isinf(res.value):
        sys.stderr.write(f"variable is not in the Orlicz space of {f.label}\n")
        return EXIT_DOMAIN
    payload = {"command": "norm", "phi": f.label, "alpha": cfg.alpha if cfg.alpha_given else None,
               "gauge": gauge.label, **res.to_dict(), **_source(cfg)}
    _emit(payload, cfg)
    return EXIT_OK


def cmd_premium(cfg: RunConfig) -> int:
    X = load_variable(cfg)
    f = cfg.orlicz()
    res = premium(X, f, cfg.alpha, tol=cfg.tolerances["minimizer_abs"],
                  rel=cfg.tolerances["bisection_rel"])
    payload = {"command": "premium", **res.to_dict(), **_source(cfg)}
    _emit(payload, cfg)
    return EXIT_OK


def cmd_es(cfg: RunConfig) -> int:
    X = load_variable(cfg)
    payload = {"command": "es", "alpha": cfg.alpha, "value": expected_shortfall(X, cfg.alpha),
               "var": var(X, cfg.alpha), **_source(cfg)}
    _emit(payload, cfg)
    return EXIT_OK


def cmd_dual(cfg: RunConfig) -> int:
    X = load_variable(cfg)
    if not isinstance(X, DiscreteRV):
        raise ConfigError("dual needs a discrete --input")
    if X.size > MAX_ATOMS_DUAL:
        raise ConfigError(f"dual is limited to {MAX_ATOMS_DUAL} atoms, input has {X.size}")
    f = cfg.orlicz()
    report = primal_dual_report(X, f, cfg.alpha, seed=cfg.seed,
                                gap_tol=cfg.tolerances["duality_gap"])
    payload = {"command": "dual", **report, **_source(cfg)}
    _emit(payload, cfg)
    return EXIT_OK if report["verdict"] == "PASS" else EXIT_FAIL


def cmd_stability(cfg: RunConfig, name: str, args: argparse.Namespace) -> int:
    f = cfg.orlicz()
    alpha = cfg.alpha
    if name == "fatou":
        specs = fatou_specs()
        seq = args.sequence or "truncation"
        if seq not in specs:
            raise ConfigError(f"unknown fatou sequence {seq!r}; choose from {sorted(specs)}")
        report = run_fatou(specs[seq], f, alpha, n_max=cfg.n_max or 20)
    elif name == "lebesgue-failure":
        if f.delta2:
            raise ConfigError("lebesgue-failure needs a non-Delta2 --phi "
                              "(exponential or square-exponential)")
        report = run_lebesgue_failure(f, alpha, n_max=cfg.n_max or 20,
                                      contrast_bound=args.contrast_bound)
    elif name == "phi-weak":
        variant = args.variant or "lsc"
        if variant == "continuity-failure":
            if f.delta2:
                raise ConfigError("the continuity-failure variant needs a non-Delta2 --phi")
            report = run_phi_weak_failure(f, alpha, n_max=cfg.n_max or 20)
        else:
            specs = phi_weak_specs()
            seq = args.sequence or "geometric"
            if seq not in specs:
                raise ConfigError(f"unknown phi-weak sequence {seq!r}; "
                                  f"choose from {sorted(specs)}")
            report = run_phi_weak(specs[seq], f, alpha, n_max=cfg.n_max or 20)
    else:
        report = run_dist_counterexample(f, alpha, n_max=cfg.n_max or 100)
    payload = {"command": "stability", **report.to_dict(include_runtime=not cfg.no_timestamp)}
    payload = _stamp(payload, cfg)
    out_dir = Path(cfg.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        text = dumps(payload) + "\n"
        (out_dir / f"{name}.json").write_text(text)
        report.write_csv(out_dir / f"{name}.csv")
    except OSError as exc:
        raise ConfigError(f"cannot write reports to {out_dir}: {exc}") from None
    sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------- parser


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--phi", choices=PHI_NAMES, help="Orlicz function (default identity)")
    g.add_argument("--p", type=float, help="exponent for --phi power (default 2)")
    g.add_argument("--a", type=float, help="kink for --phi kinked (default 0.5)")
    g.add_argument("--alpha", type=float, help="level in (0, 1) (default 0.5)")
    g.add_argument("--input", help="CSV of values or value,prob rows")
    g.add_argument("--quantile", help="quantile family, e.g. log-singular or power-tail:beta=0.3")
    g.add_argument("--n-max", dest="n_max", type=int, help="sequence length for experiments")
    g.add_argument("--seed", type=int, help="seed for randomized starts and sampling")
    g.add_argument("--out-dir", dest="out_dir", help="directory for experiment reports")
    g.add_argument("--no-timestamp", dest="no_timestamp", action="store_true", default=False,
                   help="omit timestamps and runtimes so output is byte-reproducible")
    g.add_argument("--config", help="JSON config file; flags override its values")
    t = common.add_argument_group("tolerances")
    t.add_argument("--bisection-rel", dest="bisection_rel", type=float,
                   help=f"relative tolerance of norm solves (default {BISECTION_REL:g})")
    t.add_argument("--minimizer-abs", dest="minimizer_abs", type=float,
                   help=f"absolute tolerance on the premium shift (default {MINIMIZER_ABS:g})")
    t.add_argument("--duality-gap", dest="duality_gap", type=float,
                   help="largest accepted primal-dual gap for `dual` (default 1e-3)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="orlicz-premium",
        description="Orlicz norms, Haezendonck-Goovaerts premia, duality checks and "
                    "stability experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("catalog", parents=[common], help="list the Orlicz function catalog")
    sub.add_parser("norm", parents=[common],
                   help="Luxemburg norm (of phi/(1-alpha) when --alpha is given)")
    sub.add_parser("premium", parents=[common], help="premium of a variable")
    sub.add_parser("es", parents=[common], help="Expected Shortfall and VaR at --alpha")
    sub.add_parser("dual", parents=[common], help="primal-dual report on a discrete input")
    st = sub.add_parser("stability", parents=[common], help="run a stability experiment")
    st.add_argument("name", choices=sorted(EXPERIMENTS), help="experiment name")
    st.add_argument("--sequence", help="sequence for fatou (truncation, constant, shift, "
                                       "oscillating) or phi-weak (geometric, harmonic, constant)")
    st.add_argument("--variant", choices=("lsc", "continuity-failure"),
                    help="phi-weak variant (default lsc)")
    st.add_argument("--contrast-bound", dest="contrast_bound", type=float,
                    help="lebesgue-failure: assert the contrast premium at n-max is below this")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "catalog":
            return cmd_catalog(cfg)
        if args.command == "norm":
            return cmd_norm(cfg)
        if args.command == "premium":
            return cmd_premium(cfg)
        if args.command == "es":
            return cmd_es(cfg)
        if args.command == "dual":
            return cmd_dual(cfg)
        return cmd_stability(cfg, args.name, args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (NotInOrliczSpace, MembershipInconclusive) as exc:
        sys.stderr.write(f"rejected: {exc}\n")
        return EXIT_DOMAIN
    except QuadratureInconclusive as exc:
        sys.stderr.write(f"rejected: {exc}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
