"""Haezendonck-Goovaerts premia on Orlicz spaces."""

from .duality import (DualDensity, DualResult, conjugate_value, dual_premium,
                      primal_dual_report, weak_duality_sample)
from .errors import (MembershipInconclusive, NotInOrliczSpace, OrliczPremiumError,
                     QuadratureInconclusive)
from .norms import Conjugate, dual_norm_oracle, luxemburg_norm, n_alpha, orlicz_norm
from .orlicz import (OrliczFunction, ScaledOrlicz, catalog, check_delta2, conjugate,
                     conjugate_scaled, generalized_inverse, get_orlicz)
from .premium import (PremiumResult, coarsening_bound_check, expected_shortfall, premium,
                      premium_at, var)
from .randvar import (DiscreteRV, QuantileRV, cdf_distance, coarsen, expectation, membership,
                      quantile_family, read_csv)
from .stability import (EXPERIMENTS, run_dist_counterexample, run_fatou, run_lebesgue_failure,
                        run_phi_weak, run_phi_weak_failure)

__all__ = [
    "Conjugate", "DiscreteRV", "DualDensity", "DualResult", "EXPERIMENTS",
    "MembershipInconclusive", "NotInOrliczSpace", "OrliczFunction", "OrliczPremiumError",
    "PremiumResult", "QuadratureInconclusive", "QuantileRV", "ScaledOrlicz", "catalog",
    "cdf_distance", "check_delta2", "coarsen", "coarsening_bound_check", "conjugate",
    "conjugate_scaled", "conjugate_value", "dual_norm_oracle", "dual_premium", "expectation",
    "expected_shortfall", "generalized_inverse", "get_orlicz", "luxemburg_norm", "membership",
    "n_alpha", "orlicz_norm", "premium", "premium_at", "primal_dual_report", "quantile_family",
    "read_csv", "run_dist_counterexample", "run_fatou", "run_lebesgue_failure", "run_phi_weak",
    "run_phi_weak_failure", "var", "weak_duality_sample",
]
