import math

import pytest

from orlicz_premium.orlicz import get_orlicz
from orlicz_premium.randvar import log_singular
from orlicz_premium.stability import (SequenceSpec, check_mode, fatou_specs, phi_weak_specs,
                                      run_dist_counterexample, run_fatou, run_lebesgue_failure,
                                      run_phi_weak, run_phi_weak_failure)

IDENT = get_orlicz("identity")


def test_sequence_spec_validates_mode():
    X = log_singular()
    with pytest.raises(ValueError):
        SequenceSpec("bad", lambda n: X, X, "sideways")


def test_declared_modes_spot_check():
    for spec in fatou_specs().values():
        assert check_mode(spec, 10), spec.name
    for spec in phi_weak_specs().values():
        assert check_mode(spec, 10), spec.name


def test_fatou_truncation_identity_reaches_expected_shortfall():
    rep = run_fatou(fatou_specs()["truncation"], IDENT, 0.5, n_max=12)
    assert rep.passed, rep.verdict
    assert rep.info["limit_premium"] == pytest.approx(1.0 + math.log(2.0), abs=1e-7)


def test_fatou_constant_and_shift():
    specs = fatou_specs()
    const = run_fatou(specs["constant"], IDENT, 0.5, n_max=6)
    assert const.passed
    vals = [r["premium"] for r in const.rows]
    assert max(vals) - min(vals) <= 1e-12
    shift = run_fatou(specs["shift"], IDENT, 0.5, n_max=8)
    assert shift.passed
    limit = shift.info["limit_premium"]
    for row in shift.rows:
        assert row["premium"] == pytest.approx(limit + 1.0 / row["n"], abs=1e-7)


def test_fatou_rejects_distributional_specs():
    with pytest.raises(ValueError):
        run_fatou(phi_weak_specs()["constant"], IDENT, 0.5)


def test_lebesgue_failure_identity_contrast_closed_form():
    rep = run_lebesgue_failure(get_orlicz("exponential"), 0.5, n_max=6)
    assert rep.passed, rep.verdict
    for row in rep.rows:
        eps = 1.0 / row["n"]
        t = min(eps, 0.5)
        closed = t * (1.0 + math.log(1.0 / t)) / 0.5
        assert row["contrast_premium"] == pytest.approx(closed, abs=1e-6)
        assert row["n_alpha"] >= 1.0


def test_lebesgue_failure_floor():
    rep = run_lebesgue_failure(get_orlicz("exponential"), 0.5, n_max=3)
    assert rep.info["floor"] == pytest.approx(1.0 - math.log1p(0.5 * (math.e - 1.0)), abs=1e-12)


def test_phi_weak_identity_harmonic():
    # the harmonic rate moves the first moment by 0.5/n, so only the premium
    # values and the lsc verdict are checked here (not the 1e-3 moment tolerance)
    rep = run_phi_weak(phi_weak_specs()["harmonic"], IDENT, 0.5, n_max=10)
    assert rep.verdict["lsc_tail_liminf"]
    limit = rep.info["limit_premium"]
    for row in rep.rows:
        assert row["premium"] == pytest.approx((1 + 1.0 / row["n"]) * limit, abs=1e-7)


def test_phi_weak_geometric_passes():
    for f in (IDENT, get_orlicz("exponential")):
        rep = run_phi_weak(phi_weak_specs()["geometric"], f, 0.5, n_max=12)
        assert rep.passed, rep.verdict


def test_phi_weak_continuity_failure_small():
    rep = run_phi_weak_failure(get_orlicz("exponential"), 0.5, n_max=8)
    assert all(row["n_alpha"] >= 0.5 for row in rep.rows)
    mods = [row["modular"] for row in rep.rows]
    assert mods[-1] < mods[0]


def test_dist_counterexample_identity():
    rep = run_dist_counterexample(IDENT, 0.5, n_max=100)
    assert rep.passed
    assert rep.rows[0]["premium"] == pytest.approx(1.0, abs=1e-9)
    assert rep.rows[-1]["premium"] == pytest.approx(2.0, abs=1e-9)


def test_report_serialization(tmp_path):
    # n_max=5 leaves the CDF distance at 0.2, so the report must not pass
    rep = run_dist_counterexample(IDENT, 0.5, n_max=5)
    d = rep.to_dict(include_runtime=False)
    assert "runtime" not in d and d["passed"] is False
    assert d["verdict"]["cdf_distance_small_at_n_max"] is False
    assert "runtime" in rep.to_dict()
    path = tmp_path / "r.csv"
    rep.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,premium,n_alpha,mean,modular"
    assert len(lines) == 6
