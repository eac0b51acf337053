import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from orlicz_premium.duality import (DualDensity, conjugate_value, dual_premium,
                                    primal_dual_report, weak_duality_sample)
from orlicz_premium.orlicz import catalog, get_orlicz
from orlicz_premium.premium import premium
from orlicz_premium.randvar import DiscreteRV
from strategies import discrete_rvs

IDENT = get_orlicz("identity")
SQUARE = get_orlicz("power", p=2)
U4 = DiscreteRV([1.0, 2.0, 3.0, 4.0])
ENTRIES = catalog()


def _density(y, p):
    return DualDensity(np.asarray(y, dtype=float), np.asarray(p, dtype=float))


def test_conjugate_value_examples():
    p = np.full(4, 0.25)
    for f in ENTRIES:
        for a in (0.1, 0.5, 0.9):
            assert conjugate_value(_density(np.ones(4), p), f, a).value == 0.0
    neg = conjugate_value(_density([2.0, -0.5, 1.5, 1.0], p), SQUARE, 0.5)
    assert neg.value == math.inf and neg.violation == "nonneg"
    two = conjugate_value(_density(np.full(4, 2.0), p), SQUARE, 0.5)
    assert two.value == math.inf and two.violation == "mean_one"


def test_identity_dual_set_is_expected_shortfall_set():
    p = np.full(4, 0.25)
    a = 0.5
    assert conjugate_value(_density([0.0, 0.0, 2.0, 2.0], p), IDENT, a).value == 0.0
    bad = conjugate_value(_density([0.0, 0.0, 1.0, 3.0], p), IDENT, a)
    assert bad.value == math.inf and bad.violation == "norm"
    rng = np.random.default_rng(9)
    for _ in range(200):
        y = rng.uniform(0.0, 2.6, 4)
        y = y / np.dot(p, y)
        inside = bool(np.all(y <= 1.0 / (1.0 - a) + 1e-12))
        clear = abs(np.max(y) - 2.0) > 1e-6
        if clear:
            assert (conjugate_value(_density(y, p), IDENT, a).value == 0.0) == inside


def test_dual_premium_examples():
    res = dual_premium(U4, IDENT, 0.5)
    assert res.value == pytest.approx(3.5, abs=1e-9)
    np.testing.assert_allclose(res.argmax.density, [0.0, 0.0, 2.0, 2.0], atol=1e-6)
    const = dual_premium(DiscreteRV.constant(2.5), SQUARE, 0.7)
    assert const.value == pytest.approx(2.5, abs=1e-12)
    assert const.gap_vs_primal == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        dual_premium(DiscreteRV(np.arange(17.0)), SQUARE, 0.5)


def test_dual_matches_grid_oracle():
    rng = np.random.default_rng(13)
    for _ in range(2):
        x, p = rng.uniform(-2, 3, 3), rng.dirichlet(np.ones(3))
        dual = dual_premium(DiscreteRV(x, p), SQUARE, 0.5).value
        assert dual == pytest.approx(oracles.grid_dual(x, p, "power", 0.5, p=2.0), abs=1e-4)
        assert dual == pytest.approx(premium(DiscreteRV(x, p), SQUARE, 0.5).value, abs=1e-4)


def test_weak_duality_examples():
    zero = weak_duality_sample(DiscreteRV.constant(0.0), SQUARE, 0.5, n_samples=20)
    assert zero.max_value == pytest.approx(0.0, abs=1e-12)
    X = DiscreteRV([-1.0, 0.5, 4.0], [0.3, 0.3, 0.4])
    res = weak_duality_sample(X, SQUARE, 0.5, n_samples=50, seed=1)
    assert res.holds
    assert res.max_value >= float(np.dot(X.probs, X.values)) - 1e-12


def test_report_contract():
    rep = primal_dual_report(U4, IDENT, 0.5, n_samples=30)
    assert rep["verdict"] == "PASS"
    assert abs(rep["gap"]) <= 1e-6
    assert rep["feasibility"]["feasible"]
    const = primal_dual_report(DiscreteRV.constant(1.0), SQUARE, 0.5, n_samples=10)
    assert const["gap"] == 0.0


# ---------------------------------------------------------------- properties


@settings(max_examples=25, deadline=None)
@given(X=discrete_rvs(max_atoms=5, lo=-5, hi=5), f=st.sampled_from(ENTRIES),
       a=st.sampled_from([0.1, 0.5, 0.9]), seed=st.integers(0, 1000))
def test_weak_duality_never_exceeds_primal(X, f, a, seed):
    res = weak_duality_sample(X, f, a, n_samples=40, seed=seed)
    assert res.max_value <= res.bound + 1e-8


@settings(max_examples=15, deadline=None)
@given(X=discrete_rvs(max_atoms=5, lo=-5, hi=5), f=st.sampled_from(ENTRIES),
       a=st.sampled_from([0.1, 0.5, 0.9]))
def test_strong_duality_small(X, f, a):
    res = dual_premium(X, f, a)
    assert res.certificate.feasible
    assert res.relative_gap <= 1e-4


@settings(max_examples=15, deadline=None)
@given(X=discrete_rvs(max_atoms=4, lo=-5, hi=5), t=st.floats(min_value=0.1, max_value=20),
       f=st.sampled_from(ENTRIES))
def test_certificate_survives_scaling(X, t, f):
    res = dual_premium(X, f, 0.5)
    y = res.argmax
    # the certificate depends on the density only, so it stays valid for t X
    assert conjugate_value(y, f, 0.5).value == 0.0
    scaled_value = float(np.dot(y.base, y.density * t * X.values))
    assert scaled_value <= premium(X.scale(t), f, 0.5).value + 1e-8 * max(1.0, t)
