import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from orlicz_premium.errors import NotInOrliczSpace
from orlicz_premium.norms import luxemburg_norm
from orlicz_premium.orlicz import catalog, get_orlicz
from orlicz_premium.premium import (coarsening_bound_check, expected_shortfall, premium,
                                    premium_at, var)
from orlicz_premium.randvar import DiscreteRV, expectation, log_singular, power_tail, shrinking_log
from strategies import discrete_rvs

IDENT = get_orlicz("identity")
U4 = DiscreteRV([1.0, 2.0, 3.0, 4.0])
ENTRIES = catalog()


def test_premium_at_examples():
    assert premium_at(U4, IDENT, 0.5, 5.0).value == 5.0
    assert premium_at(DiscreteRV.constant(0.0), IDENT, 0.5, -2.0).value == pytest.approx(2.0)
    assert premium_at(U4, IDENT, 0.5, 3.0).value == pytest.approx(3.5, abs=1e-12)


def test_premium_examples():
    res = premium(U4, IDENT, 0.5)
    assert res.value == pytest.approx(3.5, abs=1e-9)
    assert res.value == pytest.approx(res.m_star + res.inner_norm, abs=1e-9)
    for f in ENTRIES:
        for a in (0.1, 0.5, 0.9):
            assert premium(DiscreteRV.constant(-1.7), f, a).value == pytest.approx(-1.7, abs=1e-9)
            for n in (1, 3, 10):
                X = DiscreteRV.indicator(1.0 / n, float(n))
                assert premium(X, f, a).value >= 1.0 - 1e-9


def test_premium_matches_brent_oracle():
    rng = np.random.default_rng(2)
    for f in ENTRIES:
        if f.name == "square-exponential":
            continue
        for a in (0.1, 0.5, 0.9):
            n = int(rng.integers(2, 7))
            x, p = rng.uniform(-4, 4, n), rng.dirichlet(np.ones(n))
            ours = premium(DiscreteRV(x, p), f, a).value
            ref = oracles.premium(x, p, f.name, a, **dict(f.params))
            assert ours == pytest.approx(ref, abs=1e-8)


def test_var_examples():
    assert var(U4, 0.5) == 2.0
    assert var(U4, 0.95) == 4.0
    assert var(DiscreteRV.constant(3.0), 0.3) == 3.0
    assert var(log_singular(), 0.5) == pytest.approx(math.log(2.0))
    with pytest.raises(ValueError):
        var(U4, 1.0)


def test_expected_shortfall_examples():
    assert expected_shortfall(U4, 0.5) == pytest.approx(3.5, abs=1e-12)
    assert expected_shortfall(DiscreteRV.constant(2.0), 0.7) == pytest.approx(2.0)
    # exponential law: ES_lam = log(1/(1-lam)) + 1
    assert expected_shortfall(log_singular(), 0.5) == pytest.approx(1.0 + math.log(2.0), rel=1e-9)


def test_quantile_premium():
    # identity gauge: premium equals Expected Shortfall
    assert premium(log_singular(), IDENT, 0.5).value == pytest.approx(1.0 + math.log(2.0),
                                                                      abs=1e-7)
    eps = 0.05
    es = 2.0 * eps * (1.0 + math.log(1.0 / eps))
    assert premium(shrinking_log(eps), IDENT, 0.5).value == pytest.approx(es, abs=1e-7)
    val = premium(log_singular(), get_orlicz("exponential"), 0.5).value
    assert math.isfinite(val) and val > 1.0 + math.log(2.0)


def test_premium_rejects_outside_space():
    with pytest.raises(NotInOrliczSpace):
        premium(power_tail(0.5), get_orlicz("power", p=2), 0.5)


def test_coarsening_examples():
    one = coarsening_bound_check(U4, [[0, 1, 2, 3]], IDENT, 0.5)
    assert one.holds and one.lhs == pytest.approx(2.5)
    single = coarsening_bound_check(U4, [[0], [1], [2], [3]], IDENT, 0.5)
    assert single.holds and single.lhs == pytest.approx(single.rhs, abs=1e-12)
    pair = coarsening_bound_check(U4, [[0, 1], [2, 3]], IDENT, 0.5)
    assert pair.holds and pair.lhs == pytest.approx(3.5, abs=1e-9)


# ---------------------------------------------------------------- properties

combos = st.tuples(st.sampled_from(ENTRIES), st.sampled_from([0.1, 0.5, 0.9]))


@settings(max_examples=80, deadline=None)
@given(X=discrete_rvs(), fa=combos)
def test_mean_bound_and_certificate(X, fa):
    f, a = fa
    res = premium(X, f, a)
    assert res.value >= expectation(X) - 1e-9
    assert res.value <= float(X.values.max()) + 1e-9
    for d in (1e-3, 1e-2, 0.1):
        for m in (res.m_star - d, res.m_star + d):
            assert premium_at(X, f, a, m).value >= res.value - 1e-9


@settings(max_examples=60, deadline=None)
@given(X=discrete_rvs(), fa=combos, t=st.sampled_from([0.0, 0.5, 2.0, 7.0]),
       c=st.floats(min_value=-10, max_value=10))
def test_homogeneity_and_translation(X, fa, t, c):
    f, a = fa
    base = premium(X, f, a).value
    assert premium(X.scale(t), f, a).value == pytest.approx(t * base, abs=1e-7)
    assert premium(X.shift(c), f, a).value == pytest.approx(base + c, abs=1e-7)


@settings(max_examples=60, deadline=None)
@given(X=discrete_rvs(), fa=combos, seed=st.integers(0, 2 ** 31))
def test_monotone_and_lipschitz(X, fa, seed):
    f, a = fa
    rng = np.random.default_rng(seed)
    bump = rng.uniform(-1.0, 2.0, X.size)
    Y = DiscreteRV(X.values + bump, X.probs)
    Z = DiscreteRV(X.values + np.abs(bump), X.probs)
    px, py = premium(X, f, a).value, premium(Y, f, a).value
    assert px <= premium(Z, f, a).value + 1e-8
    diff = DiscreteRV(bump, X.probs)
    assert abs(px - py) <= luxemburg_norm(diff, f).value / (1 - a) + 1e-7


@settings(max_examples=40, deadline=None)
@given(X=discrete_rvs(max_atoms=6), a=st.sampled_from([0.05, 0.3, 0.5, 0.8, 0.95]))
def test_identity_premium_is_expected_shortfall(X, a):
    es = expected_shortfall(X, a)
    assert premium(X, IDENT, a).value == pytest.approx(es, abs=1e-7)
    assert es == pytest.approx(oracles.expected_shortfall(X.values, X.probs, a), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(X=discrete_rvs(max_atoms=8), fa=combos, seed=st.integers(0, 2 ** 31))
def test_coarsening_never_increases(X, fa, seed):
    f, a = fa
    labels = np.random.default_rng(seed).integers(0, 3, X.size)
    blocks = [list(np.flatnonzero(labels == k)) for k in np.unique(labels)]
    assert coarsening_bound_check(X, blocks, f, a).holds
