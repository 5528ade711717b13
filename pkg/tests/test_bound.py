"""Weighted bound: headline value, comparison value, properties, search."""

import numpy as np
import pytest

from sievekit.bound import (
    BoundParams,
    _evaluate,
    compute_bound,
    integrand_I1,
    integrand_I2,
    optimize_bound,
)
from sievekit.constants import EXP_GAMMA
from sievekit.errors import EvaluationError, ParameterError


def test_headline_value(headline):
    assert 6.923 <= headline.N_value <= 6.963
    assert headline.N_value < 7.0
    assert headline.r == 7
    assert not headline.borderline
    assert headline.I1 >= 0.0 and headline.I2 >= 0.0
    assert headline.r > max(headline.N_value, 2.0 * 3 - 1.0)


def test_old_value_at_unmixed_optimum(cache_dir, tables3):
    rep = compute_bound(BoundParams(3, 1.5, 12.0), cache_dir=cache_dir,
                        tables=tables3)
    assert 7.0 < rep.old_value <= 8.0


def test_parameter_validation():
    with pytest.raises(ParameterError):
        compute_bound(BoundParams(3, 1.05, 12.0))
    with pytest.raises(ParameterError):
        compute_bound(BoundParams(3, 13.0, 12.0))
    with pytest.raises(ParameterError):
        BoundParams(1, 2.0, 12.0).validate()


def test_below_sifting_limit(cache_dir, tables3):
    with pytest.raises(EvaluationError):
        compute_bound(BoundParams(3, 2.0, 6.0), cache_dir=cache_dir,
                      tables=tables3)


def test_integrand_endpoint_zeros(tables3):
    params = BoundParams(3, 2.0, 12.0)
    assert abs(integrand_I1(1.0 / 2.0, params, tables3)) <= 1e-12
    assert abs(integrand_I2(1.0 / 2.0, params, tables3)) <= 1e-12


def test_integrand_I2_at_upper_endpoint(tables3):
    # at s = 1 - 1/v the argument is 1: the k-branch vanishes below the
    # sifting limit and w(1) = 1, leaving (u(1-1/v)-1)/(1-1/v) * e^g f_2(6)
    params = BoundParams(3, 2.0, 12.0)
    s = 1.0 - 1.0 / 12.0
    want = (2.0 * s - 1.0) / s * EXP_GAMMA * tables3.pair_km1.f(6.0)
    got = integrand_I2(s, params, tables3)
    assert abs(got - want) < 1e-10
    assert tables3.pair_k.f(1.0) == 0.0


def test_integrand_branches(tables3):
    params = BoundParams(3, 2.0, 12.0)
    ss = np.linspace(1.0 / 12.0 + 1e-6, 0.5 - 1e-6, 101)
    x = 12.0 - 12.0 * ss
    Fk = tables3.pair_k.F_many(x)
    alt = EXP_GAMMA * tables3.pair_km1.F(6.0) * tables3.w.w_many(x)
    vals = integrand_I1(ss, params, tables3)
    # where the k-branch is smaller the integrand equals it exactly
    # (same operation order as the integrand itself)
    kbranch = Fk <= alt
    assert kbranch.any() and (~kbranch).any()
    want_k = Fk * (1.0 - 2.0 * ss) / ss
    assert np.array_equal(vals[kbranch], want_k[kbranch])
    # min never exceeds either branch
    weight = (1.0 - 2.0 * ss) / ss
    assert np.all(vals <= Fk * weight + 1e-12)
    assert np.all(vals <= alt * weight + 1e-12)

    ss2 = np.linspace(0.5 + 1e-6, 1.0 - 1.0 / 12.0 - 1e-6, 101)
    x2 = 12.0 - 12.0 * ss2
    fk = tables3.pair_k.f_many(x2)
    alt2 = EXP_GAMMA * tables3.pair_km1.f(6.0) * tables3.w.w_many(x2)
    vals2 = integrand_I2(ss2, params, tables3)
    w2 = (2.0 * ss2 - 1.0) / ss2
    assert np.all(vals2 >= fk * w2 - 1e-12)
    assert np.all(vals2 >= alt2 * w2 - 1e-12)


def test_integrand_domain_errors(tables3):
    params = BoundParams(3, 2.0, 12.0)
    with pytest.raises(ParameterError):
        integrand_I1(0.6, params, tables3)
    with pytest.raises(ParameterError):
        integrand_I2(0.05, params, tables3)


def test_kink_handling_vs_brute_force(headline, tables3):
    # brute-force composite rule on 10^6 points must agree with the
    # panel-split adaptive result to 1e-6
    params = BoundParams(3, 2.0, 12.0)
    n = 1_000_000
    s = np.linspace(1.0 / 12.0, 0.5, n + 1)
    y = integrand_I1(s, params, tables3)
    brute = np.trapezoid(y, s)
    assert abs(brute - headline.I1) < 1e-6
    s2 = np.linspace(0.5, 1.0 - 1.0 / 12.0, n + 1)
    y2 = integrand_I2(s2, params, tables3)
    brute2 = np.trapezoid(y2, s2)
    assert abs(brute2 - headline.I2) < 1e-6


def test_quad_tolerance_halving_within_estimate(cache_dir, tables3):
    params = BoundParams(3, 2.0, 12.0)
    I1a, I2a, *_ = _evaluate(params, tables3, 1e-9, "N")
    I1b, I2b, *_ = _evaluate(params, tables3, 5e-10, "N")
    vals = _evaluate(params, tables3, 1e-9, "N")
    err_scaled = vals[5] * tables3.pair_k.f(12.0) / 3.0  # back to raw integral error
    assert abs(I1a - I1b) < max(err_scaled, 1e-12)
    assert abs(I2a - I2b) < max(err_scaled, 1e-12)


def test_superiority_on_grid(cache_dir, tables2, tables3):
    # wherever f_{k-1}(v/2) > 0 the mixed bound is at most the unmixed one
    checked = 0
    for k, tables in ((2, tables2), (3, tables3)):
        beta_km1 = tables.pair_km1.beta
        for u in np.linspace(1.3, 2.8, 8):
            for v in np.linspace(2 * beta_km1 + 0.6, 15.5, 8):
                params = BoundParams(k, float(u), float(v))
                try:
                    params.validate()
                    if v <= tables.pair_k.beta + 1e-6:
                        continue
                    if tables.pair_km1.f(v / 2.0) <= 0.0:
                        continue
                    vals = _evaluate(params, tables, 1e-9, "both")
                except (ParameterError, EvaluationError):
                    continue
                N, old = vals[3], vals[4]
                assert N <= old + 1e-9, (k, u, v, N, old)
                checked += 1
    assert checked >= 100


def test_optimize_small_grid(cache_dir, tables3):
    rep = optimize_bound(3, (1.6, 2.4), (10.0, 14.0), 6, cache_dir=cache_dir)
    assert rep.N_value <= 6.963
    assert rep.r == 7


def test_optimize_old_objective(cache_dir):
    rep = optimize_bound(3, (1.3, 2.0), (10.0, 14.0), 6, objective="old",
                         cache_dir=cache_dir)
    assert rep.old_value > 7.0


def test_optimize_degenerate_range(cache_dir):
    with pytest.raises(ParameterError):
        optimize_bound(3, (5.0, 6.0), (4.0, 4.5), 4, cache_dir=cache_dir)
    with pytest.raises(ParameterError):
        optimize_bound(3, (1.6, 2.4), (10.0, 14.0), 1, cache_dir=cache_dir)


def test_optimize_parallel_matches_serial(cache_dir):
    a = optimize_bound(3, (1.8, 2.2), (11.0, 13.0), 4, jobs=1,
                       cache_dir=cache_dir)
    b = optimize_bound(3, (1.8, 2.2), (11.0, 13.0), 4, jobs=2,
                       cache_dir=cache_dir)
    assert a.params == b.params
    assert a.N_value == b.N_value


def test_report_dict_schema(headline):
    d = headline.to_dict()
    assert list(d.keys()) == ["k", "u", "v", "I1", "I2", "S4_term", "N",
                              "old", "r", "err_estimate", "borderline"]
