"""Acceptance criteria A1-A9, each at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass/fail line
per criterion.
"""

import json
import math
import time

import numpy as np
import pytest

from sievekit import buchstab, dhr
from sievekit import tuples as T
from sievekit.bound import BoundParams, _evaluate, compute_bound, optimize_bound
from sievekit.cli import main
from sievekit.constants import EXP_NEG_GAMMA
from sievekit.errors import EvaluationError, ParameterError


def _report(line):
    print(f"\n{line}")


def test_A1_headline_bound(tmp_path_factory, capsys):
    cold_dir = str(tmp_path_factory.mktemp("cold-cache"))

    t0 = time.perf_counter()
    code = main(["bound", "--k", "3", "--u", "2", "--v", "12", "--json",
                 "--cache-dir", cold_dir])
    cold = time.perf_counter() - t0
    out = capsys.readouterr().out
    assert code == 0
    obj = json.loads(out)

    assert 6.923 <= obj["N"] <= 6.963
    assert obj["N"] < 7.0
    assert obj["r"] == 7
    assert cold <= 300.0

    # warm cache: drop the in-process memos, keep the files
    dhr._pair_memo.clear()
    dhr._sigma_memo.clear()
    buchstab._memo.clear()
    t0 = time.perf_counter()
    code = main(["bound", "--k", "3", "--u", "2", "--v", "12", "--json",
                 "--cache-dir", cold_dir])
    warm = time.perf_counter() - t0
    out2 = capsys.readouterr().out
    assert code == 0
    assert json.loads(out2)["N"] == obj["N"]
    assert warm <= 5.0

    _report(f"A1 PASS: N(2,12;3) = {obj['N']:.6f} in [6.923, 6.963], "
            f"N < 7, r = 7; cold {cold:.2f}s <= 300s, warm {warm:.3f}s <= 5s")


def test_A2_unmixed_comparison(cache_dir, tables3):
    rep = compute_bound(BoundParams(3, 1.5, 12.0), cache_dir=cache_dir,
                        tables=tables3)
    assert 7.0 < rep.old_value <= 8.0

    best = optimize_bound(3, (1.2, 3.0), (8.0, 16.0), 64, objective="old",
                          cache_dir=cache_dir)
    assert best.old_value > 7.0

    _report(f"A2 PASS: old(1.5,12;3) = {rep.old_value:.6f} in (7, 8]; "
            f"64x64 grid minimum of old = {best.old_value:.6f} > 7 "
            f"at (u,v) = ({best.params.u:.4f}, {best.params.v:.4f})")


def test_A3_superiority(cache_dir, tables2, tables3):
    checked = 0
    worst = -np.inf
    for k, tables in ((2, tables2), (3, tables3)):
        beta_km1 = tables.pair_km1.beta
        for u in np.linspace(1.3, 2.8, 8):
            for v in np.linspace(2.0 * beta_km1 + 0.6, 15.5, 8):
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
                assert N <= old + 1e-9, (k, u, v)
                worst = max(worst, N - old)
                checked += 1
    assert checked >= 100
    _report(f"A3 PASS: N <= old at all {checked} valid points "
            f"(max N - old = {worst:.3e})")


def test_A4_buchstab_oracle(wtab):
    us = np.linspace(1.0, 3.0, 4001)
    closed = np.where(us <= 2.0, 1.0 / us,
                      (1.0 + np.log(np.maximum(us - 1.0, 1e-300))) / us)
    err_closed = float(np.max(np.abs(wtab.w_many(us) - closed)))
    assert err_closed <= 1e-8

    us2 = np.arange(8.0, 64.0 + 1e-9, 0.01)
    err_asym = float(np.max(np.abs(wtab.w_many(us2) - EXP_NEG_GAMMA)))
    assert err_asym <= 1e-4

    _report(f"A4 PASS: sup|w - closed form| on [1,3] = {err_closed:.2e} <= 1e-8; "
            f"max|w - e^-gamma| on [8,64] = {err_asym:.2e} <= 1e-4")


def test_A5_linear_sieve_oracle(pairs):
    from sievekit.constants import EXP_GAMMA

    p1 = pairs[1]
    us = np.linspace(2.0, 3.0, 501)
    errF = float(np.max(np.abs(p1.F_many(us) - 2.0 * EXP_GAMMA / us)))
    us2 = np.linspace(2.0, 4.0, 1001)
    errf = float(np.max(np.abs(
        p1.f_many(us2) - 2.0 * EXP_GAMMA * np.log(us2 - 1.0) / us2)))
    beta_err = abs(p1.beta - 2.0)
    assert errF <= 1e-6
    assert errf <= 1e-6
    assert beta_err <= 1e-6
    _report(f"A5 PASS: |F_1 - 2e^g/u| = {errF:.2e}, "
            f"|f_1 - 2e^g ln(u-1)/u| = {errf:.2e} (both <= 1e-6); "
            f"|beta_1 - 2| = {beta_err:.2e} <= 1e-6")


def test_A6_positivity_and_monotone_beta(pairs):
    f26 = pairs[2].f(6.0)
    f312 = pairs[3].f(12.0)
    betas = [pairs[k].beta for k in (1, 2, 3, 4)]
    assert f26 > 0.0
    assert f312 > 0.0
    assert betas[0] < betas[1] < betas[2] < betas[3]
    _report(f"A6 PASS: f_2(6) = {f26:.6f} > 0, f_3(12) = {f312:.6f} > 0; "
            f"beta_1..4 = {', '.join(f'{b:.5f}' for b in betas)} strictly increasing")


def test_A7_tuple_toolkit():
    from sievekit.arith import sieve_primes

    assert T.is_admissible(T.parse_tuple("x,x+2,x+4")) is False
    t2, A, B = T.normalize(T.parse_tuple("x,x+2,x+6"))
    assert str(t2) == "6x+5, 6x+7, 6x+11"
    assert (A, B) == (6, 5)
    assert T.satisfies_normal_form(t2)
    for p in sieve_primes(101):
        p = int(p)
        assert T.v_p(t2, p) in (0, t2.k)
        assert T.v_p(t2, p) == (0 if t2.A % p == 0 else t2.k)
    _report("A7 PASS: {x,x+2,x+4} inadmissible; normalize({x,x+2,x+6}) = "
            "{6x+5,6x+7,6x+11} with (A,B)=(6,5); checker passes; "
            "v_p dichotomy holds for all p <= 100")


def test_A8_scanner_oracle():
    from .test_tuples import brute_force_scan

    t = T.parse_tuple("6x+5,6x+7,6x+11")
    t0 = time.perf_counter()
    rep = T.scan_S(t, 1000, 5, 7.0)
    elapsed = time.perf_counter() - t0
    S, survivors, witnesses = brute_force_scan(t, 1000, 5, 7.0)
    assert rep.S_value == S
    assert rep.survivor_count == survivors
    assert rep.witnesses == witnesses
    assert elapsed <= 10.0
    _report(f"A8 PASS: scan(N=1000, z=5, tau=7) matches brute force exactly "
            f"(S = {rep.S_value}, survivors = {rep.survivor_count}, "
            f"witnesses = {len(rep.witnesses)}); {elapsed:.2f}s <= 10s")


def test_A9_convergence(cache_dir, headline, tables3):
    fine = compute_bound(BoundParams(3, 2.0, 12.0), step=2.0 ** -11,
                         cache_dir=cache_dir)
    dN = abs(fine.N_value - headline.N_value)
    assert dN <= 2e-3

    params = BoundParams(3, 2.0, 12.0)
    I1a, I2a, *_ = _evaluate(params, tables3, 1e-9, "N")
    vals_a = _evaluate(params, tables3, 1e-9, "N")
    I1b, I2b, *_ = _evaluate(params, tables3, 5e-10, "N")
    raw_err = vals_a[5] * tables3.pair_k.f(12.0) / 3.0
    assert abs(I1a - I1b) < max(raw_err, 1e-12)
    assert abs(I2a - I2b) < max(raw_err, 1e-12)

    _report(f"A9 PASS: halving the DDE step moves N by {dN:.2e} <= 2e-3; "
            f"tolerance halving moves I1 by {abs(I1a-I1b):.2e} and I2 by "
            f"{abs(I2a-I2b):.2e}, both within the reported estimate")
