"""Buchstab function: closed forms, asymptotics, segment views."""

import math

import numpy as np
import pytest

from sievekit import buchstab, dde
from sievekit.constants import EXP_NEG_GAMMA
from sievekit.errors import DomainError


def closed_form(u):
    """w on [1, 3]: 1/u, then (1 + ln(u-1))/u."""
    u = np.asarray(u, dtype=float)
    return np.where(u <= 2.0, 1.0 / u, (1.0 + np.log(np.maximum(u - 1.0, 1e-300))) / u)


def test_initial_segment_values(wtab):
    assert wtab.w(1.5) == 2.0 / 3.0
    assert wtab.w(2.0) == 0.5
    assert abs(wtab.w(2.5) - (1.0 + math.log(1.5)) / 2.5) < 1e-8


def test_closed_form_on_1_3(wtab):
    us = np.linspace(1.0, 3.0, 4001)
    err = np.max(np.abs(wtab.w_many(us) - closed_form(us)))
    assert err <= 1e-8


def test_asymptotic_band(wtab):
    us = np.arange(8.0, 64.0 + 1e-9, 0.01)
    err = np.max(np.abs(wtab.w_many(us) - EXP_NEG_GAMMA))
    assert err <= 1e-4


def test_w20_against_richardson_oracle(cache_dir):
    # independent oracle: two coarser solves, Richardson-extrapolated
    def solve(n):
        prob = dde.DelayProblem(power=1.0, delay=1.0, sign=1.0,
                                initial=dde.InitialSegment.recip(1.0, 2.0))
        return dde.solve_dde(prob, dde.GridSpec(2.0, 22.0, 2.0 ** -n)).query(20.0)

    v1, v2 = solve(8), solve(9)
    oracle = (16.0 * v2 - v1) / 15.0
    w20 = buchstab.buchstab_w(20.0, cache_dir=cache_dir)
    assert abs(w20 - oracle) < 1e-9
    assert abs(w20 - EXP_NEG_GAMMA) < 1e-6


def test_range_invariant(wtab):
    us = np.linspace(2.0, 64.0, 20001)
    ws = wtab.w_many(us)
    assert np.all(ws >= 0.5 - 1e-15)
    assert np.all(ws <= 1.0)


def test_domain_errors(wtab):
    with pytest.raises(DomainError):
        wtab.w(0.5)
    with pytest.raises(DomainError):
        buchstab.buchstab_w(0.99)
    with pytest.raises(DomainError):
        wtab.w(wtab.u_max + 1.0)


def test_segment_view(cache_dir):
    view = buchstab.buchstab_on_segment(12.0, 1.0 / 12.0, 11.0 / 12.0,
                                        cache_dir=cache_dir)
    assert view.kinks == [0.75, 1.0 - 2.0 / 12.0]
    assert abs(view(1.0 / 12.0) - EXP_NEG_GAMMA) < 1e-4   # w(11)
    assert view(5.0 / 6.0) == 0.5                          # w(2)
    assert view(11.0 / 12.0) == 1.0                        # w(1)
    w_direct = buchstab.buchstab_w(12.0 - 12.0 * 0.4, cache_dir=cache_dir)
    assert view(0.4) == w_direct


def test_segment_view_domain_error(cache_dir):
    with pytest.raises(DomainError):
        # v - v*s would dip below 1
        buchstab.buchstab_on_segment(12.0, 0.5, 1.0, cache_dir=cache_dir)
    view = buchstab.buchstab_on_segment(12.0, 0.25, 0.75, cache_dir=cache_dir)
    with pytest.raises(DomainError):
        view(0.9)
