"""Backend parity and determinism of the table kernels."""

import numpy as np
import pytest

from sievekit import _kernels_py as pure
from sievekit import backend, dde
from sievekit.constants import EXP_GAMMA

HAVE_COMPILED = "compiled" in backend.available()

needs_compiled = pytest.mark.skipif(
    not HAVE_COMPILED, reason="compiled backend not built"
)


@pytest.fixture(autouse=True)
def restore_backend():
    yield
    backend.use("auto")


def _buchstab_problem():
    return dde.DelayProblem(
        power=1.0, delay=1.0, sign=1.0,
        initial=dde.InitialSegment.recip(1.0, 2.0),
    )


def _sigma_problem(k=2):
    import math

    a = (2.0 * EXP_GAMMA) ** (-k) / math.factorial(k)
    return dde.DelayProblem(
        power=float(-k), delay=2.0, sign=1.0,
        initial=dde.InitialSegment.power(a, k, 2.0),
    )


def test_pow_int_matches_pow():
    xs = np.linspace(0.5, 9.5, 11)
    for e in (-4, -1, 0, 1, 2, 5):
        got = pure.pow_int(xs.copy(), e)
        want = xs.astype(float) ** e
        assert np.allclose(got, want, rtol=1e-14)


def test_solve_deterministic():
    grid = dde.GridSpec(2.0, 12.0, 2.0 ** -10)
    t1 = dde.solve_dde(_buchstab_problem(), grid)
    t2 = dde.solve_dde(_buchstab_problem(), grid)
    assert np.array_equal(t1.values, t2.values)


@needs_compiled
def test_backends_bit_identical_self_delay():
    grid = dde.GridSpec(2.0, 16.0, 2.0 ** -10)
    backend.use("compiled")
    tc = dde.solve_dde(_buchstab_problem(), grid)
    backend.use("pure")
    tp = dde.solve_dde(_buchstab_problem(), grid)
    assert np.array_equal(tc.values, tp.values)

    sgrid = dde.GridSpec(2.0, 18.0, 2.0 ** -10)
    backend.use("compiled")
    sc = dde.solve_dde(_sigma_problem(), sgrid)
    backend.use("pure")
    sp = dde.solve_dde(_sigma_problem(), sgrid)
    assert np.array_equal(sc.values, sp.values)


@needs_compiled
def test_backends_bit_identical_queries():
    grid = dde.GridSpec(2.0, 12.0, 2.0 ** -10)
    table = dde.solve_dde(_buchstab_problem(), grid)
    q = np.linspace(1.0, 12.0, 5001)
    backend.use("compiled")
    a = table.query_many(q)
    backend.use("pure")
    b = table.query_many(q)
    assert np.array_equal(a, b)


@needs_compiled
def test_backends_bit_identical_coupled():
    from sievekit import dhr

    sig = dhr.sigma_table(2)
    results = {}
    for name in ("compiled", "pure"):
        backend.use(name)
        F, f = dhr._co_solve(2, 5.3577, 4.2664, sig, 20.0, 2.0 ** -10)
        results[name] = (F.values.copy(), f.values.copy())
    assert np.array_equal(results["compiled"][0], results["pure"][0])
    assert np.array_equal(results["compiled"][1], results["pure"][1])
