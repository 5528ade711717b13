import pytest

from sievekit import buchstab as _buchstab
from sievekit import dhr as _dhr
from sievekit.bound import BoundParams, BoundTables, compute_bound


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("sievekit-cache"))


@pytest.fixture(scope="session")
def pairs(cache_dir):
    """Calibrated DHR pairs for k = 1..4 (shared across the suite)."""
    return {k: _dhr.calibrate(k, cache_dir=cache_dir) for k in (1, 2, 3, 4)}


@pytest.fixture(scope="session")
def wtab(cache_dir):
    return _buchstab.get_buchstab(cache_dir=cache_dir)


@pytest.fixture(scope="session")
def tables3(cache_dir, pairs):
    return BoundTables(3, 16.0, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def tables2(cache_dir, pairs):
    return BoundTables(2, 16.0, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def headline(cache_dir, tables3):
    """The (k,u,v) = (3,2,12) report, reused by several tests."""
    return compute_bound(BoundParams(3, 2.0, 12.0), cache_dir=cache_dir,
                         tables=tables3)
