import pytest
from hypothesis import HealthCheck, settings

from cubebound import AggregateConfig, RangeJob, factor_range, final_constants, mertens_check
from cubebound.empirical import sieve_primes

from oracles import cubic_roots_enumerate

settings.register_profile(
    "suite",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def default_report():
    """Full pipeline at the reference configuration; shared by many tests."""
    return final_constants(AggregateConfig(), jobs=2)


@pytest.fixture(scope="session")
def mertens_1e6():
    return mertens_check(10**6, checkpoints=[10**3, 10**4, 10**5, 10**6])


@pytest.fixture(scope="session")
def roots_enum_1e5():
    """Enumerated roots of n^3+2 == 0 (mod p) for every prime p <= 1e5
    (independent oracle; nu(p) is the length of each entry)."""
    return {p: cubic_roots_enumerate(p) for p in sieve_primes(10**5)}


@pytest.fixture(scope="session")
def profiles_1e5():
    """Exact factorisations of n^3+2 for 1 <= n <= 1e5."""
    job = RangeJob(x_min=0, x_max=10**5, threshold=2, h=0)
    return list(factor_range(job))
