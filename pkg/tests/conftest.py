from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

import time

import pytest

from logtauber import RunConfig, run_suite

HORIZONS_E32 = (4.0, 8.0, 16.0, 32.0)
HORIZONS_E64 = (8.0, 16.0, 32.0, 64.0)


def _timed_suite(horizons):
    start = time.perf_counter()
    report = run_suite(RunConfig(log_horizons=horizons))
    report.elapsed = time.perf_counter() - start
    return report


@pytest.fixture(scope="session")
def suite_e32():
    return _timed_suite(HORIZONS_E32)


@pytest.fixture(scope="session")
def suite_e64():
    return _timed_suite(HORIZONS_E64)
