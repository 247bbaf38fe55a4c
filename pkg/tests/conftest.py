import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from informed_relay import ChannelParams

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# verdict lines collected by the acceptance tests, printed after the run
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_channel(rng: np.random.Generator, degraded: bool = False, **fixed) -> ChannelParams:
    """Log-uniform powers and noises in [0.1, 100]; degraded draws keep N3 >= N2."""
    v = dict(zip(("p1", "p2", "q", "n2", "n3"), 10 ** rng.uniform(-1, 2, 5)))
    if degraded and v["n3"] < v["n2"]:
        v["n2"], v["n3"] = v["n3"], v["n2"]
    v.update(fixed)
    return ChannelParams(**v, degraded=degraded)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def acceptance():
    return ACCEPTANCE
