import numpy as np
import pytest
from hypothesis import settings

from wavinpaint._backend import BACKENDS
from wavinpaint.image_core import builtin_image

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def barbara():
    return builtin_image("barbara")


@pytest.fixture(scope="session")
def small_image():
    """64x64 textured crop, enough for 2-3 decomposition levels."""
    return builtin_image("barbara")[96:160, 32:96].copy()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if not REPORT:
        return
    outcomes = {}
    for key in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(key, []):
            if "test_acceptance" in rep.nodeid and rep.when in ("call", "setup"):
                outcomes[rep.nodeid.split("::")[-1]] = key.upper()
    terminalreporter.section("acceptance criteria")
    for name, outcome in outcomes.items():
        terminalreporter.write_line(f"{outcome:<8} {name}")
    terminalreporter.section("acceptance measurements")
    for crit in sorted(REPORT):
        for line in REPORT[crit]:
            terminalreporter.write_line(f"[{crit}] {line}")
