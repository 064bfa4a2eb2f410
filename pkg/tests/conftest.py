import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion and assert it."""

    def record(label: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_trig_factor(rng, n: int = 256, degree: int = 5, amplitude: float = 0.5):
    """Real trig polynomial with coefficients uniform in amplitude/k."""
    th = 2.0 * np.pi * np.arange(n) / n
    k = np.arange(1, degree + 1)
    a = rng.uniform(-1, 1, degree) * amplitude / k
    b = rng.uniform(-1, 1, degree) * amplitude / k
    return np.cos(np.outer(th, k)) @ a + np.sin(np.outer(th, k)) @ b


@pytest.fixture
def trig_factor():
    return random_trig_factor
