import pytest

from arma_predict import battery
from arma_predict.pipeline import prepare


@pytest.fixture(scope="session")
def models():
    """Prepared battery models keyed by name, plus the AR(1) model."""
    out = {name: prepare(h, name=name) for name, h in battery.battery()}
    out["ar1"] = prepare(battery.ar1(), name="ar1")
    return out


@pytest.fixture(scope="session")
def ma1(models):
    return models["ma1"]


@pytest.fixture(scope="session")
def bivariate(models):
    return models["lower_triangular"]


@pytest.fixture(scope="session")
def arma_m0(models):
    return models["arma_m0_1"]


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_report():
    """Record the one-line verdict of an acceptance criterion."""

    def record(k, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {k}: {detail}"
        ACCEPTANCE_LINES[k] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
