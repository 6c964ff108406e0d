import numpy as np
import pytest

from mobknot.curve import circle, ellipse, evaluate, perturbed_circle, torus_knot


@pytest.fixture(scope="session")
def circle_knot():
    return evaluate(circle())


@pytest.fixture(scope="session")
def ellipse_knot():
    return evaluate(ellipse())


@pytest.fixture(scope="session")
def torus():
    return evaluate(torus_knot())


@pytest.fixture(scope="session")
def wobbly():
    return evaluate(perturbed_circle(0.2, 3, "radial"))


@pytest.fixture(scope="session")
def offset_ellipse():
    """Ellipse moved well away from the origin (for inversion identities)."""
    return evaluate(ellipse(center=(3.0, 0.5, 0.4)))


@pytest.fixture(scope="session")
def presets(ellipse_knot, torus, wobbly):
    return {"ellipse": ellipse_knot, "torus": torus, "wobbly": wobbly}


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one acceptance line: verdict(number, title, ok, detail)."""
    def record(number, title, ok, detail):
        line = "criterion %2d %-28s %s  %s" % (number, title, "PASS" if ok else "FAIL", detail)
        ACCEPTANCE.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
