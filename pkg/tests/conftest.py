import numpy as np
import pytest

from nordenlift.spaceform import SpaceForm


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[(2, 1.0), (3, 1.0), (2, -1.0), (3, 0.0)], ids=lambda p: f"n{p[0]}c{p[1]:+g}")
def space_form(request):
    n, c = request.param
    return SpaceForm(n, c)


def central_difference(f, t, h=1e-6):
    return (f(t + h) - f(t - h)) / (2 * h)


# acceptance criteria report ------------------------------------------------

ACCEPTANCE = {}


def record(number, passed, detail):
    """Print one criterion line and keep it for the terminal summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE.setdefault(number, []).append((passed, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        for _, line in ACCEPTANCE[number]:
            terminalreporter.write_line(line)
    bad = [n for n in sorted(ACCEPTANCE) if not all(ok for ok, _ in ACCEPTANCE[n])]
    terminalreporter.write_line(f"criteria failing: {', '.join(map(str, bad)) if bad else 'none'}")
