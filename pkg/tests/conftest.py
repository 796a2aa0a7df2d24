import warnings

import pytest

from robinspec.geometry import ParametricCurve, arc_length_reparam, localize_max


def _site(curve):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return localize_max(arc_length_reparam(curve, 1024), site=0)


@pytest.fixture(scope="session")
def ellipse_site():
    return _site(ParametricCurve.ellipse(2.0, 1.0))


@pytest.fixture(scope="session")
def egg_site():
    return _site(ParametricCurve.egg())


@pytest.fixture(scope="session")
def ellipse_profile():
    return arc_length_reparam(ParametricCurve.ellipse(2.0, 1.0), 1024)


_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    def log(criterion, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
