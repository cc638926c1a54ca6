import numpy as np
import pytest

from chiralmag import GridSpec, PhysicalParams, nondimensionalize


@pytest.fixture(scope="session")
def fege():
    return nondimensionalize(PhysicalParams.fege())


@pytest.fixture(scope="session")
def fege_grid():
    return GridSpec.from_physical((80, 80, 6), 2)


def random_unit(shape, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((3, *shape))
    return v / np.linalg.norm(v, axis=0)


def random_tangent(m, seed=1):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(m.shape)
    return v - np.einsum("c...,c...->...", v, m) * m


# ---- acceptance summary ---------------------------------------------------------------

_CRITERIA = []


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _CRITERIA.append((props["criterion"], report.outcome, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in sorted(_CRITERIA, key=lambda c: int(c[0].split()[0])):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {name}: {verdict}  {detail}")
