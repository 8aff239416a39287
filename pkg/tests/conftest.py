import numpy as np
import pytest

from rectri import Side


def fortran(a, dtype=np.float64):
    return np.array(a, dtype=dtype, order="F", ndmin=2)


def well_conditioned(n, rng, dtype=np.float64):
    """Triangular test matrix that stays well conditioned with either diag rule.

    Off-diagonal row sums stay below 1 (dominant even under a unit diagonal);
    the stored diagonal is at least n times the largest off-diagonal entry.
    """
    A = rng.uniform(-1, 1, (n, n)) / max(n, 1)
    signs = rng.choice([-1.0, 1.0], n)
    A[np.diag_indices(n)] = signs * (1.0 + rng.uniform(0, 1, n))
    return fortran(A, dtype)


def rhs(spec, n, m, rng, dtype=np.float64):
    shape = (n, m) if spec.side is Side.LEFT else (m, n)
    return fortran(rng.uniform(-1, 1, shape), dtype)


def ulp(dtype):
    return float(np.finfo(dtype).eps)


@pytest.fixture
def rng():
    return np.random.default_rng(20250207)


_acceptance = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        notes = dict(report.user_properties).get("measured", "")
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome, notes))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, notes in _acceptance:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}" + (f"  ({notes})" if notes else ""))
