import numpy as np
import pytest

from trunctail.tpot import ExceedanceSet

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def make_exc(values, n, threshold=0.0):
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    return ExceedanceSet(values=v, k=v.size, n=n, threshold=float(threshold))


@pytest.fixture
def worked_fit():
    """xi = tau = 1 with E_1 = 4, so the fitted tail ratio is 1/5; k = 10, n = 100, threshold 5."""
    from trunctail.tpot import TailFit

    exc = make_exc([4.0, 3.0, 2.5, 2.0, 1.5, 1.0, 0.7, 0.4, 0.2, 0.0], n=100, threshold=5.0)
    return TailFit.from_parameters(1.0, exc, tau=1.0)


def pytest_collection_modifyitems(items):
    for item in items:
        if "study_r200" in getattr(item, "fixturenames", ()):
            item.add_marker(pytest.mark.slow)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {key}: {detail}")


@pytest.fixture(scope="session")
def study_r200():
    """Desk-scale study: 4 parents x 3 levels, R = 200, n = 500, k = 200..400 step 50."""
    from trunctail.study import StudyConfig, run_study

    return run_study(StudyConfig(replications=200, k_grid=(200, 250, 300, 350, 400), seed=2017))
