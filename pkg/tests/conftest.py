import pytest

from gmwb.market import scenario_2021, scenario_2022, scenario_gmz
from gmwb.mortality import ssa_male

# criterion name -> list of (test id, passed, detail)
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion checked by this test")
    config.addinivalue_line("markers", "slow: long-running test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        detail = dict(item.user_properties).get("detail", "")
        _CRITERIA.setdefault(mark.args[0], []).append((item.name, rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for name, results in _CRITERIA.items():
        ok = all(p for _, p, _ in results)
        failed = [f"{t}: {d}" if d else t for t, p, d in results if not p]
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        if failed:
            line += "  [" + "; ".join(failed) + "]"
        tr.write_line(line)


@pytest.fixture(scope="session")
def m2021():
    return scenario_2021()


@pytest.fixture(scope="session")
def m2022():
    return scenario_2022()


@pytest.fixture(scope="session")
def mgmz():
    return scenario_gmz()


@pytest.fixture(scope="session")
def ssa():
    return ssa_male()
