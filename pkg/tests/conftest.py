import pytest

from xisb.density import CriticalLineTable, SizeBiasedDist
from xisb.heatflow import HeatKernelProfile
from xisb.suites import SuiteContext

# criterion number -> {"text": ..., "outcomes": [(nodeid, passed, detail)]}
_CRITERIA: dict = {}
_DETAILS: dict = {}


@pytest.fixture(scope="session")
def table():
    return CriticalLineTable.build(60.0, 0.05)


@pytest.fixture(scope="session")
def table100():
    return CriticalLineTable.build(100.0, 0.05)


@pytest.fixture(scope="session")
def ctx(table):
    return SuiteContext(table)


@pytest.fixture(scope="session")
def dists(ctx):
    return {k: ctx.dist(k) for k in (1, 2, 3, 4)}


@pytest.fixture(scope="session")
def profile1(ctx):
    return ctx.profile(1)


@pytest.fixture(scope="session")
def profile2(ctx):
    return ctx.profile(2)


@pytest.fixture
def measured(request):
    """Attach a one-line measurement to the acceptance summary."""
    def note(text):
        _DETAILS[request.node.nodeid] = str(text)
        print(text)
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    number, text = marker.args
    entry = _CRITERIA.setdefault(number, {"text": text, "outcomes": []})
    entry["outcomes"].append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        ok = all(p for _, p in entry["outcomes"])
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] #{number} {entry['text']}")
        for name, passed in entry["outcomes"]:
            detail = next((v for k, v in _DETAILS.items() if k.endswith("::" + name)), "")
            tr.write_line(f"        {'ok  ' if passed else 'FAIL'} {name}: {detail}")
