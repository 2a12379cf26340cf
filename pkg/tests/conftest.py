import pytest

from quditcorr.sampling import substream


@pytest.fixture
def rng(request):
    # one independent stream per test, stable across runs
    return substream(20241017, request.node.nodeid)



# acceptance criteria report: one PASS/FAIL line per criterion in the terminal summary
_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    report = outcome.get_result()
    if report.when != "call" and not report.failed:
        return
    number, title = marker.args
    detail = getattr(item, "acceptance_detail", "")
    status = "PASS" if report.passed else "FAIL"
    lines = item.config.stash[_ACCEPTANCE_KEY]
    if status == "FAIL" or number not in lines:
        lines[number] = f"[{status}] {number:>2}. {title}" + (f": {detail}" if detail else "")


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])


@pytest.fixture
def detail(request):
    """Attach a one-line measurement summary to the acceptance report."""

    def set_detail(text: str) -> None:
        request.node.acceptance_detail = text
        print(text)

    return set_detail
