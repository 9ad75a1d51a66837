import os

import pytest


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the long K_n searches")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow") or os.environ.get("BNQUANT_SLOW"):
        return
    skip = pytest.mark.skip(reason="slow; pass --runslow or set BNQUANT_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Call ``criterion(label, ok, detail)`` once per acceptance criterion."""

    def record(label: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'} {label}" + (f": {detail}" if detail else "")
        _CRITERIA.append((label, ok, line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in _CRITERIA:
        terminalreporter.write_line(line)
