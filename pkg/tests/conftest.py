import pytest


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="also run checks marked slow (tens of minutes)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow: pass --runslow to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in range(1, 12):
        checks = RESULTS.get(k)
        if not checks:
            tr.write_line(f"CRITERION {k:2d}: NOT RUN (skipped or deselected)")
            continue
        status = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        detail = "; ".join(f"{sub + ': ' if sub else ''}{'ok' if ok else 'FAILED'} {d}"
                           for sub, ok, d in checks)
        tr.write_line(f"CRITERION {k:2d}: {status}  {detail}")
