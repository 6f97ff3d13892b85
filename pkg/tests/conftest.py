import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

DATA = os.path.join(os.path.dirname(__file__), "data")


def data_path(name: str) -> str:
    return os.path.join(DATA, name)


def read(name: str) -> str:
    with open(data_path(name)) as fh:
        return fh.read()


@pytest.fixture(scope="session")
def fib_model():
    from underverify.extractor import extract_source

    return extract_source(read("fib.c"))


@pytest.fixture(scope="session")
def fib_norm(fib_model):
    from underverify.absir import normalize

    return normalize(fib_model)


@pytest.fixture(scope="session")
def two_results_norm():
    from underverify.absir import normalize
    from underverify.extractor import extract_source

    return normalize(extract_source(read("two_results.c")))


@pytest.fixture(scope="session")
def global_effect_norm():
    from underverify.absir import normalize
    from underverify.extractor import extract_source

    return normalize(extract_source(read("global_effect.c")))


@pytest.fixture(scope="session")
def fold_norm():
    from underverify.absir import normalize, parse_model

    return normalize(parse_model(read("fold.abs")))


_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criteria")
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marks = getattr(report, "criterion", None)
    if marks is not None:
        _ACCEPTANCE[marks[0]] = (marks[1], report.outcome, report.duration)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = tuple(m.args)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        title, outcome, dur = _ACCEPTANCE[num]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {status}  {title} ({dur:.1f} s)")
