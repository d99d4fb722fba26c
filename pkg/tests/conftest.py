import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_density(d, rng, rank=None):
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(d, rng):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ---- acceptance reporting: one pass/fail line per criterion ----

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, title = mark.args
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "failed": [], "xfailed": [], "ran": 0})
    if rep.when == "call":
        entry["ran"] += 1
    if hasattr(rep, "wasxfail"):
        entry["xfailed"].append(f"{item.name}: {rep.wasxfail}")
    elif rep.failed:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[number]
        bad = e["failed"] + e["xfailed"]
        status = "FAIL" if bad else "PASS"
        tr.write_line(f"criterion {number} [{status}] {e['title']} ({e['ran']} checks)")
        for b in bad:
            tr.write_line(f"    failing: {b}")
