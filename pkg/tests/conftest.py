import pytest

from hecke_density import sources

_CRITERIA = []


@pytest.fixture(scope="session")
def tau30k():
    return sources.tau_sequence(30000)


@pytest.fixture(scope="session")
def sato_tate_1e6():
    return sources.sample_sato_tate(10**6, seed=0)


@pytest.fixture(scope="session")
def dihedral_1e6():
    return sources.sample_dihedral(10**6, seed=0)


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts on its own."""

    def record(number, name, passed, detail=""):
        _CRITERIA.append((number, name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] {number:>2}. {name}: {detail}")
