import pytest

from p2pmatch.demand import make_driver, make_request
from p2pmatch.network import line_network, travel_matrix


@pytest.fixture
def line5():
    return line_network(5)


@pytest.fixture
def line5_matrix(line5):
    return travel_matrix(line5, line5.ids)


@pytest.fixture
def line5_case(line5, line5_matrix):
    """Driver n0->n4 (capacity 2), r1 n1->n3 at 120 s, r2 n2->n4 at 240 s, r3 n3->n1."""
    m = line5_matrix
    driver = make_driver("v1", "n0", "n4", 0, 2, m)
    r1 = make_request("r1", "n1", "n3", 120, m)
    r2 = make_request("r2", "n2", "n4", 240, m)
    r3 = make_request("r3", "n3", "n1", 0, m)
    return driver, r1, r2, r3


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record (and print) one acceptance line: ``report(n, ok, detail)``."""
    def _report(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append((n, line))
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
