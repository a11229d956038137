import pytest
from hypothesis import strategies as st

from nambu_graphs.graphs import MicroGraph


@st.composite
def micro_graphs(draw, d=st.sampled_from([3, 4]), m=st.integers(1, 2), n=st.integers(1, 3)):
    """Well-formed micro-graphs: own Casimirs present once, remaining slots arbitrary."""
    d, m, n = draw(d), draw(m), draw(n)
    if d == 4:
        n = min(n, 2)
    total = m + (d - 1) * n
    targets = []
    for i in range(n):
        own = [m + i + k * n for k in range(1, d - 1)]
        free = [draw(st.integers(0, total - 1).filter(lambda x, own=own: x not in own)) for _ in range(2)]
        slots = draw(st.permutations(free + own))
        targets.append(tuple(slots))
    return MicroGraph(d, m, n, tuple(targets))


@pytest.fixture(scope="session")
def van3():
    from nambu_graphs.experiments import vanishing_catalogue

    return vanishing_catalogue(3)


@pytest.fixture(scope="session")
def van4():
    from nambu_graphs.experiments import vanishing_catalogue

    return vanishing_catalogue(4)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
