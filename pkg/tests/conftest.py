import pytest

from propalloc.instance import Instance, LeftNode, RightNode

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def report():
    """Record one acceptance line: report(name, ok, detail)."""

    def _record(name: str, ok: bool, detail: str = "") -> None:
        _CRITERIA.append((name, ok, detail))
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def k22_weighted() -> Instance:
    """K_{2,2} with supplies (1, 2) and capacities (1, 2)."""
    return Instance(
        (LeftNode("i1", 1), LeftNode("i2", 2)),
        (RightNode("j1", 1), RightNode("j2", 2)),
        (("i1", "j1"), ("i1", "j2"), ("i2", "j1"), ("i2", "j2")),
    )


@pytest.fixture
def star() -> Instance:
    """Two unit left nodes sharing one right node of capacity 2."""
    return Instance(
        (LeftNode("i1", 1), LeftNode("i2", 1)),
        (RightNode("j1", 2),),
        (("i1", "j1"), ("i2", "j1")),
    )
