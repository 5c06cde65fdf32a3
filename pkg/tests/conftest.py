import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@pytest.fixture
def table4_rows():
    from gammaprime.cli import read_summaries
    from importlib import resources

    with (resources.files("gammaprime") / "data" / "table4_dietary.csv").open() as fh:
        return read_summaries(fh)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
