from pathlib import Path

import pytest

from trustwalk.data import Dataset, RatingScale, RatingTable, SocialGraph

GOLDEN = Path(__file__).parent / "golden"

USER_X_ITEMS = (27, 33, 115, 178, 203, 240, 259, 307, 333, 377)
USER_X_RATINGS = (3, 4, 2, 4, 5, 5, 4, 3, 4, 3)


@pytest.fixture
def write(tmp_path):
    """Write text to a file under tmp_path and return its path."""

    def _write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


def make_dataset(triples, edges=(), directed=False, scale=None, name="test"):
    ratings = RatingTable.from_triples(triples, scale or RatingScale())
    return Dataset(ratings, SocialGraph.from_edges(edges, directed=directed), name)


@pytest.fixture
def tiny():
    """Three users on a friendship path 1-2-3 with two co-rated items."""
    triples = [(1, 10, 4), (1, 11, 2), (2, 10, 5), (2, 11, 3), (3, 10, 1), (3, 11, 5)]
    return make_dataset(triples, [(1, 2), (2, 3)], name="tiny")


@pytest.fixture
def tiny_files(tmp_path):
    ratings = tmp_path / "ratings.txt"
    social = tmp_path / "social.txt"
    ratings.write_text("1 10 4\n1 11 2\n2 10 5\n2 11 3\n3 10 1\n3 11 5\n")
    social.write_text("1 2\n2 3\n")
    return ratings, social


# acceptance results, one line per criterion, shown after the test summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
