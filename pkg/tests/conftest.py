import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from padic_dendro.dendrogram import ProjectiveDendrogram  # noqa: E402
from padic_dendro.padic_core import FieldDescriptor, PAdicNumber  # noqa: E402

DATA = Path(__file__).resolve().parent.parent / "data"

GOLDEN8_VALUES = {"x1": 0, "x2": 2 ** 6, "x3": 2 ** 5, "x4": 2 ** 2, "x5": 2 ** 2 + 2 ** 4,
               "x6": 2 ** 2 + 2 ** 3, "x7": 1 + 2, "x8": 1}


def golden8_tree():
    """The eight-datum binary tree with edge lengths 2, 1, 3, 1, 1, 1 (hand-built)."""
    return ProjectiveDendrogram.build(
        "r",
        [("r", "A", 2), ("r", "B", 1), ("A", "C", 3), ("A", "D", 1), ("C", "E", 1), ("D", "F", 1)],
        [("E", "x1"), ("E", "x2"), ("C", "x3"), ("F", "x4"), ("F", "x5"), ("D", "x6"),
         ("B", "x7"), ("B", "x8")],
        {"r": ["A", "B"], "A": ["C", "D"], "C": ["E", "x3"], "E": ["x1", "x2"],
         "D": ["F", "x6"], "F": ["x4", "x5"], "B": ["x7", "x8"]},
    )


def golden8_points():
    fd = FieldDescriptor(2)
    return [(lab, PAdicNumber.from_int(fd, v)) for lab, v in GOLDEN8_VALUES.items()]


@pytest.fixture
def golden8():
    return golden8_tree()


@pytest.fixture
def data_dir():
    return DATA


# -- acceptance summary: one line per criterion ---------------------------------------

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    number = getattr(item.function, "criterion", None)
    if number is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        title = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _CRITERIA[number] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, verdict = _CRITERIA[number]
        terminalreporter.write_line(f"[{verdict}] criterion {number:2d}: {title}")
