import itertools
from functools import reduce

import pytest

from stacktime import Environment, Vocabulary


def brute_language(sets, universe):
    """Every index subset whose member sets share a state (or is empty)."""
    out = set()
    for k in range(len(sets) + 1):
        for combo in itertools.combinations(range(len(sets)), k):
            if not combo or reduce(lambda a, b: a & b, (sets[i] for i in combo), set(universe)):
                out.add(frozenset(combo))
    return out


def member_sets(v):
    return [set(p.members) for p in v]


@pytest.fixture
def abc():
    """The three-state example: p = {a, c}, q = {b, c}."""
    env = Environment.from_labels(["a", "b", "c"])
    v = Vocabulary.from_members(env, [["a", "c"], ["b", "c"]])
    return env, v


_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        ok = rep.passed and _CRITERIA.get(number, (title, True))[1]
        _CRITERIA[number] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
