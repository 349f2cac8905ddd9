import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stacktime import (
    EnumerationBudgetError,
    Environment,
    InvalidStatementError,
    Program,
    Statement,
    Task,
    Vocabulary,
    enumerate_correct_policies,
    extension,
    is_correct_policy,
    is_statement,
    language,
    truth_set,
)
from stacktime.theorems import random_vocabulary

from .conftest import brute_language, member_sets


@st.composite
def vocabularies(draw, max_env=6, max_vocab=5):
    size = draw(st.integers(1, max_env))
    env = Environment(size)
    masks = draw(st.lists(st.integers(0, 2**size - 1), unique=True, max_size=max_vocab))
    return Vocabulary(env, [Program(m, env) for m in masks])


class TestTruthSet:
    def test_empty_statement_is_whole_environment(self, abc):
        env, v = abc
        assert truth_set(Statement(), v) == env.full()

    def test_singleton(self, abc):
        env, v = abc
        assert truth_set(Statement.of(0), v) == v[0]

    def test_pair_meets_at_c(self, abc):
        env, v = abc
        assert truth_set(Statement.of(0, 1), v) == env.program(["c"])

    def test_bad_index(self, abc):
        _, v = abc
        with pytest.raises(InvalidStatementError):
            truth_set(Statement.of(2), v)


class TestIsStatement:
    def test_intersecting_pair(self, abc):
        assert is_statement({0, 1}, abc[1])

    def test_empty(self, abc):
        assert is_statement(set(), abc[1])

    def test_disjoint_pair(self):
        env = Environment.from_labels(["a", "b", "c"])
        v = Vocabulary.from_members(env, [["a"], ["b", "c"]])
        assert set(v[0].members) & set(v[1].members) == set()
        assert not is_statement({0, 1}, v)

    def test_out_of_range_is_false(self, abc):
        assert not is_statement({5}, abc[1])


class TestLanguage:
    def test_intersecting_pair(self, abc):
        env, v = abc
        expected = brute_language(member_sets(v), range(env.size))
        got = [s.ingredients for s in language(v)]
        assert set(got) == expected and len(got) == 4

    def test_disjoint_pair(self):
        env = Environment.from_labels(["a", "b", "c"])
        v = Vocabulary.from_members(env, [["a"], ["b", "c"]])
        got = [s.ingredients for s in language(v)]
        assert set(got) == brute_language(member_sets(v), range(3))
        assert len(got) == 3

    def test_empty_vocabulary(self, abc):
        env, _ = abc
        assert list(language(Vocabulary(env))) == [Statement()]

    def test_canonical_order(self, abc):
        _, v = abc
        assert list(language(v)) == [Statement(), Statement.of(0), Statement.of(1), Statement.of(0, 1)]

    def test_max_size(self, abc):
        _, v = abc
        assert all(len(s) <= 1 for s in language(v, max_size=1))

    def test_cap_is_a_hard_error(self):
        env = Environment(3)
        v = Vocabulary(env, [Program(m, env) for m in range(8)])
        with pytest.raises(EnumerationBudgetError, match="cap 4"):
            language(v, cap=4)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 6).flatmap(lambda s: st.tuples(
        st.just(s), st.lists(st.integers(0, 2**s - 1), unique=True, max_size=10))))
    def test_count_matches_subset_filter(self, case):
        size, masks = case
        env = Environment(size)
        v = Vocabulary(env, [Program(m, env) for m in masks])
        got = [s.ingredients for s in language(v)]
        assert len(got) == len(set(got))
        assert set(got) == brute_language(member_sets(v), range(size))


class TestExtension:
    def test_of_empty_is_language(self, abc):
        _, v = abc
        assert list(extension(Statement(), v)) == list(language(v))

    def test_of_maximal_is_itself(self, abc):
        _, v = abc
        assert list(extension(Statement.of(0, 1), v)) == [Statement.of(0, 1)]

    def test_of_singleton(self, abc):
        _, v = abc
        lang = brute_language(member_sets(v), range(3))
        expected = {s for s in lang if frozenset({0}) <= s}
        assert {s.ingredients for s in extension(Statement.of(0), v)} == expected == {
            frozenset({0}), frozenset({0, 1})}


class TestPolicies:
    @pytest.fixture
    def three(self):
        env = Environment.from_labels(["a", "b", "c", "d"])
        v = Vocabulary.from_members(env, [["a", "b"], ["b", "c"], ["b", "d"]])
        return env, v

    def test_self_consistent_task(self, three):
        _, v = three
        pi = Statement.of(1)
        inputs = {Statement.of(0)}
        outputs = set(extension(Statement.of(0), v)) & set(extension(pi, v))
        assert is_correct_policy(Task(inputs, outputs), pi, v)

    def test_missing_output_fails(self, three):
        _, v = three
        pi = Statement.of(1)
        outputs = set(extension(Statement.of(0), v)) & set(extension(pi, v))
        outputs.discard(max(outputs, key=Statement.sort_key))
        assert not is_correct_policy(Task({Statement.of(0)}, outputs), pi, v)

    def test_matches_brute_force(self, three):
        _, v = three
        lang = brute_language(member_sets(v), range(4))
        inputs = [frozenset({0}), frozenset({2})]
        ext_i = {s for s in lang if any(i <= s for i in inputs)}
        outputs = {s for s in ext_i if 1 in s}
        task = Task({Statement(i) for i in inputs}, {Statement(o) for o in outputs})
        for pi in lang:
            expected = {s for s in ext_i if pi <= s} == outputs
            assert is_correct_policy(task, Statement(pi), v) == expected

    def test_full_outputs_admit_empty_policy(self, three):
        _, v = three
        inputs = {Statement.of(0)}
        task = Task(inputs, set(extension(Statement.of(0), v)))
        assert Statement() in enumerate_correct_policies(task, v)

    def test_empty_outputs(self):
        env = Environment.from_labels(["a", "b", "c", "d"])
        v = Vocabulary.from_members(env, [["a", "b"], ["b", "c"], ["d"]])
        lang = brute_language(member_sets(v), range(4))
        task = Task({Statement.of(0)}, set())
        got = {p.ingredients for p in enumerate_correct_policies(task, v)}
        ext_i = {s for s in lang if 0 in s}
        expected = {pi for pi in lang if not any(pi <= s for s in ext_i)}
        assert got == expected and got

    def test_round_trip(self, three):
        _, v = three
        task = Task.derive({Statement.of(0), Statement.of(2)}, Statement.of(1), v)
        for pi in enumerate_correct_policies(task, v):
            assert is_correct_policy(task, pi, v)

    def test_task_check(self, three):
        _, v = three
        Task.derive({Statement.of(0)}, Statement.of(1), v).check(v)
        with pytest.raises(ValueError):
            Task({Statement.of(0)}, {Statement.of(1)}).check(v)

    def test_random_tasks_match_oracle(self):
        rng = random.Random(7)
        for _ in range(1000):
            env = Environment(rng.randint(1, 6))
            v = random_vocabulary(rng, env, 5)
            lang = sorted(brute_language(member_sets(v), range(env.size)), key=lambda s: (len(s), sorted(s)))
            inputs = rng.sample(lang, rng.randint(1, min(3, len(lang))))
            ext_i = {s for s in lang if any(i <= s for i in inputs)}
            outputs = {s for s in ext_i if rng.random() < 0.5}
            pi = rng.choice(lang)
            if rng.random() < 0.5:
                outputs = {s for s in ext_i if pi <= s}
            task = Task({Statement(i) for i in inputs}, {Statement(o) for o in outputs})
            expected = {s for s in ext_i if pi <= s} == outputs
            assert is_correct_policy(task, Statement(pi), v) == expected


@settings(max_examples=80, deadline=None)
@given(vocabularies(), st.data())
def test_truth_set_is_antitone(v, data):
    lang = list(language(v))
    l = data.draw(st.sampled_from(lang))
    for l2 in extension(l, v):
        assert truth_set(l2, v) <= truth_set(l, v)


@settings(max_examples=80, deadline=None)
@given(vocabularies(), st.data())
def test_extension_is_closed(v, data):
    l = data.draw(st.sampled_from(list(language(v))))
    ext = set(extension(l, v))
    for l2 in ext:
        assert set(extension(l2, v)) <= ext


def test_vocabulary_rejects_duplicates(abc):
    env, _ = abc
    with pytest.raises(ValueError, match="duplicate"):
        Vocabulary.from_members(env, [["a"], ["a"]])


def test_vocabulary_order_is_canonical():
    env = Environment.from_labels(["a", "b", "c"])
    v = Vocabulary.from_members(env, [["b", "c"], ["c"], ["a", "c"], ["a"]])
    assert [p.labels() for p in v] == [["a"], ["c"], ["a", "c"], ["b", "c"]]
    assert v == Vocabulary.from_members(env, [["a"], ["a", "c"], ["c"], ["b", "c"]])


def test_program_equality_is_extensional(abc):
    env, _ = abc
    assert env.program(["a", "c"]) == env.program([2, 0])
    assert hash(env.program(["a", "c"])) == hash(env.program(["c", "a"]))


def test_environment_validation():
    with pytest.raises(ValueError):
        Environment(0)
    with pytest.raises(ValueError):
        Environment(2, ("a", "a"))
