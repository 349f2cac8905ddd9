import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stacktime import (
    ClaimBoundsError,
    ContributorModel,
    Environment,
    PhenClaim,
    Scheduler,
    StackState,
    Statement,
    Task,
    TheoremViolationError,
    Trajectory,
    build_contributor_env,
    build_stack,
    capacity_experiment,
    gap_report,
    language,
    simulate,
    w_co,
    w_ing,
)
from stacktime.gap import (
    ARPEGGIO_COINST,
    ARPEGGIO_SMEARED,
    ARPEGGIO_VIOLATION,
    CHORD_CONSISTENT,
    CHORD_VIOLATION,
    activation_sets,
    arpeggio_check,
    chord_check,
    verify_report,
)
from stacktime.theorems import random_trajectory, random_vocabulary


def brute_w(l, v, states, joint):
    """Least horizon by direct set scans over every window, or None."""
    sets = [set(v[i].members) for i in l]
    T = len(states)
    for d in range(T):
        for t in range(T - d):
            win = states[t:t + d + 1]
            if joint:
                if any(all(s in m for m in sets) for s in win):
                    return d
            elif all(any(s in m for s in win) for m in sets):
                return d
    return None


class TestHorizons:
    def test_three_state_example(self, abc):
        env, v = abc
        tau = Trajectory(("a", "b", "a", "b"), env)
        l = Statement.of(0, 1)
        assert w_ing(l, v, tau) == 1
        assert w_co(l, v, tau) is None

    def test_joint_state_reached(self, abc):
        env, v = abc
        tau = Trajectory(("a", "b", "a", "c"), env)
        l = Statement.of(0, 1)
        assert w_ing(l, v, tau) == 0 and w_co(l, v, tau) == 0

    def test_delta_max_truncates(self, abc):
        env, v = abc
        tau = Trajectory(("a", "c", "a", "b"), env)
        l = Statement.of(1)
        assert w_ing(l, v, tau) == 0
        tau2 = Trajectory(("a", "c", "a"), env)
        assert w_co(Statement.of(0, 1), v, tau2, delta_max=0) == 0

    def test_unbounded_at_horizon(self, abc):
        env, v = abc
        tau = Trajectory(("a", "b", "a", "b"), env)
        assert w_ing(Statement.of(0, 1), v, tau, delta_max=0) is None

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_match_brute_force(self, seed):
        rng = random.Random(seed)
        env = Environment(rng.randint(2, 6))
        v = random_vocabulary(rng, env, 5)
        l = rng.choice(list(language(v)))
        tau = random_trajectory(rng, env, rng.randint(1, 12))
        wi, wc = w_ing(l, v, tau), w_co(l, v, tau)
        assert wi == brute_w(l, v, tau.states, joint=False)
        assert wc == brute_w(l, v, tau.states, joint=True)
        # Co-instantiation implies occurrence, so the joint horizon is never smaller.
        if wc is not None:
            assert wi is not None and wi <= wc


class TestGapReport:
    def test_witnesses_replay(self, abc):
        env, v = abc
        stack = StackState((v,))
        tau = Trajectory(("a", "b", "a", "c"), env)
        for l in language(v):
            r = gap_report(stack, l, tau)
            assert verify_report(r, v, tau)

    def test_strict_gap(self, abc):
        env, v = abc
        tau = Trajectory(("a", "b", "a", "b"), env)
        r = gap_report(StackState((v,)), Statement.of(0, 1), tau)
        assert r.strict_gap and r.horizon == 3
        d = r.to_dict(v)
        assert d["w_co"] is None and d["occur_witness"]["delta"] == 1
        assert d["content_programs"] == [["a", "c"], ["b", "c"]]

    def test_no_gap_when_equal(self, abc):
        env, v = abc
        tau = Trajectory(("c", "a"), env)
        r = gap_report(StackState((v,)), Statement.of(0, 1), tau)
        assert not r.strict_gap and r.w_ing == r.w_co == 0

    def test_through_a_stack(self, abc):
        env, v = abc
        pi = Statement.of(0)
        stack = build_stack(v, [(Task.derive([Statement()], pi, v), pi)])
        tau = Trajectory(("a", "b", "c"), env)
        l = stack.top.statement_of([env.program(["c"])])
        r = gap_report(stack, l, tau)
        assert r.content == Statement.of(0, 1)
        assert (r.w_ing, r.w_co) == (0, 0)
        assert verify_report(r, v, tau)

    def test_tampered_report_fails(self, abc):
        env, v = abc
        tau = Trajectory(("a", "b", "a", "b"), env)
        r = gap_report(StackState((v,)), Statement.of(0, 1), tau)
        from dataclasses import replace
        assert not verify_report(replace(r, w_co=0), v, tau)


@pytest.fixture
def witness_stack(abc):
    env, v = abc
    return env, v, StackState((v,))


class TestClaims:
    def test_smeared_window(self, witness_stack):
        env, v, stack = witness_stack
        tau = Trajectory(("a", "b", "c"), env)
        claim = PhenClaim(Statement.of(0, 1), 0, 1, "smeared")
        (c,) = chord_check([claim], stack, tau)
        (a,) = arpeggio_check([claim], stack, tau)
        assert c.verdict == CHORD_VIOLATION and not c.consistent and c.witness is None
        assert a.verdict == ARPEGGIO_SMEARED and a.consistent
        assert a.ingredient_masks == {0: (True, False), 1: (False, True)}

    def test_joint_window(self, witness_stack):
        env, v, stack = witness_stack
        tau = Trajectory(("a", "b", "c"), env)
        claim = PhenClaim(Statement.of(0, 1), 1, 1)
        (c,) = chord_check([claim], stack, tau)
        (a,) = arpeggio_check([claim], stack, tau)
        assert c.verdict == CHORD_CONSISTENT and c.witness.u == 2
        assert c.truth_mask == (False, True)
        assert a.verdict == ARPEGGIO_COINST

    def test_deleted_activation_violates_arpeggio(self, witness_stack):
        env, v, stack = witness_stack
        claim = PhenClaim(Statement.of(0, 1), 1, 0)
        tau = Trajectory(("a", "c", "a"), env)
        assert arpeggio_check([claim], stack, tau)[0].verdict == ARPEGGIO_COINST
        # Replace the joint state with one where p no longer holds.
        tau_deleted = Trajectory(("a", "b", "a"), env)
        (a,) = arpeggio_check([claim], stack, tau_deleted)
        assert a.verdict == ARPEGGIO_VIOLATION and a.ingredient_masks[0] == (False,)
        assert chord_check([claim], stack, tau_deleted)[0].verdict == CHORD_VIOLATION

    @pytest.mark.parametrize("t, delta", [(2, 1), (-1, 0), (0, 5)])
    def test_out_of_bounds(self, witness_stack, t, delta):
        env, _, stack = witness_stack
        tau = Trajectory(("a", "b", "c"), env)
        with pytest.raises(ClaimBoundsError):
            chord_check([PhenClaim(Statement.of(0), t, delta)], stack, tau)
        with pytest.raises(ClaimBoundsError):
            arpeggio_check([PhenClaim(Statement.of(0), t, delta)], stack, tau)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_chord_implies_arpeggio(self, seed):
        rng = random.Random(seed)
        env = Environment(rng.randint(2, 5))
        v = random_vocabulary(rng, env, 4)
        stack = StackState((v,))
        tau = random_trajectory(rng, env, rng.randint(1, 8))
        d = rng.randint(0, len(tau) - 1)
        t = rng.randint(0, len(tau) - 1 - d)
        claim = PhenClaim(rng.choice(list(language(v))), t, d)
        c, = chord_check([claim], stack, tau)
        a, = arpeggio_check([claim], stack, tau)
        if c.consistent:
            assert a.verdict == ARPEGGIO_COINST
        assert (a.verdict == ARPEGGIO_COINST) == c.consistent


class TestContributorEnv:
    @pytest.mark.parametrize("n, size, states, truth", [(2, 1, 4, 1), (3, 2, 16, 2), (4, 3, 48, 3)])
    def test_counts(self, n, size, states, truth):
        from stacktime import truth_set
        m = ContributorModel(n, data_size=size)
        env, v, ln = build_contributor_env(m)
        assert env.size == states
        assert len(truth_set(ln, v)) == truth
        for i in range(1, n + 1):
            assert len(v[i - 1]) == size * 2 ** (n - 1)
            assert all(i in m.decode(s)[1] for s in v[i - 1].members)

    def test_labels(self):
        m = ContributorModel(2)
        assert m.label(m.state(1, [2])) == "1:{2}"
        assert m.decode(m.state(1, [1, 2])) == (1, frozenset({1, 2}))

    def test_cap(self):
        from stacktime import EnumerationBudgetError
        with pytest.raises(EnumerationBudgetError):
            build_contributor_env(ContributorModel(5), cap=16)

    @pytest.mark.parametrize("kw", [dict(n=1), dict(n=2, capacity=3), dict(n=2, capacity=0), dict(n=2, data_size=0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ContributorModel(**kw)


class TestSimulate:
    def test_round_robin(self):
        m = ContributorModel(2, capacity=1)
        tau = simulate(m, Scheduler(), 4)
        assert activation_sets(m, tau) == [frozenset({1}), frozenset({2})] * 2

    def test_round_robin_blocks(self):
        m = ContributorModel(3, capacity=2)
        acts = Scheduler().activations(3, 2, 4)
        assert acts == [frozenset({1, 2}), frozenset({3})] * 2
        assert len(simulate(m, Scheduler(), 4)) == 4

    @pytest.mark.parametrize("kind", ["uniform-random", "bursty"])
    def test_capacity_respected(self, kind):
        for c in (1, 2, 3):
            m = ContributorModel(3, capacity=c)
            tau = simulate(m, Scheduler(kind, seed=9, burst_length=3), 50)
            assert all(len(a) <= c for a in activation_sets(m, tau))

    def test_seeded_reproducible(self):
        m = ContributorModel(3, capacity=2)
        s = Scheduler("uniform-random", seed=42)
        assert simulate(m, s, 30) == simulate(m, s, 30)

    def test_bursts_repeat(self):
        acts = Scheduler("bursty", seed=1, burst_length=4).activations(3, 2, 12)
        for k in range(0, 12, 4):
            assert len(set(acts[k:k + 4])) == 1

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            Scheduler("lottery")
        with pytest.raises(ValueError):
            simulate(ContributorModel(2), Scheduler(), 0)


class TestCapacity:
    def test_sequential_pair(self):
        rec = capacity_experiment(ContributorModel(2, capacity=1), Scheduler(), 10)
        assert rec.w_ing == 1 and rec.w_co is None and rec.gap.strict_gap
        assert rec.theorem_checked and rec.co_inst_windows == 0

    def test_synchronous_pair(self):
        rec = capacity_experiment(ContributorModel(2, capacity=2), Scheduler(), 10)
        assert rec.w_ing == rec.w_co == 0
        assert not rec.theorem_checked

    def test_single_step(self):
        rec = capacity_experiment(ContributorModel(3, capacity=1), Scheduler(), 1, delta_max=5)
        assert rec.delta_max == 0 and rec.w_ing is None

    def test_round_robin_gap_width(self):
        for n in (2, 3, 4):
            rec = capacity_experiment(ContributorModel(n, capacity=1), Scheduler(), 3 * n)
            assert rec.w_ing == n - 1 and rec.w_co is None

    def test_to_dict(self):
        d = capacity_experiment(ContributorModel(2), Scheduler(), 4).to_dict()
        assert d["activations"] == [[1], [2], [1], [2]]
        assert d["scheduler"] == {"kind": "round-robin", "seed": 0}

    def test_over_capacity_scheduler_is_caught(self, monkeypatch):
        m = ContributorModel(2, capacity=1)
        monkeypatch.setattr(Scheduler, "activations", lambda self, n, c, steps: [frozenset({1, 2})] * steps)
        with pytest.raises(TheoremViolationError):
            simulate(m, Scheduler(), 3)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 4), st.integers(1, 4), st.sampled_from(["round-robin", "uniform-random", "bursty"]),
           st.integers(0, 2**32), st.integers(1, 30))
    def test_threshold(self, n, c, kind, seed, steps):
        c = min(c, n)
        rec = capacity_experiment(ContributorModel(n, capacity=c), Scheduler(kind, seed, 2), steps)
        if c < n:
            assert rec.w_co is None
        assert rec.occurs_on_covering
        # Horizons are monotone: once a window width succeeds, wider ones do too.
        acts = [set(a) for a in rec.activations]
        if rec.w_ing is not None:
            d = rec.w_ing
            assert any(set().union(*acts[t:t + d + 1]) >= set(range(1, n + 1)) for t in range(steps - d))
