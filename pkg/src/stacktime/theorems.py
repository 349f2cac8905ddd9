"""Oracle suites that check the algebra on small instances.

Each suite either enumerates a small universe exhaustively or draws seeded
random instances, recomputes the expected answer with plain Python sets,
and compares. A suite never stops at the first failure; it returns a
:class:`CheckResult` carrying the case count and a sample of failures.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable

from .exceptions import StackTimeError
from .gap import (
    ARPEGGIO_COINST,
    ARPEGGIO_SMEARED,
    ARPEGGIO_VIOLATION,
    ContributorModel,
    PhenClaim,
    Scheduler,
    _gap,
    arpeggio_check,
    capacity_experiment,
    chord_check,
    verify_report,
)
from .kernel import (
    Environment,
    Program,
    Statement,
    Task,
    Vocabulary,
    extension,
    is_correct_policy,
    is_statement,
    language,
    truth_set,
)
from .stack import StackState, abstractor, build_stack, ground
from .temporal import (
    Trajectory,
    box_holds,
    co_inst,
    co_inst_table,
    diamond_holds,
    encode,
    enumerate_windows,
    layer_clock,
    layer_trajectory,
    occurs,
    occurs_table,
    sparse_example,
)

__all__ = [
    "Bounds",
    "CheckResult",
    "Operators",
    "MUTANTS",
    "random_vocabulary",
    "random_stack",
    "random_trajectory",
    "SUITES",
    "run_all",
]

MAX_REPORTED_FAILURES = 5


@dataclass(frozen=True)
class Bounds:
    max_env: int = 6
    max_vocab: int = 5
    max_delta: int = 3
    max_depth: int = 3
    trials: int = 1000
    exhaustive_env: int = 4
    exhaustive_vocab: int = 4
    exhaustive_delta: int = 2
    language_vocab: int = 10
    capacity_max_n: int = 5
    capacity_steps: int = 100
    capacity_trials: int = 100


@dataclass(frozen=True)
class Operators:
    """The lift predicates under test; swapped out for mutation checks."""

    box: Callable = box_holds
    diamond: Callable = diamond_holds


MUTANTS = {
    "box-as-diamond": Operators(box=diamond_holds),
    "diamond-as-box": Operators(diamond=box_holds),
}


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    failures: list[str] = field(default_factory=list)
    n_failures: int = 0
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.n_failures == 0

    def fail(self, message: str):
        self.n_failures += 1
        if len(self.failures) < MAX_REPORTED_FAILURES:
            self.failures.append(message)

    def check(self, cond: bool, message: str | Callable[[], str]):
        self.cases += 1
        if not cond:
            self.fail(message() if callable(message) else message)

    def to_dict(self, timings: bool = False) -> dict:
        d = {
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "n_failures": self.n_failures,
            "failures": list(self.failures),
            "details": dict(self.details),
        }
        if timings:
            d["seconds"] = round(self.seconds, 3)
        return d


# -- random instance generators ---------------------------------------------


def random_vocabulary(rng: random.Random, env: Environment, max_vocab: int) -> Vocabulary:
    k = rng.randint(0, min(max_vocab, 2**env.size))
    masks = rng.sample(range(2**env.size), k)
    return Vocabulary(env, [Program(m, env) for m in masks])


def random_stack(rng: random.Random, max_env: int = 6, max_vocab: int = 5, max_depth: int = 3,
                 max_layer_vocab: int = 8) -> StackState:
    """A stack built through the abstractor, with each policy correct by construction.

    Policies are drawn among those whose induced vocabulary stays within
    ``max_layer_vocab`` programs, which keeps higher languages enumerable.
    """
    env = Environment(rng.randint(1, max_env))
    base = v = random_vocabulary(rng, env, max_vocab)
    layers = []
    for _ in range(rng.randint(0, max_depth)):
        lang = list(language(v))
        order = lang[:]
        rng.shuffle(order)
        policy = next(pi for pi in order if len(abstractor(v, pi)) <= max_layer_vocab)
        inputs = rng.sample(lang, rng.randint(1, min(3, len(lang))))
        layers.append((Task.derive(inputs, policy, v), policy))
        v = abstractor(v, policy)
    return build_stack(base, layers)


def random_trajectory(rng: random.Random, env: Environment, length: int) -> Trajectory:
    if env.size == 1:
        return Trajectory((0,), env)
    states = [rng.randrange(env.size)]
    while len(states) < length:
        s = rng.randrange(env.size - 1)
        states.append(s if s < states[-1] else s + 1)
    return Trajectory(tuple(states), env)


# -- independent set-based oracles ------------------------------------------


def _member_sets(v: Vocabulary) -> list[frozenset[int]]:
    return [frozenset(p.members) for p in v]


def _oracle_truth(indices, sets, universe) -> frozenset[int]:
    return reduce(lambda a, b: a & b, (sets[i] for i in indices), frozenset(universe))


def _oracle_language(v: Vocabulary) -> set[frozenset[int]]:
    sets = _member_sets(v)
    universe = range(v.env.size)
    out = set()
    for k in range(len(v) + 1):
        for combo in itertools.combinations(range(len(v)), k):
            if not combo or _oracle_truth(combo, sets, universe):
                out.add(frozenset(combo))
    return out


def _oracle_ext(base, lang):
    return {s for s in lang if base <= s}


# -- suites -------------------------------------------------------------------


def check_language_count(rng, bounds, ops):
    r = CheckResult("kernel.language_count")
    for _ in range(max(1, bounds.trials // 5)):
        env = Environment(rng.randint(1, bounds.max_env))
        v = random_vocabulary(rng, env, bounds.language_vocab)
        got = [s.ingredients for s in language(v)]
        expected = _oracle_language(v)
        r.check(len(got) == len(set(got)) and set(got) == expected,
                lambda: f"language mismatch for {v!r}: {len(got)} vs {len(expected)}")
    return r


def check_kernel_invariants(rng, bounds, ops):
    """Monotonicity of truth sets and closure of extensions."""
    r = CheckResult("kernel.invariants")
    for _ in range(max(1, bounds.trials // 5)):
        env = Environment(rng.randint(1, bounds.max_env))
        v = random_vocabulary(rng, env, bounds.max_vocab)
        lang = list(language(v))
        l = rng.choice(lang)
        ext = set(extension(l, v))
        for l2 in ext:
            r.check(truth_set(l2, v) <= truth_set(l, v), f"monotonicity fails for {l!r} <= {l2!r}")
            r.check(set(extension(l2, v)) <= ext, f"extension closure fails for {l!r}, {l2!r}")
    return r


def check_policy_oracle(rng, bounds, ops):
    r = CheckResult("kernel.policy_oracle")
    for _ in range(bounds.trials):
        env = Environment(rng.randint(1, bounds.max_env))
        v = random_vocabulary(rng, env, bounds.max_vocab)
        lang = _oracle_language(v)
        lang_list = sorted(lang, key=lambda s: (len(s), sorted(s)))
        inputs = rng.sample(lang_list, rng.randint(1, min(3, len(lang_list))))
        ext_i = set().union(*(_oracle_ext(i, lang) for i in inputs))
        pi = rng.choice(lang_list)
        ext_pi = _oracle_ext(pi, lang)
        if rng.random() < 0.5:
            outputs = ext_i & ext_pi
        else:
            outputs = {s for s in ext_i if rng.random() < 0.5}
        task = Task(frozenset(Statement(i) for i in inputs), frozenset(Statement(o) for o in outputs))
        expected = (ext_i & ext_pi) == outputs
        got = is_correct_policy(task, Statement(pi), v)
        r.check(got == expected, lambda: f"policy {sorted(pi)} on {v!r}: got {got}, oracle {expected}")
    return r


def check_abstractor_soundness(rng, bounds, ops):
    """Every abstracted program is the truth set of some completion of the policy."""
    r = CheckResult("stack.abstractor_soundness")
    for _ in range(max(1, bounds.trials // 5)):
        env = Environment(rng.randint(1, bounds.max_env))
        v = random_vocabulary(rng, env, bounds.max_vocab)
        pi = rng.choice(list(language(v)))
        lang = _oracle_language(v)
        sets = _member_sets(v)
        reachable = {_oracle_truth(o, sets, range(env.size)) for o in _oracle_ext(pi.ingredients, lang)}
        produced = {frozenset(p.members) for p in abstractor(v, pi)}
        r.check(produced == reachable, lambda: f"abstractor({v!r}, {pi!r}) mismatch")
    return r


def check_grounding(rng, bounds, ops):
    """Compositional grounding preserves truth sets."""
    r = CheckResult("stack.grounding_preserves_truth")
    depths = [0] * (bounds.max_depth + 1)
    for _ in range(bounds.trials):
        stack = random_stack(rng, bounds.max_env, bounds.max_vocab, bounds.max_depth)
        l = rng.choice(list(language(stack.top)))
        depths[stack.depth] += 1
        try:
            g0 = ground(stack, l).grounded
        except StackTimeError as e:
            r.fail(f"grounding raised {e!r}")
            r.cases += 1
            continue
        universe = range(stack.base.env.size)
        top = _oracle_truth(l.ingredients, _member_sets(stack.top), universe)
        bottom = _oracle_truth(g0.ingredients, _member_sets(stack.base), universe)
        r.check(top == bottom and is_statement(g0.ingredients, stack.base),
                lambda: f"depth {stack.depth}: {sorted(top)} != {sorted(bottom)}")
    r.details["depth_histogram"] = depths
    return r


def _window_sets(ops, env, delta, cap=10**6):
    windows = list(enumerate_windows(env, delta, cap))
    cache = {}

    def lifted(mask):
        if mask not in cache:
            p = Program(mask, env)
            box = dia = 0
            for k, sigma in enumerate(windows):
                if ops.box(p, sigma):
                    box |= 1 << k
                if ops.diamond(p, sigma):
                    dia |= 1 << k
            cache[mask] = (box, dia)
        return cache[mask]

    return windows, lifted


def check_lift_sweep(rng, bounds, ops):
    """Box commutes, diamond includes, and the degenerate cases coincide.

    Exhaustive over all vocabularies of up to ``exhaustive_vocab`` programs
    on environments of up to ``exhaustive_env`` states, every statement,
    and every horizon up to ``exhaustive_delta``.
    """
    box_r = CheckResult("temporal.box_commutes")
    dia_r = CheckResult("temporal.diamond_inclusion")
    deg_r = CheckResult("temporal.degenerate_equality")
    strict_cases = 0
    for size in range(1, bounds.exhaustive_env + 1):
        env = Environment(size)
        for delta in range(bounds.exhaustive_delta + 1):
            windows, lifted = _window_sets(ops, env, delta)
            all_windows = (1 << len(windows)) - 1
            for k in range(bounds.exhaustive_vocab + 1):
                for masks in itertools.combinations(range(2**size), k):
                    v = Vocabulary(env, [Program(m, env) for m in masks])
                    for l in language(v):
                        box_l = dia_l = all_windows
                        for i in l:
                            b, d = lifted(v[i].mask)
                            box_l &= b
                            dia_l &= d
                        box_t, dia_t = lifted(truth_set(l, v).mask)
                        where = f"|Phi|={size}, delta={delta}, v={[list(p.members) for p in v]}, l={sorted(l)}"
                        box_r.check(box_l == box_t, lambda: f"box sets differ: {where}")
                        dia_r.check(dia_t & ~dia_l == 0, lambda: f"diamond inclusion fails: {where}")
                        if dia_l != dia_t:
                            strict_cases += 1
                        if delta == 0 or len(l) <= 1:
                            deg_r.check(dia_l == dia_t, lambda: f"degenerate equality fails: {where}")
    dia_r.details["strict_cases"] = strict_cases
    return [box_r, dia_r, deg_r]


def diamond_witness(ops: Operators = Operators()) -> dict:
    """The three-state witness: ingredients occur in (a, b) without co-occurring."""
    env = Environment.from_labels(["a", "b", "c"])
    v = Vocabulary.from_members(env, [["a", "c"], ["b", "c"]])
    l = v.statement([0, 1])
    sigma = (env.state("a"), env.state("b"))
    lifted = all(ops.diamond(v[i], sigma) for i in l)
    pointwise = ops.diamond(truth_set(l, v), sigma)
    return {"in_lifted_statement": lifted, "in_lifted_truth_set": pointwise}


def check_diamond_strictness(rng, bounds, ops):
    r = CheckResult("temporal.diamond_strictness")
    w = diamond_witness(ops)
    r.details["witness"] = w
    r.check(w["in_lifted_statement"] and not w["in_lifted_truth_set"], f"fixed witness not strict: {w}")
    found = total = 0
    while total < bounds.trials:
        env = Environment(rng.randint(3, max(3, bounds.max_env)))
        p, q = rng.randrange(1, 2**env.size), rng.randrange(1, 2**env.size)
        if not (p & q) or (p & ~q) == 0 or (q & ~p) == 0:
            continue
        total += 1
        v = Vocabulary(env, [Program(p, env), Program(q, env)])
        l = v.statement([0, 1])
        t = truth_set(l, v)
        if any(all(ops.diamond(v[i], s) for i in l) and not ops.diamond(t, s) for s in enumerate_windows(env, 1)):
            found += 1
    rate = found / total
    r.details.update(found=found, total=total, rate=rate)
    r.check(rate >= 0.95, f"strictness witness found for only {rate:.3f} of random statements")
    return r


def check_encoding(rng, bounds, ops):
    r = CheckResult("temporal.encoding_maximal")
    for _ in range(bounds.trials):
        env = Environment(rng.randint(1, bounds.max_env))
        v = random_vocabulary(rng, env, bounds.max_vocab)
        phi = rng.randrange(env.size)
        enc = encode(phi, v)
        sets = _member_sets(v)
        ok = is_statement(enc.ingredients, v) and phi in _oracle_truth(enc.ingredients, sets, range(env.size))
        for s in _oracle_language(v):
            if phi in _oracle_truth(s, sets, range(env.size)) and not s <= enc.ingredients:
                ok = False
        r.check(ok, lambda: f"encoding of {phi} over {v!r} is not maximal")
    return r


def check_sparse_clock(rng, bounds, ops):
    r = CheckResult("temporal.sparse_clock")
    env, v, tau = sparse_example(100)
    clock = layer_clock(tau, v)
    r.details.update(steps=len(tau), blocks=len(clock.blocks), max_tick=max(clock.ticks))
    r.check(len(tau) == 101, "expected a 101-state trajectory")
    r.check(all(tau[t] != tau[t + 1] for t in range(len(tau) - 1)), "objective trajectory must change every step")
    r.check(set(clock.ticks) == {0} and clock.blocks == ((0, 101),), "layer clock incremented")
    return r


def check_layer_clock(rng, bounds, ops):
    r = CheckResult("temporal.layer_clock_soundness")
    for _ in range(max(1, bounds.trials // 5)):
        env = Environment(rng.randint(1, bounds.max_env))
        v = random_vocabulary(rng, env, bounds.max_vocab)
        tau = random_trajectory(rng, env, rng.randint(1, 20))
        enc = layer_trajectory(tau, v)
        clock = layer_clock(tau, v)
        ok = clock.ticks[0] == 0
        for t in range(1, len(tau)):
            step = clock.ticks[t] - clock.ticks[t - 1]
            ok &= step == (0 if enc[t] == enc[t - 1] else 1)
        for a, b in clock.blocks:
            ok &= all(enc[t] == enc[a] for t in range(a, b))
        for (a, b), (c, _) in zip(clock.blocks, clock.blocks[1:]):
            ok &= b == c and enc[a] != enc[c]
        r.check(ok, lambda: f"clock unsound on {tau.states} over {v!r}")
    return r


def check_window_predicates(rng, bounds, ops):
    """Tables agree with pointwise predicates; co-instantiation implies occurrence;
    both are monotone in the horizon; metrics are ordered and witnesses replay."""
    r = CheckResult("gap.window_predicates")
    for _ in range(max(1, bounds.trials // 5)):
        env = Environment(rng.randint(2, bounds.max_env))
        v = random_vocabulary(rng, env, bounds.max_vocab)
        l = rng.choice(list(language(v)))
        tau = random_trajectory(rng, env, rng.randint(1, 12))
        oc, co = occurs_table(l, v, tau), co_inst_table(l, v, tau)
        T = len(tau)
        ok = True
        for t in range(T):
            for d in range(T - t):
                o, c = occurs(l, v, tau, t, d), co_inst(l, v, tau, t, d)
                ok &= o == oc[t, d] and c == co[t, d]
                ok &= (not c) or o
                if t + d + 1 < T:
                    ok &= (not o or occurs(l, v, tau, t, d + 1)) and (not c or co_inst(l, v, tau, t, d + 1))
        rep = _gap(l, v, tau, None)
        if rep.w_co is not None:
            ok &= rep.w_ing is not None and rep.w_ing <= rep.w_co
        ok &= rep.strict_gap == (rep.w_ing is not None and (rep.w_co is None or rep.w_ing < rep.w_co))
        ok &= verify_report(rep, v, tau)
        r.check(bool(ok), lambda: f"window predicates inconsistent for {l!r} on {tau.states}")
    return r


def check_postulate_coherence(rng, bounds, ops):
    r = CheckResult("gap.postulate_coherence")
    for _ in range(max(1, bounds.trials // 5)):
        stack = random_stack(rng, bounds.max_env, bounds.max_vocab, min(bounds.max_depth, 2))
        env = stack.base.env
        if env.size < 2:
            continue
        tau = random_trajectory(rng, env, rng.randint(1, 10))
        lang = list(language(stack.top))
        claims = []
        for k in range(3):
            t = rng.randrange(len(tau))
            d = rng.randrange(len(tau) - t)
            claims.append(PhenClaim(rng.choice(lang), t, d, f"c{k}"))
        for cv, av in zip(chord_check(claims, stack, tau), arpeggio_check(claims, stack, tau)):
            c = cv.claim
            o = occurs(cv.grounded, stack.base, tau, c.t, c.delta)
            ok = cv.consistent == co_inst(cv.grounded, stack.base, tau, c.t, c.delta)
            ok &= (av.verdict == ARPEGGIO_VIOLATION) == (not o)
            if av.verdict == ARPEGGIO_COINST:
                ok &= cv.consistent
            if av.verdict == ARPEGGIO_SMEARED:
                ok &= o and not cv.consistent
            if cv.witness is not None:
                ok &= co_inst(cv.grounded, stack.base, tau, cv.witness.t, cv.witness.delta)
                ok &= tau[cv.witness.u] in truth_set(cv.grounded, stack.base)
            r.check(bool(ok), lambda: f"incoherent verdicts for claim {c!r}")
    return r


def check_capacity(rng, bounds, ops):
    """Capacity below n forbids co-instantiation but admits occurrence."""
    r = CheckResult("gap.capacity_threshold")
    exercised = 0
    grid = []
    for n in range(2, bounds.capacity_max_n + 1):
        for c in range(1, n):
            grid.append((n, c))
            m = ContributorModel(n, data_size=2, capacity=c)
            for k in range(bounds.capacity_trials):
                seed = rng.getrandbits(64)
                if k % 2 == 0:
                    sched = Scheduler("uniform-random", seed)
                else:
                    sched = Scheduler("bursty", seed, burst_length=rng.randint(1, 5))
                try:
                    rec = capacity_experiment(m, sched, bounds.capacity_steps, bounds.capacity_steps - 1)
                except StackTimeError as e:
                    r.fail(f"n={n}, c={c}, {sched}: {e}")
                    r.cases += 1
                    continue
                exercised += rec.covering_windows > 0
                r.check(rec.co_inst_windows == 0 and rec.occurs_on_covering and rec.w_co is None,
                        f"n={n}, c={c}, {sched}: co-instantiation or missed occurrence")
    r.details.update(grid=grid, runs_with_covering_windows=exercised)
    return r


SUITES = [
    check_language_count,
    check_kernel_invariants,
    check_policy_oracle,
    check_abstractor_soundness,
    check_grounding,
    check_lift_sweep,
    check_diamond_strictness,
    check_encoding,
    check_sparse_clock,
    check_layer_clock,
    check_window_predicates,
    check_postulate_coherence,
    check_capacity,
]


def run_suite(suite, seed: int = 0, bounds: Bounds = Bounds(), ops: Operators = Operators()) -> list[CheckResult]:
    # Each suite gets its own generator so results do not depend on which
    # other suites ran first.
    rng = random.Random(f"{seed}:{suite.__name__}")
    start = time.perf_counter()
    out = suite(rng, bounds, ops)
    results = out if isinstance(out, list) else [out]
    elapsed = time.perf_counter() - start
    for res in results:
        res.seconds = elapsed
    return results


def run_all(seed: int = 0, bounds: Bounds = Bounds(), ops: Operators = Operators(),
            only: list[str] | None = None) -> list[CheckResult]:
    results = []
    for suite in SUITES:
        if only and not any(name in suite.__name__ for name in only):
            continue
        results.extend(run_suite(suite, seed, bounds, ops))
    return results
