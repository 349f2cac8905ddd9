"""Abstraction layers and compositional grounding.

A layer's policy induces the next vocabulary: every completion of the
policy collapses to its truth set. Grounding runs the other way, replacing
each macro ingredient with a lower completion that has the same truth set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .exceptions import GroundingError, InvalidStatementError, TheoremViolationError
from .kernel import (
    DEFAULT_VOCABULARY_CAP,
    Program,
    Statement,
    Task,
    Vocabulary,
    extension,
    is_correct_policy,
    is_statement,
    truth_set,
)

__all__ = [
    "StackState",
    "GroundingTrace",
    "LayerCheck",
    "StackValidation",
    "abstractor",
    "canonical_completions",
    "ground_one",
    "ground",
    "build_stack",
    "validate_stack",
]


def _require_statement(l: Statement, v: Vocabulary, what: str):
    if not is_statement(l.ingredients, v):
        raise InvalidStatementError(f"{what} {l!r} is not a statement over its vocabulary")


def abstractor(v: Vocabulary, policy: Statement, cap: int = DEFAULT_VOCABULARY_CAP) -> Vocabulary:
    """Vocabulary of truth sets of the completions of ``policy``."""
    _require_statement(policy, v, "policy")
    masks = {truth_set(o, v).mask for o in extension(policy, v, cap)}
    return Vocabulary(v.env, [Program(m, v.env) for m in masks])


def canonical_completions(v: Vocabulary, policy: Statement, cap: int = DEFAULT_VOCABULARY_CAP) -> dict[int, Statement]:
    """Map each reachable truth-set mask to its smallest completion of ``policy``.

    Completions arrive in canonical order, so the first one seen per mask wins.
    """
    _require_statement(policy, v, "policy")
    chosen: dict[int, Statement] = {}
    for o in extension(policy, v, cap):
        chosen.setdefault(truth_set(o, v).mask, o)
    return chosen


def _ground_step(l, upper, policy, lower, cap, layer=None):
    _require_statement(l, upper, "statement")
    if not l.ingredients:
        # Grounding the empty statement yields the empty statement: both
        # denote the whole environment, so truth is preserved exactly.
        return Statement(), {}
    completions = canonical_completions(lower, policy, cap)
    choices = {}
    result = frozenset()
    for i in l:
        target = upper[i]
        o = completions.get(target.mask)
        if o is None:
            raise GroundingError(
                f"ingredient {target!r} is not the truth set of any completion of the policy",
                layer,
            )
        choices[i] = o
        result |= o.ingredients
    g = Statement(result)
    if truth_set(g, lower).mask != truth_set(l, upper).mask:
        raise TheoremViolationError(
            f"grounding changed the truth set at layer {layer}: {l!r} -> {g!r}"
        )
    return g, choices


def ground_one(l: Statement, upper: Vocabulary, policy: Statement, lower: Vocabulary,
               cap: int = DEFAULT_VOCABULARY_CAP) -> Statement:
    """Ground a statement over ``upper = abstractor(lower, policy)`` into ``lower``.

    Raises
    ------
    GroundingError
        If an ingredient of ``l`` is not produced by any completion of ``policy``.
    """
    return _ground_step(l, upper, policy, lower, cap)[0]


@dataclass(frozen=True)
class StackState:
    """Vocabularies ``v^0..v^m`` with per-layer policies and tasks."""

    vocabularies: tuple[Vocabulary, ...]
    policies: tuple[Statement, ...] = ()
    tasks: tuple[Task, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vocabularies", tuple(self.vocabularies))
        object.__setattr__(self, "policies", tuple(self.policies))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if not self.vocabularies:
            raise ValueError("a stack needs at least the base vocabulary")
        m = len(self.vocabularies) - 1
        if len(self.policies) != m or len(self.tasks) != m:
            raise ValueError(
                f"depth {m} stack needs {m} policies and {m} tasks, "
                f"got {len(self.policies)} and {len(self.tasks)}"
            )

    @property
    def depth(self) -> int:
        return len(self.vocabularies) - 1

    @property
    def base(self) -> Vocabulary:
        return self.vocabularies[0]

    @property
    def top(self) -> Vocabulary:
        return self.vocabularies[-1]


def build_stack(base: Vocabulary, layers: Sequence[tuple[Task, Statement]],
                cap: int = DEFAULT_VOCABULARY_CAP) -> StackState:
    """Build a stack whose vocabularies come from the abstractor by construction.

    Policies for layer ``i`` must be expressed over the vocabulary built so far.
    """
    vocabs = [base]
    for task, policy in layers:
        vocabs.append(abstractor(vocabs[-1], policy, cap))
    return StackState(tuple(vocabs), tuple(p for _, p in layers), tuple(t for t, _ in layers))


@dataclass(frozen=True)
class GroundingTrace:
    """Per-layer grounded statements; ``statements[i]`` is ``g^i``.

    ``choices[i]`` maps each ingredient of ``g^(i+1)`` to the completion
    over ``v^i`` that replaced it.
    """

    statements: tuple[Statement, ...]
    choices: tuple[dict, ...]

    @property
    def grounded(self) -> Statement:
        return self.statements[0]

    @property
    def top(self) -> Statement:
        return self.statements[-1]


def ground(stack: StackState, l: Statement, cap: int = DEFAULT_VOCABULARY_CAP) -> GroundingTrace:
    """Ground ``l`` over the top vocabulary down to the base layer."""
    _require_statement(l, stack.top, "top-layer statement")
    m = stack.depth
    statements = [None] * (m + 1)
    choices = [None] * m
    statements[m] = l
    for i in range(m - 1, -1, -1):
        try:
            statements[i], choices[i] = _ground_step(
                statements[i + 1], stack.vocabularies[i + 1], stack.policies[i],
                stack.vocabularies[i], cap, layer=i,
            )
        except InvalidStatementError as e:
            raise GroundingError(str(e), i) from e
    if truth_set(statements[0], stack.base).mask != truth_set(l, stack.top).mask:
        raise TheoremViolationError("grounded statement does not preserve the truth set")
    return GroundingTrace(tuple(statements), tuple(choices))


@dataclass(frozen=True)
class LayerCheck:
    layer: int
    vocabulary_ok: bool
    policy_ok: bool
    problems: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.vocabulary_ok and self.policy_ok


@dataclass(frozen=True)
class StackValidation:
    layers: tuple[LayerCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.layers)

    @property
    def problems(self) -> list[str]:
        return [f"layer {c.layer}: {p}" for c in self.layers for p in c.problems]


def validate_stack(stack: StackState, cap: int = DEFAULT_VOCABULARY_CAP) -> StackValidation:
    """Check the abstractor equation and policy correctness at every layer."""
    checks = []
    for i in range(stack.depth):
        v, pi, task = stack.vocabularies[i], stack.policies[i], stack.tasks[i]
        problems = []
        if not is_statement(pi.ingredients, v):
            problems.append("policy is not a statement")
            checks.append(LayerCheck(i, False, False, tuple(problems)))
            continue
        vocab_ok = abstractor(v, pi, cap) == stack.vocabularies[i + 1]
        if not vocab_ok:
            problems.append("vocabulary mismatch")
        policy_ok = is_correct_policy(task, pi, v, cap)
        if not policy_ok:
            problems.append("policy incorrect")
        checks.append(LayerCheck(i, vocab_ok, policy_ok, tuple(problems)))
    return StackValidation(tuple(checks))
