"""Finite set algebra over environment states.

Programs are bitmasks over a finite environment; a statement is a set of
indices into a :class:`Vocabulary` whose programs have a nonempty joint
truth set. Enumeration of languages and extensions is exponential in the
vocabulary size and therefore guarded by an explicit cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .exceptions import EnumerationBudgetError, InvalidStatementError, InvalidTaskError

__all__ = [
    "DEFAULT_VOCABULARY_CAP",
    "Environment",
    "Program",
    "Vocabulary",
    "Statement",
    "Task",
    "truth_set",
    "is_statement",
    "language",
    "extension",
    "is_correct_policy",
    "enumerate_correct_policies",
]

DEFAULT_VOCABULARY_CAP = 20


def _bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


@dataclass(frozen=True)
class Environment:
    """A nonempty finite set of mutually exclusive states ``0..size-1``."""

    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise ValueError(f"environment size must be a positive integer, got {self.size!r}")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size:
                raise ValueError(f"expected {self.size} labels, got {len(labels)}")
            if len(set(labels)) != len(labels):
                raise ValueError("state labels must be distinct")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, labels: Sequence[str]) -> Environment:
        return cls(len(labels), tuple(labels))

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def state(self, ref) -> int:
        """Resolve a state index or label to an index."""
        if isinstance(ref, bool):
            raise ValueError(f"invalid state reference {ref!r}")
        if isinstance(ref, int):
            if not 0 <= ref < self.size:
                raise ValueError(f"state index {ref} out of range for environment of size {self.size}")
            return ref
        if self.labels is not None:
            try:
                return self.labels.index(ref)
            except ValueError:
                pass
        raise ValueError(f"unknown state {ref!r}")

    def label(self, index: int) -> str:
        if self.labels is None:
            return str(index)
        return self.labels[index]

    def program(self, members: Iterable = ()) -> Program:
        mask = 0
        for m in members:
            mask |= 1 << self.state(m)
        return Program(mask, self)

    def full(self) -> Program:
        return Program(self.full_mask, self)

    def empty(self) -> Program:
        return Program(0, self)


@dataclass(frozen=True)
class Program:
    """A subset of an environment, stored as a bitmask."""

    mask: int
    env: Environment = field(repr=False)

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.env.size:
            raise ValueError("program mask has bits outside the environment")

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(_bits(self.mask))

    def __contains__(self, state: int) -> bool:
        return bool((self.mask >> state) & 1)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __iter__(self) -> Iterator[int]:
        return _bits(self.mask)

    def __and__(self, other: Program) -> Program:
        return Program(self.mask & other.mask, self.env)

    def __or__(self, other: Program) -> Program:
        return Program(self.mask | other.mask, self.env)

    def __le__(self, other: Program) -> bool:
        return self.mask & ~other.mask == 0

    def __lt__(self, other: Program) -> bool:
        return self <= other and self.mask != other.mask

    def sort_key(self):
        return (len(self), self.members)

    def labels(self) -> list[str]:
        return [self.env.label(i) for i in self]

    def __repr__(self):
        return "Program({" + ", ".join(self.labels()) + "})"


@dataclass(frozen=True, order=False)
class Statement:
    """A finite set of ingredient indices into some vocabulary."""

    ingredients: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "ingredients", frozenset(self.ingredients))

    @classmethod
    def of(cls, *indices: int) -> Statement:
        return cls(frozenset(indices))

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.ingredients))

    def __len__(self) -> int:
        return len(self.ingredients)

    def __contains__(self, index: int) -> bool:
        return index in self.ingredients

    def __le__(self, other: Statement) -> bool:
        return self.ingredients <= other.ingredients

    def __or__(self, other: Statement) -> Statement:
        return Statement(self.ingredients | other.ingredients)

    def sort_key(self):
        return (len(self.ingredients), tuple(sorted(self.ingredients)))

    def __repr__(self):
        return "Statement({" + ", ".join(map(str, self)) + "})"


class Vocabulary:
    """A finite, duplicate-free set of programs in canonical order.

    Programs are sorted by cardinality, then by their sorted member tuple,
    so two vocabularies with the same programs are indistinguishable.
    """

    __slots__ = ("env", "programs", "_index")

    def __init__(self, env: Environment, programs: Iterable[Program] = ()):
        programs = list(programs)
        for p in programs:
            if p.env != env:
                raise ValueError("program belongs to a different environment")
        seen = set()
        for p in programs:
            if p.mask in seen:
                raise ValueError(f"duplicate program {p!r} in vocabulary")
            seen.add(p.mask)
        self.env = env
        self.programs: tuple[Program, ...] = tuple(sorted(programs, key=Program.sort_key))
        self._index = {p.mask: i for i, p in enumerate(self.programs)}

    @classmethod
    def from_members(cls, env: Environment, programs: Iterable[Iterable]) -> Vocabulary:
        return cls(env, [env.program(m) for m in programs])

    def __len__(self) -> int:
        return len(self.programs)

    def __iter__(self) -> Iterator[Program]:
        return iter(self.programs)

    def __getitem__(self, i: int) -> Program:
        return self.programs[i]

    def __contains__(self, program: Program) -> bool:
        return program.env == self.env and program.mask in self._index

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.env == other.env and self.programs == other.programs

    def __hash__(self):
        return hash((self.env, tuple(p.mask for p in self.programs)))

    def __repr__(self):
        return f"Vocabulary({list(self.programs)!r})"

    def index(self, program: Program) -> int:
        try:
            return self._index[program.mask]
        except KeyError:
            raise KeyError(f"{program!r} is not in the vocabulary") from None

    def statement(self, indices: Iterable[int] = ()) -> Statement:
        """Build a statement and check it is well formed."""
        s = Statement(frozenset(indices))
        if not is_statement(s.ingredients, self):
            raise InvalidStatementError(f"{s!r} is not a statement over this vocabulary")
        return s

    def statement_of(self, programs: Iterable[Program]) -> Statement:
        return self.statement(self.index(p) for p in programs)

    def programs_of(self, l: Statement) -> list[Program]:
        return [self.programs[i] for i in l]


def _check_indices(l: Statement, v: Vocabulary):
    for i in l.ingredients:
        if not isinstance(i, int) or not 0 <= i < len(v):
            raise InvalidStatementError(f"ingredient index {i!r} out of range for vocabulary of size {len(v)}")


def _meet(indices: Iterable[int], v: Vocabulary) -> int:
    mask = v.env.full_mask
    for i in indices:
        mask &= v.programs[i].mask
    return mask


def truth_set(l: Statement, v: Vocabulary) -> Program:
    """Intersection of the statement's programs; the whole environment for ``l = {}``."""
    _check_indices(l, v)
    return Program(_meet(l.ingredients, v), v.env)


def is_statement(ingredients: Iterable[int], v: Vocabulary) -> bool:
    ingredients = frozenset(ingredients)
    for i in ingredients:
        if not isinstance(i, int) or not 0 <= i < len(v):
            return False
    return not ingredients or _meet(ingredients, v) != 0


def _check_cap(v: Vocabulary, cap: int):
    if len(v) > cap:
        raise EnumerationBudgetError("vocabulary", len(v), cap)


def _grow(v: Vocabulary, base: frozenset[int], mask: int, max_size: int | None) -> list[Statement]:
    # Depth-first over indices above the last one added; an empty meet
    # stays empty under further conjunction, so that branch is pruned.
    out = [Statement(base)]
    free = [i for i in range(len(v)) if i not in base]

    def rec(start, chosen, m):
        if max_size is not None and len(chosen) >= max_size:
            return
        for j in range(start, len(free)):
            idx = free[j]
            m2 = m & v.programs[idx].mask
            if m2:
                nxt = chosen | {idx}
                out.append(Statement(nxt))
                rec(j + 1, nxt, m2)

    rec(0, base, mask)
    out.sort(key=Statement.sort_key)
    return out


def language(v: Vocabulary, max_size: int | None = None, cap: int = DEFAULT_VOCABULARY_CAP) -> Iterator[Statement]:
    """Every statement over ``v`` in canonical (size, lexicographic) order."""
    _check_cap(v, cap)
    return iter(_grow(v, frozenset(), v.env.full_mask, max_size))


def extension(l: Statement, v: Vocabulary, cap: int = DEFAULT_VOCABULARY_CAP) -> Iterator[Statement]:
    """All completions of ``l``, in canonical order.

    Empty when ``l`` itself is not a statement, since no superset of it can be one.
    """
    _check_cap(v, cap)
    _check_indices(l, v)
    mask = _meet(l.ingredients, v)
    if l.ingredients and not mask:
        return iter(())
    return iter(_grow(v, l.ingredients, mask, None))


@dataclass(frozen=True)
class Task:
    """A pair of input statements and correct output statements."""

    inputs: frozenset[Statement]
    outputs: frozenset[Statement]

    def __post_init__(self):
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))

    @classmethod
    def derive(cls, inputs: Iterable[Statement], policy: Statement, v: Vocabulary,
               cap: int = DEFAULT_VOCABULARY_CAP) -> Task:
        """The task for which ``policy`` is correct by construction."""
        inputs = frozenset(inputs)
        return cls(inputs, _ext_meet(inputs, policy, v, cap))

    def check(self, v: Vocabulary, cap: int = DEFAULT_VOCABULARY_CAP) -> None:
        """Raise :class:`InvalidTaskError` unless every output completes some input."""
        for s in self.inputs:
            if not is_statement(s.ingredients, v):
                raise InvalidTaskError(f"input {s!r} is not a statement")
        for o in self.outputs:
            if not is_statement(o.ingredients, v):
                raise InvalidTaskError(f"output {o!r} is not a statement")
            if not any(i <= o for i in self.inputs):
                raise InvalidTaskError(f"output {o!r} is not a completion of any input")


def _ext_set(inputs: Iterable[Statement], v: Vocabulary, cap: int) -> set[Statement]:
    out = set()
    for i in inputs:
        out.update(extension(i, v, cap))
    return out


def _ext_meet(inputs: frozenset[Statement], policy: Statement, v: Vocabulary, cap: int) -> frozenset[Statement]:
    # Ext(i) & Ext(pi) is exactly Ext(i | pi).
    return frozenset(_ext_set((i | policy for i in inputs), v, cap))


def is_correct_policy(task: Task, policy: Statement, v: Vocabulary, cap: int = DEFAULT_VOCABULARY_CAP) -> bool:
    _check_cap(v, cap)
    if not is_statement(policy.ingredients, v):
        return False
    return _ext_meet(task.inputs, policy, v, cap) == task.outputs


def enumerate_correct_policies(task: Task, v: Vocabulary, cap: int = DEFAULT_VOCABULARY_CAP) -> list[Statement]:
    """Correct policies for ``task``, in canonical order."""
    return [pi for pi in language(v, cap=cap) if is_correct_policy(task, pi, v, cap)]
