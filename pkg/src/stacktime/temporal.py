"""Trajectories, induced layer time, windows and temporal lifts.

Trajectories are finite, so every "exists a time" quantifier below ranges
over in-bounds indices only. Windows that would run past the end of a
trajectory are rejected, never padded.

The ``*_table`` functions evaluate a predicate for every ``(t, delta)``
at once with prefix sums; they agree with the pointwise
:func:`occurs` / :func:`co_inst` and are what the metric scans use.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .exceptions import ChangeConstraintError, EnumerationBudgetError, WindowBoundsError
from .kernel import Environment, Program, Statement, Vocabulary, truth_set

__all__ = [
    "DEFAULT_WINDOW_CAP",
    "Trajectory",
    "Window",
    "LayerClock",
    "encode",
    "layer_trajectory",
    "layer_clock",
    "sparse_example",
    "window",
    "diamond_holds",
    "box_holds",
    "occurs",
    "co_inst",
    "occurs_table",
    "co_inst_table",
    "enumerate_windows",
]

DEFAULT_WINDOW_CAP = 10**6


@dataclass(frozen=True)
class Trajectory:
    """A finite state sequence that changes at every step."""

    states: tuple[int, ...]
    env: Environment

    def __post_init__(self):
        states = tuple(self.env.state(s) for s in self.states)
        if not states:
            raise ValueError("a trajectory needs at least one state")
        for t in range(1, len(states)):
            if states[t] == states[t - 1]:
                raise ChangeConstraintError(t)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, t):
        return self.states[t]

    def __iter__(self):
        return iter(self.states)

    def labels(self) -> list[str]:
        return [self.env.label(s) for s in self.states]


@dataclass(frozen=True)
class Window:
    """A contiguous slice ``states[origin : origin + delta + 1]``."""

    slice: tuple[int, ...]
    origin: int = 0

    @property
    def delta(self) -> int:
        return len(self.slice) - 1

    def __len__(self):
        return len(self.slice)

    def __getitem__(self, k):
        return self.slice[k]

    def __iter__(self):
        return iter(self.slice)


@dataclass(frozen=True)
class LayerClock:
    """Layer ticks per objective time and the blocks of constant encoding.

    ``blocks`` holds half-open ``(start, stop)`` ranges.
    """

    ticks: tuple[int, ...]
    blocks: tuple[tuple[int, int], ...]

    @property
    def n_ticks(self) -> int:
        return self.ticks[-1] + 1 if self.ticks else 0


def encode(state: int, v: Vocabulary) -> Statement:
    """The set of programs in ``v`` true at ``state``."""
    state = v.env.state(state)
    return Statement(frozenset(i for i, p in enumerate(v) if state in p))


def layer_trajectory(tau: Trajectory, v: Vocabulary) -> list[Statement]:
    return [encode(s, v) for s in tau]


def layer_clock(tau: Trajectory, v: Vocabulary) -> LayerClock:
    enc = layer_trajectory(tau, v)
    ticks = [0]
    for t in range(1, len(enc)):
        ticks.append(ticks[-1] if enc[t] == enc[t - 1] else ticks[-1] + 1)
    blocks = []
    start = 0
    for t in range(1, len(ticks) + 1):
        if t == len(ticks) or ticks[t] != ticks[t - 1]:
            blocks.append((start, t))
            start = t
    return LayerClock(tuple(ticks), tuple(blocks))


def sparse_example(n: int) -> tuple[Environment, Vocabulary, Trajectory]:
    """An ``n+1``-state trajectory that a blind vocabulary never sees change."""
    if n < 1:
        raise ValueError("n must be at least 1")
    env = Environment(n + 1)
    v = Vocabulary(env, [env.full()])
    return env, v, Trajectory(tuple(range(n + 1)), env)


def window(tau: Trajectory, t: int, delta: int) -> Window:
    if t < 0 or delta < 0 or t + delta > len(tau) - 1:
        raise WindowBoundsError(
            f"window at t={t} with delta={delta} does not fit a trajectory of length {len(tau)}"
        )
    return Window(tau.states[t:t + delta + 1], t)


def diamond_holds(p: Program, sigma: Sequence[int]) -> bool:
    return any(s in p for s in sigma)


def box_holds(p: Program, sigma: Sequence[int]) -> bool:
    return all(s in p for s in sigma)


def occurs(l: Statement, v: Vocabulary, tau: Trajectory, t: int, delta: int) -> bool:
    """Every ingredient of ``l`` is true somewhere in the window."""
    sigma = window(tau, t, delta)
    return all(diamond_holds(v[i], sigma) for i in l)


def co_inst(l: Statement, v: Vocabulary, tau: Trajectory, t: int, delta: int) -> bool:
    """Some single position of the window lies in the truth set of ``l``."""
    sigma = window(tau, t, delta)
    return diamond_holds(truth_set(l, v), sigma)


def _hits(p: Program, tau: Trajectory) -> np.ndarray:
    mask = p.mask
    return np.fromiter(((mask >> s) & 1 for s in tau.states), dtype=np.int64, count=len(tau))


def _coverage(hits: np.ndarray, delta_max: int) -> np.ndarray:
    # out[t, d] = any(hits[t : t + d + 1]), False where the window overruns.
    T = len(hits)
    csum = np.concatenate(([0], np.cumsum(hits)))
    t = np.arange(T)[:, None]
    d = np.arange(delta_max + 1)[None, :]
    stop = t + d + 1
    valid = stop <= T
    counts = csum[np.minimum(stop, T)] - csum[t]
    return (counts > 0) & valid


def valid_windows(T: int, delta_max: int) -> np.ndarray:
    t = np.arange(T)[:, None]
    d = np.arange(delta_max + 1)[None, :]
    return t + d <= T - 1


def _horizon(tau, delta_max):
    if delta_max is None:
        return len(tau) - 1
    if delta_max < 0:
        raise ValueError("delta_max must be non-negative")
    return min(delta_max, len(tau) - 1)


def occurs_table(l: Statement, v: Vocabulary, tau: Trajectory, delta_max: int | None = None) -> np.ndarray:
    """Boolean array ``[t, delta]`` of :func:`occurs`; out-of-range windows are False."""
    dm = _horizon(tau, delta_max)
    out = valid_windows(len(tau), dm)
    for i in l:
        out = out & _coverage(_hits(v[i], tau), dm)
    return out


def co_inst_table(l: Statement, v: Vocabulary, tau: Trajectory, delta_max: int | None = None) -> np.ndarray:
    """Boolean array ``[t, delta]`` of :func:`co_inst`; out-of-range windows are False."""
    dm = _horizon(tau, delta_max)
    return _coverage(_hits(truth_set(l, v), tau), dm)


def enumerate_windows(env: Environment, delta: int, cap: int = DEFAULT_WINDOW_CAP) -> Iterator[tuple[int, ...]]:
    """Every tuple in ``env^(delta+1)``, including ones no trajectory visits."""
    count = env.size ** (delta + 1)
    if count > cap:
        raise EnumerationBudgetError("window environment", count, cap)
    return itertools.product(range(env.size), repeat=delta + 1)
