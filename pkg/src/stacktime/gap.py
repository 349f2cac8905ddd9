"""Temporal Gap metrics, postulate checks and the contributor simulator.

``w_ing`` and ``w_co`` are the least window horizons at which a grounded
conjunction is satisfied ingredient-wise or co-instantiated somewhere along
a trajectory. On a finite trajectory the infimum may not exist; that case
is reported as ``None`` ("unbounded at horizon T"), distinct from any
finite value.

Phenomenal realisation is never computed. Claims are inputs, and the
checks only report whether each claimed window meets the necessary
condition that Chord or Arpeggio imposes on it.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ClaimBoundsError, EnumerationBudgetError, TheoremViolationError
from .kernel import Environment, Statement, Vocabulary, truth_set
from .stack import StackState, ground
from .temporal import Trajectory, co_inst, co_inst_table, occurs, occurs_table, window

__all__ = [
    "DEFAULT_ENVIRONMENT_CAP",
    "OccurWitness",
    "CoInstWitness",
    "GapReport",
    "PhenClaim",
    "ChordVerdict",
    "ArpeggioVerdict",
    "ContributorModel",
    "Scheduler",
    "ExperimentRecord",
    "w_ing",
    "w_co",
    "occur_witness",
    "coinst_witness",
    "gap_report",
    "verify_report",
    "chord_check",
    "arpeggio_check",
    "build_contributor_env",
    "simulate",
    "activation_sets",
    "capacity_experiment",
]

DEFAULT_ENVIRONMENT_CAP = 2**20


@dataclass(frozen=True)
class OccurWitness:
    """Window ``(t, delta)`` and, per ingredient, the first position where it holds."""

    t: int
    delta: int
    positions: dict[int, int]


@dataclass(frozen=True)
class CoInstWitness:
    """Window ``(t, delta)`` and a time ``u`` inside it where the conjunction holds."""

    t: int
    delta: int
    u: int


def _first_true(table: np.ndarray):
    cols = np.flatnonzero(table.any(axis=0))
    if cols.size == 0:
        return None
    d = int(cols[0])
    t = int(np.flatnonzero(table[:, d])[0])
    return t, d


def _positions(l, v, tau, t, delta):
    pos = {}
    for i in l:
        p = v[i]
        pos[i] = next(u for u in range(t, t + delta + 1) if tau[u] in p)
    return pos


def occur_witness(g0: Statement, v: Vocabulary, tau: Trajectory, delta_max: int | None = None) -> OccurWitness | None:
    hit = _first_true(occurs_table(g0, v, tau, delta_max))
    if hit is None:
        return None
    t, d = hit
    return OccurWitness(t, d, _positions(g0, v, tau, t, d))


def coinst_witness(g0: Statement, v: Vocabulary, tau: Trajectory, delta_max: int | None = None) -> CoInstWitness | None:
    hit = _first_true(co_inst_table(g0, v, tau, delta_max))
    if hit is None:
        return None
    t, d = hit
    truth = truth_set(g0, v)
    u = next(u for u in range(t, t + d + 1) if tau[u] in truth)
    return CoInstWitness(t, d, u)


def w_ing(g0: Statement, v: Vocabulary, tau: Trajectory, delta_max: int | None = None) -> int | None:
    """Least horizon at which every ingredient occurs in some window, else None."""
    w = occur_witness(g0, v, tau, delta_max)
    return None if w is None else w.delta


def w_co(g0: Statement, v: Vocabulary, tau: Trajectory, delta_max: int | None = None) -> int | None:
    """Least horizon at which some window contains a state of the truth set, else None."""
    w = coinst_witness(g0, v, tau, delta_max)
    return None if w is None else w.delta


@dataclass(frozen=True)
class GapReport:
    content: Statement
    w_ing: int | None
    w_co: int | None
    occur_witness: OccurWitness | None
    coinst_witness: CoInstWitness | None
    horizon: int

    @property
    def strict_gap(self) -> bool:
        return self.w_ing is not None and (self.w_co is None or self.w_ing < self.w_co)

    def to_dict(self, v: Vocabulary | None = None) -> dict:
        d = {
            "content": sorted(self.content),
            "w_ing": self.w_ing,
            "w_co": self.w_co,
            "strict_gap": self.strict_gap,
            "horizon": self.horizon,
            "occur_witness": None,
            "coinst_witness": None,
        }
        if v is not None:
            d["content_programs"] = [v[i].labels() for i in self.content]
        if self.occur_witness is not None:
            w = self.occur_witness
            d["occur_witness"] = {
                "t": w.t,
                "delta": w.delta,
                "positions": {str(k): u for k, u in sorted(w.positions.items())},
            }
        if self.coinst_witness is not None:
            d["coinst_witness"] = asdict(self.coinst_witness)
        return d


def _gap(g0, v, tau, delta_max):
    ow = occur_witness(g0, v, tau, delta_max)
    cw = coinst_witness(g0, v, tau, delta_max)
    horizon = len(tau) - 1 if delta_max is None else min(delta_max, len(tau) - 1)
    return GapReport(
        content=g0,
        w_ing=None if ow is None else ow.delta,
        w_co=None if cw is None else cw.delta,
        occur_witness=ow,
        coinst_witness=cw,
        horizon=horizon,
    )


def gap_report(stack: StackState, l: Statement, tau: Trajectory, delta_max: int | None = None) -> GapReport:
    """Ground ``l`` through ``stack`` and measure both horizons on ``tau``."""
    g0 = ground(stack, l).grounded
    return _gap(g0, stack.base, tau, delta_max)


def verify_report(report: GapReport, v: Vocabulary, tau: Trajectory) -> bool:
    """Replay the report's witnesses through the pointwise window predicates."""
    g0 = report.content
    ow, cw = report.occur_witness, report.coinst_witness
    if (ow is None) != (report.w_ing is None) or (cw is None) != (report.w_co is None):
        return False
    if ow is not None:
        if not occurs(g0, v, tau, ow.t, ow.delta):
            return False
        if any(not ow.t <= u <= ow.t + ow.delta or tau[u] not in v[i] for i, u in ow.positions.items()):
            return False
        if ow.delta > 0 and any(occurs(g0, v, tau, t, ow.delta - 1) for t in range(len(tau) - ow.delta + 1)):
            return False
    if cw is not None:
        if not co_inst(g0, v, tau, cw.t, cw.delta):
            return False
        if not cw.t <= cw.u <= cw.t + cw.delta or tau[cw.u] not in truth_set(g0, v):
            return False
        if cw.delta > 0 and any(co_inst(g0, v, tau, t, cw.delta - 1) for t in range(len(tau) - cw.delta + 1)):
            return False
    return True


@dataclass(frozen=True)
class PhenClaim:
    """A claim that ``moment`` (over the top vocabulary) is realised at window ``(t, delta)``."""

    moment: Statement
    t: int
    delta: int
    name: str = ""


CHORD_CONSISTENT = "consistent with Chord"
CHORD_VIOLATION = "violates Chord necessary condition"
ARPEGGIO_VIOLATION = "violates Arpeggio"
ARPEGGIO_SMEARED = "smeared"
ARPEGGIO_COINST = "co-instantiated"


@dataclass(frozen=True)
class ChordVerdict:
    claim: PhenClaim
    grounded: Statement
    verdict: str
    truth_mask: tuple[bool, ...]
    witness: CoInstWitness | None

    @property
    def consistent(self) -> bool:
        return self.verdict == CHORD_CONSISTENT


@dataclass(frozen=True)
class ArpeggioVerdict:
    claim: PhenClaim
    grounded: Statement
    verdict: str
    truth_mask: tuple[bool, ...]
    ingredient_masks: dict[int, tuple[bool, ...]]

    @property
    def consistent(self) -> bool:
        return self.verdict != ARPEGGIO_VIOLATION


def _claim_window(claim, tau):
    if claim.t < 0 or claim.delta < 0 or claim.t + claim.delta > len(tau) - 1:
        raise ClaimBoundsError(
            f"claim {claim.name or claim!r} window t={claim.t}, delta={claim.delta} "
            f"does not fit a trajectory of length {len(tau)}"
        )
    return window(tau, claim.t, claim.delta)


def chord_check(claims: Iterable[PhenClaim], stack: StackState, tau: Trajectory) -> list[ChordVerdict]:
    out = []
    for claim in claims:
        sigma = _claim_window(claim, tau)
        g0 = ground(stack, claim.moment).grounded
        truth = truth_set(g0, stack.base)
        mask = tuple(s in truth for s in sigma)
        if any(mask):
            k = mask.index(True)
            out.append(ChordVerdict(claim, g0, CHORD_CONSISTENT, mask,
                                    CoInstWitness(claim.t, claim.delta, claim.t + k)))
        else:
            out.append(ChordVerdict(claim, g0, CHORD_VIOLATION, mask, None))
    return out


def arpeggio_check(claims: Iterable[PhenClaim], stack: StackState, tau: Trajectory) -> list[ArpeggioVerdict]:
    out = []
    v = stack.base
    for claim in claims:
        sigma = _claim_window(claim, tau)
        g0 = ground(stack, claim.moment).grounded
        truth = truth_set(g0, v)
        mask = tuple(s in truth for s in sigma)
        ing = {i: tuple(s in v[i] for s in sigma) for i in g0}
        if not all(any(m) for m in ing.values()):
            verdict = ARPEGGIO_VIOLATION
        elif any(mask):
            verdict = ARPEGGIO_COINST
        else:
            verdict = ARPEGGIO_SMEARED
        out.append(ArpeggioVerdict(claim, g0, verdict, mask, ing))
    return out


# -- contributor model -------------------------------------------------------


@dataclass(frozen=True)
class ContributorModel:
    """``n`` contributors over ``data_size`` data values with capacity ``c``.

    States are pairs ``(x, A)`` flattened as ``x * 2**n + bits(A)``, where
    contributor ``i`` (1-based) is bit ``i - 1``.
    """

    n: int
    data_size: int = 2
    capacity: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a contributor model needs n >= 2")
        if self.data_size < 1:
            raise ValueError("data_size must be at least 1")
        if not 1 <= self.capacity <= self.n:
            raise ValueError(f"capacity must lie in 1..{self.n}, got {self.capacity}")

    @property
    def env_size(self) -> int:
        return self.data_size * 2**self.n

    def state(self, x: int, active: Iterable[int]) -> int:
        bits = 0
        for i in active:
            if not 1 <= i <= self.n:
                raise ValueError(f"contributor {i} out of range 1..{self.n}")
            bits |= 1 << (i - 1)
        return (x % self.data_size) * 2**self.n + bits

    def decode(self, state: int) -> tuple[int, frozenset[int]]:
        x, bits = divmod(state, 2**self.n)
        return x, frozenset(i + 1 for i in range(self.n) if bits >> i & 1)

    def label(self, state: int) -> str:
        x, a = self.decode(state)
        return f"{x}:{{{','.join(map(str, sorted(a)))}}}"


def build_contributor_env(m: ContributorModel, cap: int = DEFAULT_ENVIRONMENT_CAP
                          ) -> tuple[Environment, Vocabulary, Statement]:
    """Environment of ``(x, A)`` pairs, vocabulary ``p_1..p_n`` and the full conjunction ``l_n``.

    ``p_i`` sits at vocabulary index ``i - 1``.
    """
    if m.env_size > cap:
        raise EnumerationBudgetError("contributor environment", m.env_size, cap)
    env = Environment(m.env_size, tuple(m.label(s) for s in range(m.env_size)))
    programs = []
    for i in range(1, m.n + 1):
        members = [s for s in range(m.env_size) if s >> (i - 1) & 1]
        programs.append(env.program(members))
    v = Vocabulary(env, programs)
    assert all(v[i - 1] == programs[i - 1] for i in range(1, m.n + 1))
    return env, v, Statement(frozenset(range(m.n)))


SCHEDULER_KINDS = ("round-robin", "uniform-random", "bursty")


@dataclass(frozen=True)
class Scheduler:
    """Generator of activation sets, each of size at most the capacity."""

    kind: str = "round-robin"
    seed: int = 0
    burst_length: int = 1

    def __post_init__(self):
        if self.kind not in SCHEDULER_KINDS:
            raise ValueError(f"unknown scheduler kind {self.kind!r}; expected one of {SCHEDULER_KINDS}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.burst_length < 1:
            raise ValueError("burst_length must be at least 1")

    def activations(self, n: int, c: int, steps: int) -> list[frozenset[int]]:
        if self.kind == "round-robin":
            blocks = [frozenset(range(k, min(k + c, n + 1))) for k in range(1, n + 1, c)]
            return [blocks[t % len(blocks)] for t in range(steps)]
        rng = random.Random(self.seed)
        choices = [frozenset(i + 1 for i in range(n) if bits >> i & 1)
                   for bits in range(2**n) if bin(bits).count("1") <= c]
        if self.kind == "uniform-random":
            return [rng.choice(choices) for _ in range(steps)]
        out = []
        while len(out) < steps:
            out.extend([rng.choice(choices)] * self.burst_length)
        return out[:steps]

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "seed": self.seed}
        if self.kind == "bursty":
            d["burst_length"] = self.burst_length
        return d


def simulate(m: ContributorModel, scheduler: Scheduler, steps: int) -> Trajectory:
    """Run ``scheduler`` for ``steps`` steps.

    The data component is a step counter modulo ``data_size``; with
    ``data_size >= 2`` consecutive states always differ even when the
    activation set repeats.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    acts = scheduler.activations(m.n, m.capacity, steps)
    for t, a in enumerate(acts):
        if len(a) > m.capacity:
            raise TheoremViolationError(f"scheduler exceeded capacity {m.capacity} at step {t}: {sorted(a)}")
    env, _, _ = build_contributor_env(m)
    return Trajectory(tuple(m.state(t, a) for t, a in enumerate(acts)), env)


def activation_sets(m: ContributorModel, tau: Trajectory) -> list[frozenset[int]]:
    return [m.decode(s)[1] for s in tau]


def _covering_windows(acts: Sequence[frozenset[int]], n: int, delta_max: int) -> np.ndarray:
    # Direct scan of activation sets, independent of the program machinery.
    T = len(acts)
    full = frozenset(range(1, n + 1))
    out = np.zeros((T, delta_max + 1), dtype=bool)
    for t in range(T):
        seen = set()
        for d in range(min(delta_max, T - 1 - t) + 1):
            seen |= acts[t + d]
            if seen >= full:
                out[t, d:min(delta_max, T - 1 - t) + 1] = True
                break
    return out


@dataclass(frozen=True)
class ExperimentRecord:
    model: ContributorModel
    scheduler: Scheduler
    steps: int
    delta_max: int
    activations: tuple[tuple[int, ...], ...]
    gap: GapReport
    co_inst_windows: int
    covering_windows: int
    occurs_on_covering: bool
    theorem_checked: bool

    @property
    def w_ing(self) -> int | None:
        return self.gap.w_ing

    @property
    def w_co(self) -> int | None:
        return self.gap.w_co

    def to_dict(self) -> dict:
        return {
            "n": self.model.n,
            "capacity": self.model.capacity,
            "data_size": self.model.data_size,
            "scheduler": self.scheduler.to_dict(),
            "steps": self.steps,
            "delta_max": self.delta_max,
            "activations": [list(a) for a in self.activations],
            "w_ing": self.gap.w_ing,
            "w_co": self.gap.w_co,
            "strict_gap": self.gap.strict_gap,
            "occur_witness": self.gap.to_dict()["occur_witness"],
            "coinst_witness": self.gap.to_dict()["coinst_witness"],
            "co_inst_windows": self.co_inst_windows,
            "covering_windows": self.covering_windows,
            "occurs_on_covering": self.occurs_on_covering,
            "theorem_checked": self.theorem_checked,
        }


def capacity_experiment(m: ContributorModel, scheduler: Scheduler, steps: int,
                        delta_max: int | None = None) -> ExperimentRecord:
    """Simulate and check the capacity threshold on every window.

    Raises
    ------
    TheoremViolationError
        If a capacity-limited run co-instantiates the full conjunction, or a
        window in which every contributor fires fails ingredient-wise
        occurrence.
    """
    tau = simulate(m, scheduler, steps)
    _, v, ln = build_contributor_env(m)
    dm = len(tau) - 1 if delta_max is None else min(delta_max, len(tau) - 1)
    co = co_inst_table(ln, v, tau, dm)
    oc = occurs_table(ln, v, tau, dm)
    acts = activation_sets(m, tau)
    cover = _covering_windows(acts, m.n, dm)
    if m.capacity < m.n and co.any():
        t, d = map(int, np.argwhere(co)[0])
        raise TheoremViolationError(f"capacity {m.capacity} < n={m.n} yet co-instantiated at t={t}, delta={d}")
    bad = cover & ~oc
    if bad.any():
        t, d = map(int, np.argwhere(bad)[0])
        raise TheoremViolationError(f"every contributor fires in window t={t}, delta={d} but occurs fails")
    return ExperimentRecord(
        model=m,
        scheduler=scheduler,
        steps=steps,
        delta_max=dm,
        activations=tuple(tuple(sorted(a)) for a in acts),
        gap=_gap(ln, v, tau, dm),
        co_inst_windows=int(co.sum()),
        covering_windows=int(cover.sum()),
        occurs_on_covering=bool((oc | ~cover).all()),
        theorem_checked=m.capacity < m.n,
    )
