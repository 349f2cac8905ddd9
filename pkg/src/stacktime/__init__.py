"""Finite-model kernel for layered statements, windowed time and the Temporal Gap."""

__version__ = "0.1.0"

from .exceptions import (
    ChangeConstraintError,
    ClaimBoundsError,
    EnumerationBudgetError,
    GroundingError,
    InvalidStatementError,
    InvalidTaskError,
    ModelError,
    StackTimeError,
    TheoremViolationError,
    WindowBoundsError,
)
from .kernel import (
    Environment,
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
from .stack import GroundingTrace, StackState, abstractor, build_stack, ground, ground_one, validate_stack
from .temporal import (
    LayerClock,
    Trajectory,
    Window,
    box_holds,
    co_inst,
    diamond_holds,
    encode,
    enumerate_windows,
    layer_clock,
    layer_trajectory,
    occurs,
    sparse_example,
    window,
)
from .gap import (
    ContributorModel,
    GapReport,
    PhenClaim,
    Scheduler,
    arpeggio_check,
    build_contributor_env,
    capacity_experiment,
    chord_check,
    gap_report,
    simulate,
    w_co,
    w_ing,
)
from .estimator import TemporalGapAnalyzer
