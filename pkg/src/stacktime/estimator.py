"""Scikit-learn style front end for the Temporal Gap metrics.

:class:`TemporalGapAnalyzer` treats a batch of trajectories as samples:
``fit`` grounds the content once, ``transform`` returns one
``(w_ing, w_co)`` row per trajectory and ``predict`` flags the strict gap
pattern. Undefined horizons are ``nan``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .kernel import Statement, Vocabulary, truth_set
from .stack import StackState, ground
from .temporal import Trajectory, co_inst_table, occurs_table

__all__ = ["TemporalGapAnalyzer", "check_trajectory", "check_trajectories"]


def check_trajectory(states, env) -> Trajectory:
    """Coerce ``states`` to a :class:`Trajectory` over ``env``.

    Accepts an existing trajectory, or any 1-d sequence of state indices
    or labels.
    """
    if isinstance(states, Trajectory):
        if states.env != env:
            raise ValueError("trajectory belongs to a different environment")
        return states
    if isinstance(states, np.ndarray):
        if states.ndim != 1:
            raise ValueError(f"expected a 1-d state sequence, got shape {states.shape}")
        states = states.tolist()
    return Trajectory(tuple(states), env)


def check_trajectories(X, env) -> list[Trajectory]:
    if isinstance(X, (Trajectory, str)) or (isinstance(X, np.ndarray) and X.ndim == 1):
        raise ValueError("expected a collection of trajectories, got a single sequence")
    out = [check_trajectory(x, env) for x in X]
    if not out:
        raise ValueError("need at least one trajectory")
    return out


class TemporalGapAnalyzer(TransformerMixin, BaseEstimator):
    """Measure ingredient-wise and co-instantiated horizons of a content.

    Parameters
    ----------
    stack : StackState
        Stack whose base vocabulary the trajectories are read against.
    content : Statement
        Moment statement over the top vocabulary of ``stack``.
    delta_max : int, optional
        Largest horizon to scan. None scans up to ``len(trajectory) - 1``.

    Attributes
    ----------
    grounded_ : Statement
        The content grounded to the base vocabulary.
    truth_set_ : Program
        Truth set of ``grounded_``.
    """

    def __init__(self, stack=None, content=None, delta_max=None):
        self.stack = stack
        self.content = content
        self.delta_max = delta_max

    def _validate_params(self):
        if not isinstance(self.stack, StackState):
            raise TypeError("stack must be a StackState")
        if not isinstance(self.content, Statement):
            raise TypeError("content must be a Statement")
        if self.delta_max is not None and (not isinstance(self.delta_max, (int, np.integer)) or self.delta_max < 0):
            raise ValueError(f"delta_max must be a non-negative int or None, got {self.delta_max!r}")

    def fit(self, X=None, y=None):
        """Ground the content. ``X`` is only validated, if given."""
        self._validate_params()
        self.grounded_ = ground(self.stack, self.content).grounded
        self.vocabulary_: Vocabulary = self.stack.base
        self.truth_set_ = truth_set(self.grounded_, self.vocabulary_)
        if X is not None:
            check_trajectories(X, self.vocabulary_.env)
        return self

    def _scan(self, tau):
        oc = occurs_table(self.grounded_, self.vocabulary_, tau, self.delta_max)
        co = co_inst_table(self.grounded_, self.vocabulary_, tau, self.delta_max)
        wi = np.flatnonzero(oc.any(axis=0))
        wc = np.flatnonzero(co.any(axis=0))
        return (wi[0] if wi.size else np.nan, wc[0] if wc.size else np.nan)

    def transform(self, X):
        """Return an array of shape ``(n_trajectories, 2)`` holding ``w_ing, w_co``."""
        check_is_fitted(self, "grounded_")
        taus = check_trajectories(X, self.vocabulary_.env)
        return np.array([self._scan(t) for t in taus], dtype=float).reshape(len(taus), 2)

    def predict(self, X):
        """True where the trajectory shows the strict gap pattern."""
        w = self.transform(X)
        wi, wc = w[:, 0], w[:, 1]
        return ~np.isnan(wi) & (np.isnan(wc) | (wi < np.nan_to_num(wc, nan=np.inf)))

    def get_feature_names_out(self, input_features=None):
        return np.array(["w_ing", "w_co"], dtype=object)
