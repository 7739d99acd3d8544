"""Scikit-learn style wrappers around the schedulers.

The estimators treat a channel matrix as a feature matrix whose columns
are devices: ``fit`` runs the scheduler, ``transform`` keeps the
scheduled columns. That makes the schedulers composable with sklearn
model-selection and pipeline tooling (``clone``, ``get_params``,
grid search over ``gamma`` and ``delta``).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import validation
from .scheduling import (
    exhaustive_oracle,
    schedule_mp,
    schedule_mp_bidirectional,
    schedule_random,
)


class _SchedulerEstimator(TransformerMixin, BaseEstimator):
    """Shared fit/transform plumbing; subclasses pick the algorithm."""

    def __init__(self, gamma=1.0, phis=None, record_trace=False):
        self.gamma = gamma
        self.phis = phis
        self.record_trace = record_trace

    def _schedule(self, x):
        raise NotImplementedError

    def fit(self, X, y=None):
        """Run the scheduler on a channel matrix X of shape
        (n_antennas, n_devices). y is ignored.
        """
        x = validation.as_complex_matrix(X, "X")
        outcome = self._schedule(x)
        self.n_features_in_ = x.shape[1]
        self.outcome_ = outcome
        self.devices_ = outcome.devices
        self.receiver_ = outcome.receiver
        self.n_iter_ = outcome.iterations
        self.status_ = outcome.status
        support = np.zeros(x.shape[1], dtype=bool)
        support[list(outcome.devices)] = True
        self.support_ = support
        return self

    def transform(self, X):
        """Select the scheduled device columns of X."""
        if not hasattr(self, "support_"):
            raise RuntimeError("estimator is not fitted; call fit first")
        x = validation.as_complex_matrix(X, "X")
        if x.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {x.shape[1]} devices, fit saw {self.n_features_in_}"
            )
        return x[:, self.support_]

    def get_support(self, indices: bool = False):
        if not hasattr(self, "support_"):
            raise RuntimeError("estimator is not fitted; call fit first")
        return np.flatnonzero(self.support_) if indices else self.support_


class MatchingPursuitScheduler(_SchedulerEstimator):
    """Backward matching-pursuit device selection.

    Parameters mirror schedule_mp: ``gamma`` is the linear equalization
    threshold, ``delta`` the subset-cutting weight, ``phis`` optional
    per-device aggregation weights. ``bidirectional=True`` enables
    readmission.

    Attributes set by fit: ``support_`` (boolean mask over devices),
    ``devices_``, ``receiver_``, ``n_iter_``, ``status_``, ``outcome_``.
    """

    def __init__(self, gamma=1.0, delta=0.05, phis=None, bidirectional=False,
                 record_trace=False):
        super().__init__(gamma=gamma, phis=phis, record_trace=record_trace)
        self.delta = delta
        self.bidirectional = bidirectional

    def _schedule(self, x):
        algo = schedule_mp_bidirectional if self.bidirectional else schedule_mp
        return algo(x, self.phis, self.gamma, policy=self.delta,
                    record_trace=self.record_trace)


class RandomEliminationScheduler(_SchedulerEstimator):
    """Baseline scheduler with uniform random removals."""

    def __init__(self, gamma=1.0, delta=0.05, phis=None, random_state=None,
                 record_trace=False):
        super().__init__(gamma=gamma, phis=phis, record_trace=record_trace)
        self.delta = delta
        self.random_state = random_state

    def _schedule(self, x):
        rng = np.random.default_rng(self.random_state)
        return schedule_random(x, self.phis, self.gamma, rng=rng,
                               policy=self.delta,
                               record_trace=self.record_trace)


class ExhaustiveOracleScheduler(_SchedulerEstimator):
    """Subset-enumeration oracle, for at most 12 devices."""

    def __init__(self, gamma=1.0, phis=None, n_candidates=16, random_state=None):
        super().__init__(gamma=gamma, phis=phis, record_trace=False)
        self.n_candidates = n_candidates
        self.random_state = random_state

    def _schedule(self, x):
        rng = np.random.default_rng(self.random_state)
        return exhaustive_oracle(x, self.phis, self.gamma,
                                 n_candidates=self.n_candidates, rng=rng)
