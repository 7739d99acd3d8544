"""Sklearn-wrapper behaviour: params, clone, fit attributes, transform."""

import numpy as np
import pytest
from sklearn.base import clone

from airsched import (
    ExhaustiveOracleScheduler,
    MatchingPursuitScheduler,
    RandomEliminationScheduler,
    sample_iid_gaussian,
    schedule_mp,
    schedule_mp_bidirectional,
    schedule_random,
)


@pytest.fixture
def channel():
    rng = np.random.default_rng(42)
    return sample_iid_gaussian(4, 8, rng)


class TestParams:
    def test_get_params_round_trip(self):
        est = MatchingPursuitScheduler(gamma=2.5, delta=0.2, bidirectional=True)
        params = est.get_params()
        assert params["gamma"] == 2.5
        assert params["delta"] == 0.2
        assert params["bidirectional"] is True
        assert params["phis"] is None
        rebuilt = MatchingPursuitScheduler(**params)
        assert rebuilt.get_params() == params

    def test_set_params_changes_behaviour(self, channel):
        est = MatchingPursuitScheduler(gamma=10.0).fit(channel)
        all_in = est.support_.sum()
        est.set_params(gamma=0.05).fit(channel)
        assert est.support_.sum() < all_in

    def test_clone_is_unfitted(self, channel):
        est = MatchingPursuitScheduler(gamma=1.0).fit(channel)
        fresh = clone(est)
        assert fresh.get_params() == est.get_params()
        assert not hasattr(fresh, "support_")

    def test_oracle_params(self):
        est = ExhaustiveOracleScheduler(gamma=0.5, n_candidates=4, random_state=3)
        params = est.get_params()
        assert params["n_candidates"] == 4
        assert params["random_state"] == 3


class TestFit:
    def test_fit_attributes_match_plain_scheduler(self, channel):
        est = MatchingPursuitScheduler(gamma=0.8).fit(channel)
        ref = schedule_mp(channel, None, 0.8)
        assert est.devices_ == ref.devices
        assert est.n_iter_ == ref.iterations
        assert est.status_ == ref.status
        assert np.array_equal(est.receiver_, ref.receiver)
        assert est.n_features_in_ == 8
        assert np.flatnonzero(est.support_).tolist() == list(ref.devices)

    def test_bidirectional_flag(self, channel):
        est = MatchingPursuitScheduler(gamma=0.4, bidirectional=True).fit(channel)
        ref = schedule_mp_bidirectional(channel, None, 0.4)
        assert est.devices_ == ref.devices

    def test_fit_returns_self(self, channel):
        est = MatchingPursuitScheduler()
        assert est.fit(channel) is est

    def test_record_trace_exposes_steps(self, channel):
        est = MatchingPursuitScheduler(gamma=0.8, record_trace=True).fit(channel)
        assert est.outcome_.trace is not None
        assert len(est.outcome_.trace) == est.n_iter_


class TestTransform:
    def test_selects_scheduled_columns(self, channel):
        est = MatchingPursuitScheduler(gamma=0.6).fit(channel)
        out = est.transform(channel)
        assert np.array_equal(out, channel[:, list(est.devices_)])

    def test_fit_transform(self, channel):
        est = MatchingPursuitScheduler(gamma=0.6)
        out = est.fit_transform(channel)
        assert out.shape == (4, len(est.devices_))

    def test_transform_new_matrix_same_width(self, channel):
        est = MatchingPursuitScheduler(gamma=0.6).fit(channel)
        other = sample_iid_gaussian(4, 8, np.random.default_rng(7))
        out = est.transform(other)
        assert np.array_equal(out, other[:, est.support_])

    def test_width_mismatch_rejected(self, channel):
        est = MatchingPursuitScheduler(gamma=0.6).fit(channel)
        with pytest.raises(ValueError, match="devices"):
            est.transform(channel[:, :5])

    def test_unfitted_raises(self, channel):
        est = MatchingPursuitScheduler()
        with pytest.raises(RuntimeError, match="not fitted"):
            est.transform(channel)
        with pytest.raises(RuntimeError, match="not fitted"):
            est.get_support()

    def test_get_support_forms(self, channel):
        est = MatchingPursuitScheduler(gamma=0.6).fit(channel)
        mask = est.get_support()
        idx = est.get_support(indices=True)
        assert mask.dtype == bool
        assert np.array_equal(np.flatnonzero(mask), idx)
        assert tuple(idx) == est.devices_


class TestRandomElimination:
    def test_random_state_reproducible(self, channel):
        a = RandomEliminationScheduler(gamma=0.3, random_state=11).fit(channel)
        b = RandomEliminationScheduler(gamma=0.3, random_state=11).fit(channel)
        assert a.devices_ == b.devices_

    def test_matches_schedule_random(self, channel):
        est = RandomEliminationScheduler(gamma=0.3, random_state=5).fit(channel)
        ref = schedule_random(channel, None, 0.3,
                              rng=np.random.default_rng(5))
        assert est.devices_ == ref.devices


class TestOracle:
    def test_oracle_at_least_as_large_as_mp(self, channel):
        gamma = 0.5
        mp = MatchingPursuitScheduler(gamma=gamma).fit(channel)
        oracle = ExhaustiveOracleScheduler(gamma=gamma, random_state=0).fit(channel)
        assert oracle.support_.sum() >= mp.support_.sum()
