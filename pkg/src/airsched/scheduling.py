"""Matching-pursuit device scheduling.

The scheduler peels devices off one at a time. Each pass reweights the
channel columns by whether their equalization constraint
``phi_k^2 <= gamma |h_k^H c|^2`` held under the previous receiver
(violators get a small weight ``delta``, satisfied devices ``1 - delta``),
recomputes the receive beamformer as the leading left singular vector of
the weighted channel, and drops the device with the largest constraint
violation. The loop stops as soon as every remaining device satisfies
its constraint, which certifies the returned set.

A bidirectional variant may readmit previously removed devices whose
constraint turns out to hold under the current receiver, and a random
variant replaces the violation-guided removal with a uniform draw; both
share this engine so their per-pass arithmetic is identical.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import validation
from .linalg import PowerIterationError, leading_left_singular_pair, random_unit_vector

STATUS_FEASIBLE = "feasible"
STATUS_EMPTY = "empty"


@dataclass(frozen=True)
class WeightPolicy:
    """Subset-cutting weight rule.

    Devices whose constraint indicator is positive (violated) get weight
    ``delta``; satisfied devices get ``1 - delta``. Small ``delta``
    focuses the receiver on the devices that already fit.
    """

    delta: float = 0.05

    def __post_init__(self):
        d = float(self.delta)
        if not 0.0 < d < 1.0:
            raise ValueError(f"delta must lie strictly inside (0, 1), got {self.delta}")
        object.__setattr__(self, "delta", d)

    def weights(self, indicators) -> np.ndarray:
        ind = np.asarray(indicators, dtype=np.float64)
        return np.where(ind > 0.0, self.delta, 1.0 - self.delta)


@dataclass(frozen=True)
class SchedulerStep:
    """One elimination pass, as recorded in an outcome trace.

    ``active`` is the candidate set the receiver was computed for,
    ``removed`` the device dropped at the end of the pass (None on the
    terminal pass), ``readmitted`` any devices pulled back in by the
    bidirectional rule before the removal decision.
    """

    iteration: int
    active: tuple
    weights: np.ndarray = field(repr=False)
    receiver: np.ndarray = field(repr=False)
    indicators: np.ndarray = field(repr=False)
    worst: float = float("nan")
    removed: int | None = None
    readmitted: tuple = ()


@dataclass(frozen=True)
class ScheduleOutcome:
    """Result of a scheduling run.

    ``status`` is "feasible" when the returned devices satisfy their
    constraints under ``receiver``, or "empty" when every device was
    eliminated. ``iterations`` counts receiver updates. ``trace`` holds
    SchedulerStep records when requested, else None.
    """

    devices: tuple
    receiver: np.ndarray | None
    iterations: int
    status: str
    trace: list | None = field(default=None, repr=False)

    @property
    def is_empty(self) -> bool:
        return self.status == STATUS_EMPTY

    @property
    def size(self) -> int:
        return len(self.devices)


def constraint_indicators(h, receiver, phis, gamma) -> np.ndarray:
    """Per-device constraint gap ``F_k = phi_k^2 - gamma |h_k^H c|^2``.

    Positive entries mark devices whose inversion would exceed the power
    budget at equalization level ``gamma``. Accepts ``gamma = inf`` as a
    schedule-everything sentinel; a zero effective channel then still
    reads as violated.
    """
    proj = np.asarray(h).conj().T @ np.asarray(receiver)
    gains = np.abs(proj) ** 2
    with np.errstate(invalid="ignore"):
        penalty = np.where(gains > 0.0, gamma * gains, 0.0)
    return np.asarray(phis, dtype=np.float64) ** 2 - penalty


def next_removal_index(indicators, active) -> int:
    """Device to eliminate next: the worst violator in ``active``.

    Ties break toward the lowest device index. ``indicators`` is the
    full-length constraint-gap vector, ``active`` the candidate indices.
    """
    ind = validation.as_real_vector(np.asarray(indicators, dtype=np.float64), "indicators")
    idx = np.sort(np.asarray(list(active), dtype=np.intp))
    if idx.size == 0:
        raise ValueError("active set must be non-empty")
    if idx[0] < 0 or idx[-1] >= ind.shape[0]:
        raise ValueError("active indices out of range")
    return int(idx[np.argmax(ind[idx])])


def _as_policy(policy) -> WeightPolicy:
    if policy is None:
        return WeightPolicy()
    if isinstance(policy, WeightPolicy):
        return policy
    return WeightPolicy(delta=float(policy))


def _validated_problem(h, phis, gamma):
    h = validation.as_complex_matrix(h, "h")
    norms = np.linalg.norm(h, axis=0)
    if np.any(norms == 0.0):
        dead = int(np.flatnonzero(norms == 0.0)[0])
        raise ValueError(f"device {dead} has an identically zero channel column")
    phis = validation.as_positive_weights(1.0 if phis is None else phis, h.shape[1], "phis")
    gamma = validation.check_positive_scalar(gamma, "gamma", allow_inf=True)
    return h, phis, gamma


def _plain_receiver_step(h):
    """Receiver update for a fixed channel: leading left singular vector
    of the column-weighted matrix. A non-converged power iteration still
    carries a usable iterate, so it is used rather than aborting the run.
    """

    def step(weights):
        amplified = h * np.sqrt(weights)
        try:
            pair = leading_left_singular_pair(amplified)
            return pair.vector, h
        except PowerIterationError as err:
            return err.vector, h

    return step


def _run_elimination(h, phis, gamma, policy, receiver_step, *, bidirectional=False,
                     removal_rng=None, record_trace=False, max_passes=None):
    n_devices = h.shape[1]
    active = np.ones(n_devices, dtype=bool)
    # All constraints are presumed violated before the first receiver
    # exists, so the first pass weights every device by delta.
    indicators = np.ones(n_devices)
    if max_passes is None:
        max_passes = 4 * n_devices if bidirectional else n_devices + 1
    trace = [] if record_trace else None
    receiver = None

    for iteration in range(max_passes):
        if not active.any():
            return ScheduleOutcome((), None, iteration, STATUS_EMPTY, trace)
        weights = np.where(active, policy.weights(indicators), 0.0)
        receiver, channel = receiver_step(weights)
        indicators = constraint_indicators(channel, receiver, phis, gamma)
        readmitted = ()
        if bidirectional:
            back = (~active) & (indicators <= 0.0)
            if back.any():
                readmitted = tuple(int(i) for i in np.flatnonzero(back))
                active[back] = True
        worst = float(np.max(np.where(active, indicators, -np.inf)))
        removed = None
        if worst > 0.0:
            if removal_rng is None:
                removed = next_removal_index(indicators, np.flatnonzero(active))
            else:
                removed = int(removal_rng.choice(np.flatnonzero(active)))
        if record_trace:
            trace.append(SchedulerStep(
                iteration=iteration,
                active=tuple(int(i) for i in np.flatnonzero(active)),
                weights=weights,
                receiver=receiver,
                indicators=indicators.copy(),
                worst=worst,
                removed=removed,
                readmitted=readmitted,
            ))
        if worst <= 0.0:
            devices = tuple(int(i) for i in np.flatnonzero(active))
            return ScheduleOutcome(devices, receiver, iteration + 1, STATUS_FEASIBLE, trace)
        active[removed] = False

    # Pass budget exhausted, which only happens when readmissions keep the
    # loop cycling. The last indicators still certify the surviving set if
    # nothing in it is violated under the last receiver.
    if receiver is not None and active.any():
        worst = float(np.max(np.where(active, indicators, -np.inf)))
        if worst <= 0.0:
            devices = tuple(int(i) for i in np.flatnonzero(active))
            return ScheduleOutcome(devices, receiver, max_passes, STATUS_FEASIBLE, trace)
    return ScheduleOutcome((), receiver, max_passes, STATUS_EMPTY, trace)


def schedule_mp(h, phis=None, gamma=1.0, policy=None, record_trace=False,
                max_passes=None) -> ScheduleOutcome:
    """Backward matching-pursuit scheduling.

    Args:
        h: channel matrix, shape (n_antennas, n_devices), no zero columns.
        phis: aggregation weights, positive, length n_devices; None means
            uniform.
        gamma: equalization threshold (linear scale, not dB); ``inf``
            admits every device with a non-orthogonal channel.
        policy: WeightPolicy, a bare delta float, or None for the default.
        record_trace: attach per-pass SchedulerStep records.
        max_passes: override the pass budget (defaults to n_devices + 1).

    Returns:
        ScheduleOutcome; when ``status`` is "feasible" the receiver
        certifies every returned device, i.e. all indicators <= 0.
    """
    h, phis, gamma = _validated_problem(h, phis, gamma)
    policy = _as_policy(policy)
    return _run_elimination(h, phis, gamma, policy, _plain_receiver_step(h),
                            record_trace=record_trace, max_passes=max_passes)


def schedule_mp_bidirectional(h, phis=None, gamma=1.0, policy=None,
                              record_trace=False, max_passes=None) -> ScheduleOutcome:
    """Matching pursuit with readmission.

    After each receiver update, previously removed devices whose
    constraint holds under the new receiver rejoin the candidate set
    with the satisfied weight on the next pass. A pass budget of
    4 * n_devices guards against cycling; if it trips, the surviving set
    is returned when the last receiver certifies it, else the outcome is
    empty.
    """
    h, phis, gamma = _validated_problem(h, phis, gamma)
    policy = _as_policy(policy)
    return _run_elimination(h, phis, gamma, policy, _plain_receiver_step(h),
                            bidirectional=True, record_trace=record_trace,
                            max_passes=max_passes)


def schedule_random(h, phis=None, gamma=1.0, rng=None, policy=None,
                    record_trace=False, max_passes=None) -> ScheduleOutcome:
    """Baseline: eliminate uniformly at random instead of by violation.

    Receiver updates, weights, and the stopping rule are identical to
    schedule_mp; only the removal choice differs, drawn uniformly from
    the current candidate set (violated or not).
    """
    h, phis, gamma = _validated_problem(h, phis, gamma)
    policy = _as_policy(policy)
    gen = validation.as_rng(rng)
    return _run_elimination(h, phis, gamma, policy, _plain_receiver_step(h),
                            removal_rng=gen, record_trace=record_trace,
                            max_passes=max_passes)


def exhaustive_oracle(h, phis=None, gamma=1.0, n_candidates=16, rng=None,
                      policy=None) -> ScheduleOutcome:
    """Largest certifiable set by subset enumeration, for small problems.

    Enumerates subsets in decreasing size (lexicographic within a size)
    and returns the first one certified by any receiver from a candidate
    pool: the matching-pursuit receivers (both variants), ``n_candidates``
    random unit vectors, and per-subset leading singular vectors under
    ``n_candidates`` random positive weightings. Only devices that are
    individually feasible can belong to any certifiable set, so the
    enumeration is restricted to them.

    The receiver search is heuristic, so the result is a lower bound on
    the true optimum, but a bound that by construction never falls below
    either matching-pursuit variant. ``iterations`` reports the number of
    subsets examined. Limited to 12 devices.
    """
    h, phis, gamma = _validated_problem(h, phis, gamma)
    n, k = h.shape
    if k > 12:
        raise ValueError(f"exhaustive search is limited to 12 devices, got {k}")
    if n_candidates < 0:
        raise ValueError("n_candidates must be non-negative")
    policy = _as_policy(policy)
    gen = validation.as_rng(rng)

    pool = []
    for algo in (schedule_mp, schedule_mp_bidirectional):
        out = algo(h, phis, gamma, policy)
        if out.receiver is not None:
            pool.append(out.receiver)
    for _ in range(n_candidates):
        pool.append(random_unit_vector(n, gen))
    pool_ok = np.stack([constraint_indicators(h, c, phis, gamma) <= 0.0 for c in pool]) \
        if pool else np.zeros((0, k), dtype=bool)

    # Membership in any certifiable set requires individual feasibility:
    # |h_k^H c|^2 <= ||h_k||^2 for unit c, so phi_k^2 <= gamma ||h_k||^2
    # is necessary (and, via the matched filter, sufficient for k alone).
    norms2 = np.sum(np.abs(h) ** 2, axis=0)
    with np.errstate(invalid="ignore"):
        cap = np.where(norms2 > 0.0, gamma * norms2, 0.0)
    eligible = [int(i) for i in np.flatnonzero(phis**2 <= cap)]

    examined = 0
    for size in range(len(eligible), 0, -1):
        for subset in itertools.combinations(eligible, size):
            examined += 1
            cols = list(subset)
            if pool_ok.size:
                covered = np.all(pool_ok[:, cols], axis=1)
                if covered.any():
                    winner = int(np.flatnonzero(covered)[0])
                    return ScheduleOutcome(tuple(subset), pool[winner], examined,
                                           STATUS_FEASIBLE, None)
            sub = h[:, cols]
            found = None
            for _ in range(n_candidates):
                w = gen.uniform(1e-3, 1.0, size)
                try:
                    cand = leading_left_singular_pair(sub * np.sqrt(w)).vector
                except PowerIterationError as err:
                    cand = err.vector
                gaps = constraint_indicators(sub, cand, phis[cols], gamma)
                if float(np.max(gaps)) <= 0.0:
                    found = cand
                    break
            if found is not None:
                return ScheduleOutcome(tuple(subset), found, examined,
                                       STATUS_FEASIBLE, None)
    return ScheduleOutcome((), None, examined, STATUS_EMPTY, None)
