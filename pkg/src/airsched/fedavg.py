"""One-shot federated least squares over an analog multiple-access channel.

Each device fits a local ridge least-squares model, and the network
aggregates the weighted average of the local coefficient vectors. The
ideal aggregate is the size-weighted FedAvg model; the over-the-air
variant transmits every coordinate through the zero-forced channel, so
scheduling decides the bias/noise trade-off: more devices means a more
faithful average, fewer devices means less noise amplification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import validation
from .coordination import Schedule
from .scheduling import (
    STATUS_FEASIBLE,
    ScheduleOutcome,
    schedule_mp,
    schedule_mp_bidirectional,
    schedule_random,
)


@dataclass(frozen=True)
class LinearDataset:
    """Design matrix plus real-valued targets."""

    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.targets, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("features must be 2-D")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError("targets must be 1-D and aligned with features")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("dataset must be finite")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "targets", y)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "LinearDataset":
        idx = np.asarray(indices, dtype=np.intp)
        return LinearDataset(self.features[idx], self.targets[idx])


def make_linear_dataset(n_samples: int, coef, noise_std: float, rng) -> LinearDataset:
    """Gaussian design with targets ``X @ coef + noise``.

    Draw order: feature block, then noise vector.
    """
    coef = validation.as_real_vector(coef, "coef")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    noise_std = validation.check_nonnegative_scalar(noise_std, "noise_std")
    gen = validation.as_rng(rng)
    x = gen.standard_normal((n_samples, coef.shape[0]))
    y = x @ coef
    if noise_std > 0:
        y = y + noise_std * gen.standard_normal(n_samples)
    return LinearDataset(x, y)


@dataclass(frozen=True)
class Partition:
    """Assignment of sample indices to devices.

    ``presizes`` holds the pre-adjustment draws (useful for checking the
    size distribution), ``high_mask`` flags the data-rich half.
    """

    device_indices: tuple
    sizes: np.ndarray
    presizes: np.ndarray = field(repr=False)
    high_mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        idx = tuple(np.asarray(i, dtype=np.intp) for i in self.device_indices)
        sizes = np.asarray(self.sizes, dtype=np.int64)
        if len(idx) != sizes.shape[0]:
            raise ValueError("sizes must align with device_indices")
        for i, block in enumerate(idx):
            if block.shape[0] != sizes[i]:
                raise ValueError(f"device {i} block disagrees with its size")
        flat = np.concatenate(idx) if idx else np.empty(0, dtype=np.intp)
        if flat.shape[0] != np.unique(flat).shape[0]:
            raise ValueError("device blocks must be disjoint")
        object.__setattr__(self, "device_indices", idx)
        object.__setattr__(self, "sizes", sizes)

    @property
    def n_devices(self) -> int:
        return len(self.device_indices)

    @property
    def weights(self) -> np.ndarray:
        """Global aggregation weights phi_k = L_k / sum(L)."""
        return self.sizes / self.sizes.sum()


def partition_heterogeneous(n_samples: int, n_devices: int, eps0: float,
                            eps1: float, rng) -> Partition:
    """Split ``n_samples`` across devices with a data-rich half.

    A random half of the devices (``ceil(n_devices / 2)``) draw
    provisional sizes uniform on [L/K, L/K + eps1]; the rest draw uniform
    on [eps0, eps1]. Provisional sizes are floored, checked against the
    budget, and every device receives an equal share of the leftover:
    ``L_k = floor(draw_k) + floor((L - sum floor(draw)) / K)``.
    Sample indices are then dealt out of one permutation in device order.

    Draw order: device permutation, size block, sample permutation.

    Raises:
        ValueError: if eps0 >= eps1, or the provisional sizes already
            exceed the budget, or any device would end up empty.
    """
    if n_samples < 1 or n_devices < 1:
        raise ValueError("n_samples and n_devices must be at least 1")
    eps0 = validation.check_positive_scalar(eps0, "eps0")
    eps1 = validation.check_positive_scalar(eps1, "eps1")
    if eps0 >= eps1:
        raise ValueError(f"eps0 must be strictly below eps1, got {eps0} >= {eps1}")
    gen = validation.as_rng(rng)

    order = gen.permutation(n_devices)
    high = np.zeros(n_devices, dtype=bool)
    high[order[: math.ceil(n_devices / 2)]] = True

    base = n_samples / n_devices
    lo = np.where(high, base, eps0)
    hi = np.where(high, base + eps1, eps1)
    draws = gen.uniform(lo, hi)
    presizes = np.floor(draws).astype(np.int64)
    spare = n_samples - int(presizes.sum())
    if spare < 0:
        raise ValueError(
            f"provisional sizes sum to {presizes.sum()} > {n_samples} samples"
        )
    sizes = presizes + spare // n_devices
    if np.any(sizes < 1):
        raise ValueError("every device needs at least one sample; raise eps0")

    perm = gen.permutation(n_samples)
    blocks = []
    start = 0
    for k in range(n_devices):
        blocks.append(perm[start: start + sizes[k]])
        start += int(sizes[k])
    return Partition(device_indices=tuple(blocks), sizes=sizes,
                     presizes=presizes, high_mask=high)


def local_ls_fit(dataset: LinearDataset, ridge: float = 0.0) -> np.ndarray:
    """Ridge least-squares coefficients via the normal equations.

    Solves ``(X^T X + ridge I) theta = X^T y``. With ``ridge = 0`` the
    design must have full column rank; behaviour on a rank-deficient
    design is then undefined (numpy raises on exact singularity).
    """
    ridge = validation.check_nonnegative_scalar(ridge, "ridge")
    x, y = dataset.features, dataset.targets
    gram = x.T @ x
    if ridge > 0:
        gram = gram + ridge * np.eye(x.shape[1])
    return np.linalg.solve(gram, x.T @ y)


def mse_loss(coef, dataset: LinearDataset) -> float:
    """Mean squared prediction error of ``coef`` on ``dataset``."""
    coef = validation.as_real_vector(coef, "coef")
    resid = dataset.features @ coef - dataset.targets
    return float(np.mean(resid**2))


def federated_average(thetas, weights, devices=None) -> np.ndarray:
    """Weighted average of local models over ``devices``.

    ``thetas`` has one row per device. ``weights`` are used as given;
    renormalize before calling if the scheduled set is a strict subset.
    """
    t = np.asarray(thetas, dtype=np.float64)
    if t.ndim != 2:
        raise ValueError("thetas must be 2-D with one row per device")
    w = validation.as_positive_weights(weights, t.shape[0], "weights")
    if devices is None:
        devices = range(t.shape[0])
    idx = validation.check_index_set(devices, t.shape[0])
    if not idx:
        raise ValueError("devices must be non-empty")
    cols = list(idx)
    return (w[cols][:, None] * t[cols]).sum(axis=0)


def ota_aggregate(thetas, h, schedule: Schedule, noise_var: float, rng) -> np.ndarray:
    """Raw over-the-air aggregate, one complex value per coordinate.

    Every model coordinate rides one analog aggregation round over the
    same channel realization and schedule:
    ``Y = H_S diag(psi) Theta_S + Xi``, estimate ``c^H Y / sqrt(eta)``.
    The per-coordinate error against the ideal weighted sum is
    circularly symmetric with variance ``noise_var ||c||^2 / eta``.
    """
    t = np.asarray(thetas, dtype=np.float64)
    if t.ndim != 2:
        raise ValueError("thetas must be 2-D with one row per device")
    h = validation.as_complex_matrix(h, "h")
    if t.shape[0] != h.shape[1]:
        raise ValueError("thetas must have one row per device")
    noise_var = validation.check_nonnegative_scalar(noise_var, "noise_var")
    gen = validation.as_rng(rng)
    idx = list(schedule.devices)
    y = h[:, idx] @ (schedule.tx_weights[:, None] * t[idx])
    if noise_var > 0:
        shape = (h.shape[0], t.shape[1])
        y = y + np.sqrt(noise_var / 2.0) * (
            gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
        )
    return (schedule.receiver.conj() @ y) / np.sqrt(schedule.power_factor)


def ota_fl_round(thetas, h, schedule: Schedule, noise_var: float, rng) -> np.ndarray:
    """One federated aggregation round over the air.

    The models are real, so the imaginary residue of the aggregate is
    pure noise and is discarded.
    """
    return np.real(ota_aggregate(thetas, h, schedule, noise_var, rng))


_VARIANTS = {
    "mp": schedule_mp,
    "mp-bidir": schedule_mp_bidirectional,
    "random": schedule_random,
}


@dataclass(frozen=True)
class FlConfig:
    """Knobs of an over-the-air FL simulation."""

    rounds: int = 1
    gamma: float = 1.0
    delta: float = 0.05
    power: float = 1.0
    noise_var: float = 1.0
    ridge: float = 1e-9
    variant: str = "mp"

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        validation.check_positive_scalar(self.gamma, "gamma", allow_inf=True)
        validation.check_positive_scalar(self.power, "power")
        validation.check_nonnegative_scalar(self.noise_var, "noise_var")
        validation.check_nonnegative_scalar(self.ridge, "ridge")
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class FlRound:
    """Per-round trace record."""

    round_index: int
    n_scheduled: int
    test_loss: float
    efficiency: float
    skipped: bool


@dataclass(frozen=True)
class FlTrace:
    """Outcome of a simulation: per-round records plus references."""

    rounds: tuple
    fl_loss: float
    fl_model: np.ndarray = field(repr=False)

    @property
    def final_loss(self) -> float:
        return self.rounds[-1].test_loss

    @property
    def mean_efficiency(self) -> float:
        return float(np.mean([r.efficiency for r in self.rounds]))


def ota_efficiency(loss_ota: float, loss_fl: float) -> float:
    """Test-loss ratio of ideal FedAvg to the over-the-air model.

    Values near 1 mean the analog aggregate barely hurts; the ratio is
    reported unclipped, so values above 1 (noise happening to help) pass
    through.
    """
    loss_ota = validation.check_positive_scalar(loss_ota, "loss_ota")
    loss_fl = validation.check_positive_scalar(loss_fl, "loss_fl")
    return loss_fl / loss_ota


def _round_efficiency(loss: float, fl_loss: float) -> float:
    if loss > 0 and fl_loss > 0:
        return fl_loss / loss
    if loss == fl_loss:
        return 1.0
    return float("inf") if loss == 0.0 else 0.0


def run_ota_fl(train: LinearDataset, test: LinearDataset, partition: Partition,
               channel_sampler, config: FlConfig, rng,
               scheduler_rng=None) -> FlTrace:
    """Simulate one-shot federated least squares with OTA aggregation.

    Local fits happen once (the task is one-shot); each round redraws the
    channel, schedules, and re-aggregates. Rounds whose schedule comes
    back empty keep the previous global model (zeros before the first
    successful round) and are flagged. Efficiency per round is the ideal
    FedAvg test loss over the round's test loss, unclipped.

    ``rng`` drives channel and noise draws; ``scheduler_rng`` only the
    "random" variant's removal choices.
    """
    if len(train) == 0:
        raise ValueError("train dataset must be non-empty")
    gen = validation.as_rng(rng)
    phis = partition.weights
    thetas = np.stack([
        local_ls_fit(train.subset(idx), config.ridge)
        for idx in partition.device_indices
    ])
    fl_model = federated_average(thetas, phis)
    fl_loss = mse_loss(fl_model, test)

    scheduler = _VARIANTS[config.variant]
    sched_gen = validation.as_rng(scheduler_rng) if config.variant == "random" else None
    global_model = np.zeros(train.n_features)
    records = []
    for rnd in range(config.rounds):
        h = channel_sampler.sample(gen)
        if sched_gen is not None:
            outcome = scheduler(h, phis, config.gamma, rng=sched_gen,
                                policy=config.delta)
        else:
            outcome = scheduler(h, phis, config.gamma, policy=config.delta)
        if outcome.status != STATUS_FEASIBLE or not outcome.devices:
            loss = mse_loss(global_model, test)
            records.append(FlRound(rnd, 0, loss,
                                   _round_efficiency(loss, fl_loss), True))
            continue
        sel = list(outcome.devices)
        # Renormalize the aggregation weights over the scheduled set; the
        # entries of unscheduled devices are never read downstream.
        weights_full = np.array(phis, dtype=np.float64)
        weights_full[sel] = phis[sel] / phis[sel].sum()
        sched = Schedule.zero_forcing(h, outcome.receiver, outcome.devices,
                                      weights_full, config.power)
        global_model = ota_fl_round(thetas, h, sched, config.noise_var, gen)
        loss = mse_loss(global_model, test)
        records.append(FlRound(rnd, len(outcome.devices), loss,
                               _round_efficiency(loss, fl_loss), False))
    return FlTrace(rounds=tuple(records), fl_loss=fl_loss, fl_model=fl_model)
