"""Zero-forcing transceiver coordination for analog function aggregation.

Given a receive beamformer ``c`` and a scheduled set S, every device
inverts its effective channel ``h_k^H c`` so that the fusion center
observes an unbiased weighted sum. The power factor ``eta`` is chosen so
the worst-placed device transmits exactly at the power budget, and the
resulting computation error is the post-processed noise power
``sigma^2 ||c||^2 / eta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import validation


def gamma_from_db(gamma_db: float) -> float:
    """Linear equalization threshold from its decibel value."""
    return float(10.0 ** (float(gamma_db) / 10.0))


class OrthogonalChannelError(ValueError):
    """A scheduled device is orthogonal to the receive beamformer.

    Zero forcing needs ``h_k^H c != 0`` for every scheduled device; the
    offending device index is stored on the exception.
    """

    def __init__(self, device: int):
        super().__init__(
            f"device {device} has zero effective channel under the given receiver"
        )
        self.device = device


def _effective_gains(h: np.ndarray, receiver: np.ndarray, devices: tuple) -> np.ndarray:
    """Squared effective channels |h_k^H c|^2 for k in ``devices``."""
    proj = h[:, devices].conj().T @ receiver
    gains = np.abs(proj) ** 2
    for pos, g in enumerate(gains):
        if g == 0.0:
            raise OrthogonalChannelError(devices[pos])
    return gains


def zf_power_factor(h, receiver, devices, weights, power: float) -> float:
    """Largest ``eta`` for which every scheduled device meets its budget.

    ``eta = power * min_k |h_k^H c|^2 / phi_k^2`` over k in ``devices``;
    at that value the minimizing device transmits at exactly ``power``.
    """
    h = validation.as_complex_matrix(h, "h")
    receiver = validation.as_complex_vector(receiver, "receiver")
    n, k = h.shape
    if receiver.shape[0] != n:
        raise ValueError("receiver length must match the antenna count")
    devices = validation.check_index_set(devices, k)
    if not devices:
        raise ValueError("devices must be non-empty")
    weights = validation.as_positive_weights(weights, k, "weights")
    power = validation.check_positive_scalar(power, "power")
    gains = _effective_gains(h, receiver, devices)
    return float(power * np.min(gains / weights[list(devices)] ** 2))


def zf_transmit_weights(h, receiver, devices, weights, eta: float) -> np.ndarray:
    """Channel-inverting transmit coefficients, aligned with ``devices``.

    ``psi_k = sqrt(eta) * phi_k * (h_k^H c) / |h_k^H c|^2`` makes the
    received k-th term equal ``sqrt(eta) * phi_k`` after beamforming.
    """
    h = validation.as_complex_matrix(h, "h")
    receiver = validation.as_complex_vector(receiver, "receiver")
    n, k = h.shape
    if receiver.shape[0] != n:
        raise ValueError("receiver length must match the antenna count")
    devices = validation.check_index_set(devices, k)
    if not devices:
        raise ValueError("devices must be non-empty")
    weights = validation.as_positive_weights(weights, k, "weights")
    eta = validation.check_positive_scalar(eta, "eta")
    proj = h[:, devices].conj().T @ receiver
    gains = np.abs(proj) ** 2
    for pos, g in enumerate(gains):
        if g == 0.0:
            raise OrthogonalChannelError(devices[pos])
    return np.sqrt(eta) * weights[list(devices)] * proj / gains


def computation_error(h, receiver, devices, weights, noise_var: float,
                      power: float) -> float:
    """Mean squared error of the zero-forced aggregate.

    ``(noise_var / power) * max_k phi_k^2 ||c||^2 / |h_k^H c|^2`` over the
    scheduled set. Scale-invariant in ``receiver``: the ``||c||^2`` factor
    cancels any rescaling of the beamformer.
    """
    h = validation.as_complex_matrix(h, "h")
    receiver = validation.as_complex_vector(receiver, "receiver")
    n, k = h.shape
    if receiver.shape[0] != n:
        raise ValueError("receiver length must match the antenna count")
    devices = validation.check_index_set(devices, k)
    if not devices:
        raise ValueError("devices must be non-empty")
    weights = validation.as_positive_weights(weights, k, "weights")
    noise_var = validation.check_nonnegative_scalar(noise_var, "noise_var")
    power = validation.check_positive_scalar(power, "power")
    gains = _effective_gains(h, receiver, devices)
    c2 = float(np.real(np.vdot(receiver, receiver)))
    return float((noise_var / power) * np.max(weights[list(devices)] ** 2 * c2 / gains))


@dataclass(frozen=True)
class SystemParams:
    """Static system-level quantities shared by a simulation run."""

    power: float = 1.0
    noise_var: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        validation.check_positive_scalar(self.power, "power")
        validation.check_nonnegative_scalar(self.noise_var, "noise_var")
        validation.check_positive_scalar(self.gamma, "gamma", allow_inf=True)


@dataclass(frozen=True)
class Schedule:
    """A scheduled set with its matched zero-forcing transceiver.

    Attributes:
        devices: sorted tuple of scheduled device indices.
        receiver: unit-norm receive beamformer.
        power_factor: the ZF power factor eta.
        tx_weights: transmit coefficients aligned with ``devices``.
    """

    devices: tuple
    receiver: np.ndarray
    power_factor: float
    tx_weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        receiver = validation.ensure_unit_vector(self.receiver, "receiver")
        tx = validation.as_complex_vector(self.tx_weights, "tx_weights")
        devices = tuple(int(i) for i in self.devices)
        if len(tx) != len(devices):
            raise ValueError("tx_weights must align with devices")
        validation.check_positive_scalar(self.power_factor, "power_factor")
        object.__setattr__(self, "devices", devices)
        object.__setattr__(self, "receiver", receiver)
        object.__setattr__(self, "tx_weights", tx)

    @classmethod
    def zero_forcing(cls, h, receiver, devices, weights, power: float) -> "Schedule":
        """Build the max-eta ZF schedule for a given receiver and set.

        Verifies the per-device budget ``|psi_k|^2 <= power`` up to a
        relative slack of 1e-9 (the binding device sits exactly on it).
        """
        eta = zf_power_factor(h, receiver, devices, weights, power)
        psi = zf_transmit_weights(h, receiver, devices, weights, eta)
        if np.any(np.abs(psi) ** 2 > power * (1.0 + 1e-9)):
            raise ValueError("transmit weights exceed the power budget")
        dev = validation.check_index_set(devices, np.asarray(h).shape[1])
        return cls(devices=dev, receiver=receiver, power_factor=eta, tx_weights=psi)

    @property
    def size(self) -> int:
        return len(self.devices)


def aircomp_round(h, schedule: Schedule, local_values, noise_var: float, rng) -> complex:
    """Simulate one analog aggregation round and return the estimate.

    ``local_values`` is a length-K vector of per-device real scalars;
    entries outside the scheduled set are ignored. The fusion center
    observes ``y = sum_k psi_k theta_k h_k + xi`` with
    ``xi ~ CN(0, noise_var I)`` and reports ``c^H y / sqrt(eta)``.
    The estimate is complex; callers project as appropriate.
    """
    h = validation.as_complex_matrix(h, "h")
    vals = validation.as_real_vector(local_values, "local_values")
    if vals.shape[0] != h.shape[1]:
        raise ValueError("local_values must have one entry per device")
    noise_var = validation.check_nonnegative_scalar(noise_var, "noise_var")
    gen = validation.as_rng(rng)
    idx = list(schedule.devices)
    tx = schedule.tx_weights * vals[idx]
    y = h[:, idx] @ tx
    if noise_var > 0:
        scale = np.sqrt(noise_var / 2.0)
        y = y + scale * (
            gen.standard_normal(h.shape[0]) + 1j * gen.standard_normal(h.shape[0])
        )
    return complex(np.vdot(schedule.receiver, y) / np.sqrt(schedule.power_factor))
