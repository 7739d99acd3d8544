"""Intelligent reflecting surface support for the scheduler.

With an M-element surface in the picture, device k's effective uplink
channel becomes ``h_k(mu) = h0_k + T diag(g_k) mu`` where ``T`` is the
array-to-surface link, ``g_k`` the device-to-surface cascade, and ``mu``
the unit-modulus reflection coefficients. For a fixed receiver the
weighted sum of effective gains is an inhomogeneous quadratic in ``mu``,
which a coordinate-wise phase update maximizes monotonically. The tuned
scheduler interleaves that update with the receiver step inside the same
elimination loop used by the plain scheduler; with M = 0 the two paths
produce bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import validation
from .linalg import PowerIterationError, leading_left_singular_pair
from .scheduling import (
    ScheduleOutcome,
    _as_policy,
    _run_elimination,
)


def _as_complex_2d(x, name, allow_empty=False):
    arr = np.asarray(x).astype(np.complex128, copy=False)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.size == 0 and not allow_empty:
        raise ValueError(f"{name} must be non-empty")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite entries")
    return arr


@dataclass(frozen=True)
class IrsChannelModel:
    """Direct, bridge, and cascade links of an IRS-assisted uplink.

    Attributes:
        direct: array-to-device channels, shape (n_antennas, n_devices).
        ps_to_irs: array-to-surface link T, shape (n_antennas, n_elements).
        cascades: device-to-surface gains, shape (n_elements, n_devices);
            column k is the diagonal of diag(g_k).

    n_elements may be zero, in which case the model degenerates to the
    direct channel.
    """

    direct: np.ndarray
    ps_to_irs: np.ndarray
    cascades: np.ndarray

    def __post_init__(self):
        direct = _as_complex_2d(self.direct, "direct")
        bridge = _as_complex_2d(self.ps_to_irs, "ps_to_irs", allow_empty=True)
        casc = _as_complex_2d(self.cascades, "cascades", allow_empty=True)
        n, k = direct.shape
        if bridge.shape[0] != n:
            raise ValueError("ps_to_irs must have one row per antenna")
        m = bridge.shape[1]
        if casc.shape != (m, k):
            raise ValueError(
                f"cascades must have shape ({m}, {k}), got {casc.shape}"
            )
        object.__setattr__(self, "direct", direct)
        object.__setattr__(self, "ps_to_irs", bridge)
        object.__setattr__(self, "cascades", casc)

    @property
    def n_antennas(self) -> int:
        return self.direct.shape[0]

    @property
    def n_devices(self) -> int:
        return self.direct.shape[1]

    @property
    def n_elements(self) -> int:
        return self.ps_to_irs.shape[1]


def effective_channel(model: IrsChannelModel, mu) -> np.ndarray:
    """Effective channel matrix ``H(mu)``, shape (n_antennas, n_devices).

    ``mu`` carries one reflection coefficient per surface element; unit
    modulus is conventional but not enforced here.
    """
    mu = validation.as_complex_vector(mu, "mu")
    if mu.shape[0] != model.n_elements:
        raise ValueError(
            f"mu must have length {model.n_elements}, got {mu.shape[0]}"
        )
    return model.direct + model.ps_to_irs @ (mu[:, None] * model.cascades)


@dataclass(frozen=True)
class QuadraticForm:
    """The weighted-gain objective as a quadratic in ``mu``.

    ``value(mu)`` returns
    ``Re(mu^H Q mu) + 2 Re(mu^H a) + offset``, which equals
    ``sum_k w_k |h_k(mu)^H c|^2`` for the receiver and weights the form
    was built from. ``matrix`` is Hermitian PSD.
    """

    matrix: np.ndarray
    vector: np.ndarray
    offset: float

    def value(self, mu) -> float:
        mu = np.asarray(mu, dtype=np.complex128)
        quad = np.real(mu.conj() @ self.matrix @ mu)
        lin = 2.0 * np.real(np.vdot(mu, self.vector))
        return float(quad + lin + self.offset)


def build_quadratic(receiver, weights, model: IrsChannelModel) -> QuadraticForm:
    """Assemble the quadratic form of the weighted effective gains.

    With ``b_k = conj(g_k) * (T^H c)`` and ``s_k = h0_k^H c``, the sum
    ``sum_k w_k |h_k(mu)^H c|^2`` expands to
    ``mu^H Q mu + 2 Re(mu^H a) + sum_k w_k |s_k|^2`` where
    ``Q = sum_k w_k b_k b_k^H`` and ``a = sum_k w_k b_k conj(s_k)``.
    Weights must be non-negative (zeros mark removed devices).
    """
    c = validation.as_complex_vector(receiver, "receiver")
    if c.shape[0] != model.n_antennas:
        raise ValueError("receiver length must match the antenna count")
    w = validation.as_real_vector(np.asarray(weights, dtype=np.float64), "weights")
    if w.shape[0] != model.n_devices:
        raise ValueError("weights must have one entry per device")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    tc = model.ps_to_irs.conj().T @ c
    b = model.cascades.conj() * tc[:, None]
    s = model.direct.conj().T @ c
    q = (b * w) @ b.conj().T
    a = b @ (w * s.conj())
    offset = float(np.sum(w * np.abs(s) ** 2))
    return QuadraticForm(matrix=q, vector=a, offset=offset)


def bcd_phase_update(form: QuadraticForm, mu, sweeps: int = 1,
                     history: list | None = None) -> np.ndarray:
    """Coordinate-wise unit-modulus ascent on the quadratic form.

    Each coordinate m is set to the phase of
    ``a_m + sum_{m' != m} Q[m, m'] mu_{m'}``, in ascending order, which
    never decreases the objective. Coordinates whose drive term falls
    below 1e-12 in magnitude are left untouched since any phase is then
    optimal to within noise. When ``history`` is given, the objective
    value is appended after every coordinate update.

    Returns a new array; the input is not modified.
    """
    mu = validation.as_complex_vector(mu, "mu").copy()
    m = mu.shape[0]
    if form.matrix.shape != (m, m):
        raise ValueError("form and mu dimensions disagree")
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    for _ in range(sweeps):
        for i in range(m):
            drive = form.vector[i] + (form.matrix[i, :] @ mu - form.matrix[i, i] * mu[i])
            if abs(drive) > 1e-12:
                mu[i] = drive / abs(drive)
            if history is not None:
                history.append(form.value(mu))
    return mu


def schedule_mp_tuned(model: IrsChannelModel, phis=None, gamma=1.0, policy=None,
                      mu0=None, alt_max: int = 50, bcd_sweeps: int = 3,
                      inner_tol: float = 1e-8, record_trace: bool = False,
                      max_passes=None):
    """Matching-pursuit scheduling with joint reflection tuning.

    The outer elimination loop is the plain scheduler's. Inside each
    pass, the receiver and the reflection vector alternate: ``c`` is the
    leading left singular vector of the weighted effective channel, and
    ``mu`` maximizes the weighted effective gains for that ``c`` by
    ``bcd_sweeps`` rounds of coordinate ascent. The alternation stops
    when the weighted objective
    ``sum_k w_k phi_k^2 - gamma * sum_k w_k |h_k(mu)^H c|^2``
    changes by less than ``inner_tol`` (relative) or after ``alt_max``
    rounds. ``mu`` persists across passes, starting from ``mu0``
    (all-ones by default).

    Returns:
        (ScheduleOutcome, mu): the schedule under the final effective
        channel and the final reflection vector.
    """
    phis_arr = validation.as_positive_weights(
        1.0 if phis is None else phis, model.n_devices, "phis")
    gamma = validation.check_positive_scalar(gamma, "gamma", allow_inf=True)
    policy = _as_policy(policy)
    if alt_max < 1:
        raise ValueError("alt_max must be at least 1")
    inner_tol = validation.check_positive_scalar(inner_tol, "inner_tol")
    n_elements = model.n_elements
    if mu0 is None:
        mu = np.ones(n_elements, dtype=np.complex128)
    else:
        mu = validation.as_complex_vector(mu0, "mu0").copy()
        if mu.shape[0] != n_elements:
            raise ValueError(f"mu0 must have length {n_elements}")

    state = {"mu": mu}

    def step(weights):
        mu = state["mu"]
        heff = effective_channel(model, mu)
        phi_term = float(np.sum(weights * phis_arr**2))
        prev_obj = None
        receiver = None
        for _ in range(alt_max):
            try:
                pair = leading_left_singular_pair(heff * np.sqrt(weights))
                receiver, quad = pair.vector, pair.value
            except PowerIterationError as err:
                receiver, quad = err.vector, err.value
            if n_elements:
                form = build_quadratic(receiver, weights, model)
                mu = bcd_phase_update(form, mu, sweeps=bcd_sweeps)
                heff = effective_channel(model, mu)
                quad = float(np.sum(weights * np.abs(heff.conj().T @ receiver) ** 2))
            obj = phi_term - gamma * quad
            if prev_obj is not None and (
                obj == prev_obj
                or abs(prev_obj - obj) <= inner_tol * max(1.0, abs(prev_obj))
            ):
                break
            prev_obj = obj
        state["mu"] = mu
        return receiver, heff

    outcome = _run_elimination(model.direct, phis_arr, gamma, policy, step,
                               record_trace=record_trace, max_passes=max_passes)
    return outcome, state["mu"]


@dataclass(frozen=True)
class IidIrsModelSampler:
    """IRS model sampler with i.i.d. CN(0, scale^2) links.

    Draw order per sample: direct block, bridge block, cascade block.
    """

    n_antennas: int
    n_devices: int
    n_elements: int
    direct_scale: float = 1.0
    bridge_scale: float = 1.0
    cascade_scale: float = 1.0

    def sample(self, rng) -> IrsChannelModel:
        gen = validation.as_rng(rng)

        def block(rows, cols, scale):
            z = gen.standard_normal((rows, cols)) + 1j * gen.standard_normal((rows, cols))
            return scale * z / np.sqrt(2.0)

        return IrsChannelModel(
            direct=block(self.n_antennas, self.n_devices, self.direct_scale),
            ps_to_irs=block(self.n_antennas, self.n_elements, self.bridge_scale),
            cascades=block(self.n_elements, self.n_devices, self.cascade_scale),
        )
