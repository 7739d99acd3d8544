"""Wireless channel models: i.i.d. Rayleigh and spatially correlated Rician.

The Rician model follows the usual uplink single-cell picture. Devices
are dropped uniformly by area on an annulus around a uniform linear
array, the line-of-sight component is the array response at the device
azimuth, and the scattered component is shaped by a Gaussian-damped
spatial covariance so that neighbouring antennas decorrelate with the
angular spread.

All sampling functions take an explicit numpy Generator and document
their draw order, so experiment streams stay reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import validation
from .linalg import hermitian_sqrt


def sample_iid_gaussian(n_antennas: int, n_devices: int, rng) -> np.ndarray:
    """i.i.d. CN(0, 1) channel matrix, shape (n_antennas, n_devices).

    Entries have unit variance split evenly across quadratures. One pair
    of Generator calls (real block, then imaginary block).
    """
    if n_antennas < 1 or n_devices < 1:
        raise ValueError("n_antennas and n_devices must be at least 1")
    gen = validation.as_rng(rng)
    shape = (n_antennas, n_devices)
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / math.sqrt(2.0)


def array_response(theta: float, n_antennas: int, spacing: float = 0.5) -> np.ndarray:
    """ULA steering vector for azimuth ``theta`` (radians).

    Element n carries phase ``exp(j * 2 pi * spacing * n * sin(theta))``
    with ``spacing`` in carrier wavelengths.
    """
    if n_antennas < 1:
        raise ValueError("n_antennas must be at least 1")
    spacing = validation.check_positive_scalar(spacing, "spacing")
    idx = np.arange(n_antennas)
    return np.exp(1j * 2.0 * np.pi * spacing * idx * np.sin(theta))


def spatial_covariance(theta: float, angular_spread: float, n_antennas: int,
                       spacing: float = 0.5) -> np.ndarray:
    """Gaussian-spread spatial covariance for a ULA.

    Entry (n, m) is
    ``exp(j 2 pi d (n-m) sin(theta)) * exp(-2 s^2 (pi (n-m) d cos(theta))^2)``
    where ``d`` is the antenna spacing in wavelengths and ``s`` the
    angular spread in radians. The matrix is Hermitian with unit
    diagonal by construction; a zero spread collapses it to the rank-one
    outer product of the steering vector.
    """
    if n_antennas < 1:
        raise ValueError("n_antennas must be at least 1")
    spacing = validation.check_positive_scalar(spacing, "spacing")
    spread = validation.check_nonnegative_scalar(angular_spread, "angular_spread")
    idx = np.arange(n_antennas)
    diff = idx[:, None] - idx[None, :]
    phase = np.exp(1j * 2.0 * np.pi * spacing * diff * np.sin(theta))
    damp = np.exp(-2.0 * spread**2 * (np.pi * diff * spacing * np.cos(theta)) ** 2)
    return phase * damp


def path_loss(distance, alpha: float = 3.0, ref_loss: float = 1.0,
              ref_distance: float = 1.0):
    """Distance-based power attenuation ``ref_loss * (d / d0)^(-alpha)``.

    Accepts scalar or array ``distance``; all distances must be positive.
    """
    alpha = validation.check_nonnegative_scalar(alpha, "alpha")
    ref_loss = validation.check_positive_scalar(ref_loss, "ref_loss")
    ref_distance = validation.check_positive_scalar(ref_distance, "ref_distance")
    d = np.asarray(distance, dtype=np.float64)
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise ValueError("distance must be positive and finite")
    out = ref_loss * (d / ref_distance) ** (-alpha)
    return float(out) if np.isscalar(distance) else out


@dataclass(frozen=True)
class NetworkGeometry:
    """Device drop: polar coordinates relative to the array."""

    distances: np.ndarray
    angles: np.ndarray

    def __post_init__(self):
        d = validation.as_real_vector(self.distances, "distances")
        a = validation.as_real_vector(self.angles, "angles")
        if d.shape != a.shape:
            raise ValueError("distances and angles must have matching length")
        if np.any(d <= 0):
            raise ValueError("distances must be positive")
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "angles", a)

    @property
    def n_devices(self) -> int:
        return self.distances.shape[0]


def sample_geometry(n_devices: int, r_in: float, r_out: float, rng) -> NetworkGeometry:
    """Drop devices uniformly by area on the annulus [r_in, r_out].

    Radii use the inverse-CDF transform ``sqrt(U (r_out^2 - r_in^2) + r_in^2)``
    so density is uniform per unit area rather than per unit radius.
    Draw order: one block of radius uniforms, then one block of angles
    on [0, 2 pi).
    """
    if n_devices < 1:
        raise ValueError("n_devices must be at least 1")
    r_in = validation.check_positive_scalar(r_in, "r_in")
    r_out = validation.check_positive_scalar(r_out, "r_out")
    if r_out <= r_in:
        raise ValueError(f"r_out must exceed r_in, got {r_in} >= {r_out}")
    gen = validation.as_rng(rng)
    u = gen.random(n_devices)
    radii = np.sqrt(u * (r_out**2 - r_in**2) + r_in**2)
    angles = gen.uniform(0.0, 2.0 * np.pi, n_devices)
    return NetworkGeometry(distances=radii, angles=angles)


@dataclass(frozen=True)
class RicianParams:
    """Per-network parameters of the correlated Rician model.

    ``kappa`` and ``angular_spread`` may be scalars (shared) or length-K
    arrays. ``ref_distance=None`` anchors the path-loss reference at the
    nearest device, which puts the strongest link at ``ref_loss``.
    """

    n_antennas: int
    spacing: float = 0.5
    kappa: float | np.ndarray = 10.0 ** 0.3
    angular_spread: float | np.ndarray = math.radians(13.5)
    alpha: float = 3.0
    ref_loss: float = 1.0
    ref_distance: float | None = None


def sample_rician(geometry: NetworkGeometry, params: RicianParams, rng) -> np.ndarray:
    """Correlated Rician uplink channels, shape (n_antennas, n_devices).

    Device k gets
    ``h_k = sqrt(PL(d_k)) * (sqrt(kappa/(1+kappa)) a(theta_k)
    + sqrt(1/(1+kappa)) R_k^(1/2) z_k)``
    with ``z_k`` i.i.d. CN(0, I). Draw order: one CN(0, I) block per
    device, in device order.
    """
    k = geometry.n_devices
    n = params.n_antennas
    if n < 1:
        raise ValueError("n_antennas must be at least 1")
    gen = validation.as_rng(rng)
    kappa = np.broadcast_to(np.asarray(params.kappa, dtype=np.float64), (k,))
    spread = np.broadcast_to(np.asarray(params.angular_spread, dtype=np.float64), (k,))
    if np.any(kappa < 0):
        raise ValueError("kappa must be non-negative")
    ref_distance = params.ref_distance
    if ref_distance is None:
        ref_distance = float(geometry.distances.min())
    gains = path_loss(geometry.distances, params.alpha, params.ref_loss, ref_distance)

    los_frac = np.where(np.isinf(kappa), 1.0, kappa / (1.0 + kappa))
    nlos_frac = np.where(np.isinf(kappa), 0.0, 1.0 / (1.0 + kappa))

    h = np.empty((n, k), dtype=np.complex128)
    for i in range(k):
        steer = array_response(geometry.angles[i], n, params.spacing)
        cov = spatial_covariance(geometry.angles[i], spread[i], n, params.spacing)
        root = hermitian_sqrt(cov)
        z = (gen.standard_normal(n) + 1j * gen.standard_normal(n)) / math.sqrt(2.0)
        g = math.sqrt(los_frac[i]) * steer + math.sqrt(nlos_frac[i]) * (root @ z)
        h[:, i] = math.sqrt(gains[i]) * g
    return h


@dataclass(frozen=True)
class IidChannelModel:
    """Channel sampler with i.i.d. CN(0, 1) entries."""

    n_antennas: int
    n_devices: int

    def sample(self, rng) -> np.ndarray:
        return sample_iid_gaussian(self.n_antennas, self.n_devices, rng)


@dataclass(frozen=True)
class RicianNetworkModel:
    """Channel sampler that redraws geometry and fading each call.

    Angular spreads are drawn per device, uniform on
    [spread_lo_deg, spread_hi_deg] degrees. Draw order per sample:
    geometry (radii then angles), spreads, then per-device fading.
    """

    n_antennas: int
    n_devices: int
    r_in: float = 10.0
    r_out: float = 100.0
    kappa_db: float = 3.0
    spacing: float = 0.5
    alpha: float = 3.0
    spread_lo_deg: float = 12.0
    spread_hi_deg: float = 15.0
    ref_loss: float = 1.0
    ref_distance: float | None = field(default=None)

    def sample(self, rng) -> np.ndarray:
        gen = validation.as_rng(rng)
        geo = sample_geometry(self.n_devices, self.r_in, self.r_out, gen)
        spreads = np.radians(
            gen.uniform(self.spread_lo_deg, self.spread_hi_deg, self.n_devices)
        )
        params = RicianParams(
            n_antennas=self.n_antennas,
            spacing=self.spacing,
            kappa=10.0 ** (self.kappa_db / 10.0),
            angular_spread=spreads,
            alpha=self.alpha,
            ref_loss=self.ref_loss,
            ref_distance=self.ref_distance,
        )
        return sample_rician(geo, params, gen)
