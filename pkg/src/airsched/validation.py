"""Input validation helpers shared across the package.

Every public entry point funnels its array arguments through these
functions so that shape and dtype errors surface with a consistent
message instead of a numpy broadcasting traceback three layers down.
"""

from __future__ import annotations

import numbers

import numpy as np


def as_complex_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` to a finite 2-D complex128 array.

    Args:
        x: array-like, shape (m, n).
        name: argument name used in error messages.

    Returns:
        A complex128 ndarray. A copy is made only when coercion needs one.
    """
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite entries")
    return arr


def as_complex_vector(x, name: str = "vector") -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={arr.ndim}")
    arr = arr.astype(np.complex128, copy=False)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite entries")
    return arr


def as_real_vector(x, name: str = "vector") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={arr.ndim}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite entries")
    return arr


def as_positive_weights(x, n: int, name: str = "weights") -> np.ndarray:
    """Validate a length-``n`` vector of strictly positive reals.

    A scalar is broadcast to length ``n``.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    arr = as_real_vector(arr, name)
    if arr.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got {arr.shape[0]}")
    if np.any(arr <= 0):
        raise ValueError(f"{name} must be strictly positive")
    return arr


def check_positive_scalar(x, name: str, allow_inf: bool = False) -> float:
    if not isinstance(x, numbers.Real):
        raise TypeError(f"{name} must be a real scalar, got {type(x).__name__}")
    val = float(x)
    if np.isnan(val):
        raise ValueError(f"{name} must not be NaN")
    if np.isinf(val) and not allow_inf:
        raise ValueError(f"{name} must be finite")
    if val <= 0:
        raise ValueError(f"{name} must be strictly positive, got {val}")
    return val


def check_nonnegative_scalar(x, name: str) -> float:
    if not isinstance(x, numbers.Real):
        raise TypeError(f"{name} must be a real scalar, got {type(x).__name__}")
    val = float(x)
    if np.isnan(val) or np.isinf(val):
        raise ValueError(f"{name} must be finite")
    if val < 0:
        raise ValueError(f"{name} must be non-negative, got {val}")
    return val


def check_index_set(devices, n: int, name: str = "devices") -> tuple:
    """Validate a collection of device indices against range(n).

    Returns the indices as a sorted tuple of ints. Duplicates are an error.
    """
    idx = [int(i) for i in devices]
    if len(set(idx)) != len(idx):
        raise ValueError(f"{name} contains duplicate indices")
    for i in idx:
        if not 0 <= i < n:
            raise ValueError(f"{name} index {i} out of range for {n} devices")
    return tuple(sorted(idx))


def as_rng(rng) -> np.random.Generator:
    """Resolve ``rng`` to a numpy Generator.

    Accepts an existing Generator, a seed (int or SeedSequence), or None
    for an OS-seeded generator.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def ensure_unit_vector(c, name: str = "receiver", tol: float = 1e-9) -> np.ndarray:
    vec = as_complex_vector(c, name)
    nrm = float(np.linalg.norm(vec))
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"{name} must have unit norm, got {nrm!r}")
    return vec
