"""Dense linear-algebra primitives used by the schedulers.

The leading singular pair is the single hot operation in the whole
package (one call per elimination pass), so it gets a hand-rolled power
iteration on the Gram matrix instead of a full SVD. The iteration starts
from a seeded direction that is cached per dimension, which keeps every
run bit-reproducible without threading a Generator through call sites
that are otherwise deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import validation

_START_SEED = 0x5EED0A17
_start_cache: dict[int, np.ndarray] = {}


class PowerIterationError(RuntimeError):
    """Raised when the power iteration fails to meet its residual tolerance.

    The exception carries the final iterate so callers that can live with
    an approximate principal direction may still proceed.

    Attributes:
        vector: last unit iterate.
        value: Rayleigh quotient at ``vector``.
        iterations: number of iterations performed.
    """

    def __init__(self, message: str, vector: np.ndarray, value: float, iterations: int):
        super().__init__(message)
        self.vector = vector
        self.value = value
        self.iterations = iterations


@dataclass(frozen=True)
class SingularPair:
    """Leading left singular vector and squared singular value."""

    vector: np.ndarray
    value: float
    iterations: int


def _start_vector(n: int) -> np.ndarray:
    """Deterministic per-dimension start direction for the power iteration."""
    cached = _start_cache.get(n)
    if cached is None:
        rng = np.random.default_rng(_START_SEED + n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        cached = v / np.linalg.norm(v)
        _start_cache[n] = cached
    return cached


def leading_left_singular_pair(matrix, tol: float = 1e-10, max_iter: int = 10000) -> SingularPair:
    """Leading left singular vector of ``matrix`` and the squared singular value.

    Runs a power iteration on the Gram matrix ``M M^H``. Convergence is
    declared when the eigen-residual satisfies
    ``norm(G v - rho v) <= tol * rho`` with ``rho`` the Rayleigh quotient.

    Args:
        matrix: complex array, shape (m, n), non-zero.
        tol: relative residual tolerance.
        max_iter: iteration budget.

    Returns:
        SingularPair with a unit-norm ``vector`` (length m) and
        ``value = rho`` equal to the largest eigenvalue of ``M M^H``.

    Raises:
        ValueError: on a zero matrix, which has no leading direction.
        PowerIterationError: if the budget is exhausted before the
            residual test passes; the final iterate is attached.
    """
    m = validation.as_complex_matrix(matrix, "matrix")
    tol = validation.check_positive_scalar(tol, "tol")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    if not m.any():
        raise ValueError("matrix is identically zero, leading singular pair undefined")

    gram = m @ m.conj().T
    v = _start_vector(gram.shape[0])
    rho = 0.0
    tiny = np.finfo(np.float64).tiny
    for it in range(1, max_iter + 1):
        w = gram @ v
        rho = float(np.real(np.vdot(v, w)))
        residual = float(np.linalg.norm(w - rho * v))
        if residual <= tol * max(rho, tiny):
            return SingularPair(vector=v, value=rho, iterations=it)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            # The start direction landed in the null space. Mix in a second
            # seeded draw and continue; the event is measure zero for data
            # matrices but cheap to guard.
            rng = np.random.default_rng(_START_SEED ^ gram.shape[0])
            v = v + rng.standard_normal(gram.shape[0]) + 1j * rng.standard_normal(gram.shape[0])
            v = v / np.linalg.norm(v)
            continue
        v = w / norm_w
    raise PowerIterationError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(last residual {residual:.3e}, value {rho:.6e})",
        vector=v,
        value=rho,
        iterations=max_iter,
    )


def hermitian_sqrt(matrix, atol: float = 1e-10) -> np.ndarray:
    """Hermitian square root ``B`` of a PSD matrix, ``B B^H = matrix``.

    Eigenvalues in the window [-1e-9, 0) are treated as zero; anything
    below that is a genuine negative direction and raises.

    Args:
        matrix: Hermitian PSD array, shape (n, n).
        atol: tolerance for the Hermitian symmetry check.

    Returns:
        The PSD Hermitian square root, shape (n, n).
    """
    r = validation.as_complex_matrix(matrix, "matrix")
    if r.shape[0] != r.shape[1]:
        raise ValueError(f"matrix must be square, got shape {r.shape}")
    if not np.allclose(r, r.conj().T, rtol=atol, atol=atol):
        raise ValueError("matrix is not Hermitian within tolerance")
    evals, evecs = np.linalg.eigh((r + r.conj().T) / 2.0)
    if evals.min(initial=0.0) < -1e-9:
        raise ValueError(
            f"matrix is not positive semidefinite (eigenvalue {evals.min():.3e})"
        )
    evals = np.clip(evals, 0.0, None)
    return (evecs * np.sqrt(evals)) @ evecs.conj().T


def random_unit_vector(n: int, rng) -> np.ndarray:
    """Draw a Haar-uniform unit vector in C^n.

    Both quadrature components are standard normal, so the normalised
    direction is isotropic on the complex unit sphere.
    """
    if n < 1:
        raise ValueError(f"dimension must be at least 1, got {n}")
    gen = validation.as_rng(rng)
    v = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    return v / np.linalg.norm(v)
