"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Every function
here is pure and never mutates its arguments.

Spectral functions (``matrix_function``) and sign-weighted projector sums only
depend on eigenspaces, never on the particular basis chosen inside a
degenerate eigenspace, so no tie-breaking between equal eigenvalues is done.
"""

from __future__ import annotations

from typing import Literal, NamedTuple

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput, NotPSD, NotSquare

HERMITIAN_ATOL = 1e-12
PSD_SLACK = 1e-10
DEFAULT_EPS = 1e-12

MatrixFunction = Literal["exp", "log", "sqrt", "inv_sqrt", "pinv_sqrt"]


class EigDecomposition(NamedTuple):
    """Eigenvalues in descending order and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a) -> np.ndarray:
    """Convert to a 2-D complex array, rejecting NaN/Inf entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteInput("matrix contains NaN or Inf entries")
    return m


def _square(a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, atol: float = HERMITIAN_ATOL) -> bool:
    m = np.asarray(a)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, rtol=0, atol=atol)


def hermitian_part(a) -> np.ndarray:
    """Return ``(A + A^dagger) / 2``."""
    m = _square(a)
    return 0.5 * (m + m.conj().T)


def eig_hermitian(a) -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.

    The input is symmetrized first so that round-off asymmetry does not leak
    into the decomposition.
    """
    m = hermitian_part(a)
    w, v = np.linalg.eigh(m)
    return EigDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def _apply_spectral(w: np.ndarray, f: str, eps: float) -> np.ndarray:
    if f == "exp":
        return np.exp(w)
    if np.any(w < -PSD_SLACK):
        raise NotPSD(f"matrix function {f!r} needs a PSD argument; min eigenvalue {w.min():.3e}")
    if f == "log":
        return np.log(np.maximum(w, eps))
    if f == "sqrt":
        return np.sqrt(np.maximum(w, 0.0))
    if f == "inv_sqrt":
        return 1.0 / np.sqrt(np.maximum(w, eps))
    if f == "pinv_sqrt":
        # pseudo-inverse: directions at or below the floor are dropped
        out = np.zeros_like(w)
        keep = w > eps
        out[keep] = 1.0 / np.sqrt(w[keep])
        return out
    raise ValueError(f"unknown matrix function {f!r}")


def matrix_function(a, f: MatrixFunction, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    Args:
        a: Hermitian matrix.
        f: One of ``exp``, ``log``, ``sqrt``, ``inv_sqrt`` or ``pinv_sqrt``.
            All but ``exp`` require a PSD argument (eigenvalue slack 1e-10).
        eps: Eigenvalue floor. ``log`` and ``inv_sqrt`` evaluate at
            ``max(lambda, eps)``; ``pinv_sqrt`` zeroes eigenvalues ``<= eps``
            instead (support-restricted inverse square root).

    Returns:
        ``sum_i f(lambda_i) v_i v_i^dagger``.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    dec = eig_hermitian(a)
    fw = _apply_spectral(dec.eigenvalues, f, eps)
    v = dec.eigenvectors
    return (v * fw) @ v.conj().T


def singular_values(a) -> np.ndarray:
    return np.linalg.svd(as_matrix(a), compute_uv=False)


def trace_norm(a) -> float:
    """Sum of singular values, ``tr sqrt(A^dagger A)``."""
    return float(np.sum(singular_values(a)))


def spectral_norm(a) -> float:
    """Largest singular value."""
    s = singular_values(a)
    return float(s[0]) if s.size else 0.0


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(a, dims: tuple[int, int], which: Literal["first", "last"] = "last") -> np.ndarray:
    """Partial trace over one factor of a bipartite operator.

    Args:
        a: Operator on a space of dimension ``d_keep * d_discard``.
        dims: ``(d_keep, d_discard)``.
        which: Position of the discarded factor in the tensor product.
    """
    m = _square(a)
    d_keep, d_discard = dims
    if m.shape[0] != d_keep * d_discard:
        raise DimensionMismatch(
            f"operator of dim {m.shape[0]} does not factor as {d_keep} x {d_discard}"
        )
    if which == "last":
        return np.einsum("ijkj->ik", m.reshape(d_keep, d_discard, d_keep, d_discard))
    if which == "first":
        return np.einsum("jijk->ik", m.reshape(d_discard, d_keep, d_discard, d_keep))
    raise ValueError(f"which must be 'first' or 'last', got {which!r}")


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (g + g.conj().T)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the induced (Ginibre) measure.

    With ``rank=None`` the result is full rank almost surely.
    """
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
