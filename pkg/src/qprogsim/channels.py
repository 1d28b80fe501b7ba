"""Quantum channels in Kraus form, density matrices and Choi matrices.

Choi matrices follow the ``(I x E)|Phi+><Phi+|`` convention: the first ``n``
qubits are the untouched reference, the last ``n`` carry the channel output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotPSD, ProbabilityOutOfRange, TooLarge
from .linalg import as_matrix, eig_hermitian, is_hermitian, partial_trace, trace_norm

STATE_ATOL = 1e-10

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)


def _qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return n


def check_density(rho, qubits: int | None = None, atol: float = STATE_ATOL) -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Raises:
        DimensionMismatch: wrong shape or not ``2**qubits``.
        NotPSD: not Hermitian, eigenvalue below ``-atol`` or trace off by more than ``atol``.
    """
    m = as_matrix(rho)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got {m.shape}")
    n = _qubits_of(m.shape[0])
    if qubits is not None and n != qubits:
        raise DimensionMismatch(f"expected a {qubits}-qubit state, got {n} qubits")
    if not is_hermitian(m, atol=max(atol, 1e-12)):
        raise NotPSD("density matrix is not Hermitian")
    if abs(np.trace(m).real - 1.0) > atol:
        raise NotPSD(f"density matrix trace is {np.trace(m).real!r}, expected 1")
    if eig_hermitian(m).eigenvalues[-1] < -atol:
        raise NotPSD("density matrix has a negative eigenvalue")
    return m


def is_density(rho, atol: float = STATE_ATOL) -> bool:
    try:
        check_density(rho, atol=atol)
    except ValueError:
        return False
    return True


def is_choi(c, atol: float = STATE_ATOL) -> bool:
    """True if ``c`` is a unit-trace PSD matrix whose reference marginal is ``I/2^n``."""
    if not is_density(c, atol=atol):
        return False
    d = np.asarray(c).shape[0]
    n2 = _qubits_of(d)
    if n2 % 2:
        return False
    d_in = 1 << (n2 // 2)
    reduced = partial_trace(c, (d_in, d_in), which="last")
    return bool(np.allclose(reduced, np.eye(d_in) / d_in, rtol=0, atol=atol))


def ket(bits: str) -> np.ndarray:
    """Computational basis ket, e.g. ``ket("01")``."""
    v = np.zeros(1 << len(bits), dtype=np.complex128)
    v[int(bits, 2)] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    return np.outer(v, v.conj())


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map given by Kraus operators of shape ``(2**out_qubits, 2**in_qubits)``."""

    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.kraus_ops)
        if not ops:
            raise DimensionMismatch("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise DimensionMismatch("Kraus operators must share one shape")
        _qubits_of(shape[0])
        _qubits_of(shape[1])
        completeness = sum(k.conj().T @ k for k in ops)
        if not np.allclose(completeness, np.eye(shape[1]), rtol=0, atol=STATE_ATOL):
            raise ValueError("Kraus operators do not satisfy sum_i A_i^dagger A_i = I")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def in_qubits(self) -> int:
        return _qubits_of(self.kraus_ops[0].shape[1])

    @property
    def out_qubits(self) -> int:
        return _qubits_of(self.kraus_ops[0].shape[0])

    def __call__(self, rho) -> np.ndarray:
        return apply_channel(self, rho)


def _apply_linear(ch: QuantumChannel, x: np.ndarray) -> np.ndarray:
    return sum(k @ x @ k.conj().T for k in ch.kraus_ops)


def apply_channel(ch: QuantumChannel, rho) -> np.ndarray:
    """``sum_i A_i rho A_i^dagger`` for a valid input state."""
    m = check_density(rho, qubits=None)
    if m.shape[0] != ch.kraus_ops[0].shape[1]:
        raise DimensionMismatch(
            f"channel acts on {ch.in_qubits} qubits, state has {_qubits_of(m.shape[0])}"
        )
    return _apply_linear(ch, m)


def bell_state(n: int) -> np.ndarray:
    """Maximally entangled state ``|Phi+>`` on ``2n`` qubits as a density matrix."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > 3:
        raise TooLarge(f"bell_state supports n <= 3, got {n}")
    d = 1 << n
    v = np.eye(d, dtype=np.complex128).reshape(d * d) / np.sqrt(d)
    return projector(v)


def choi_of_channel(ch: QuantumChannel) -> np.ndarray:
    """Choi matrix ``(I x E)|Phi+><Phi+|`` built from the Kraus operators."""
    d_in = ch.kraus_ops[0].shape[1]
    phi = np.eye(d_in, dtype=np.complex128).reshape(d_in * d_in) / np.sqrt(d_in)
    c = np.zeros((d_in * ch.kraus_ops[0].shape[0],) * 2, dtype=np.complex128)
    for k in ch.kraus_ops:
        v = np.kron(np.eye(d_in), k) @ phi
        c += np.outer(v, v.conj())
    return c


def identity_channel(n: int = 1) -> QuantumChannel:
    return QuantumChannel((np.eye(1 << n, dtype=np.complex128),))


def _check_prob(p: float, name: str = "p") -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise ProbabilityOutOfRange(f"{name}={p} is outside [0, 1]")
    return p


def dephasing_channel(p: float) -> QuantumChannel:
    """``rho -> (1 - p) rho + p Z rho Z``."""
    p = _check_prob(p)
    return QuantumChannel((np.sqrt(1.0 - p) * PAULI_I, np.sqrt(p) * PAULI_Z))


def pauli_channel(p_x: float, p_y: float, p_z: float) -> QuantumChannel:
    probs = [_check_prob(p, name) for p, name in ((p_x, "p_x"), (p_y, "p_y"), (p_z, "p_z"))]
    total = sum(probs)
    if total > 1.0 + 1e-15:
        raise ProbabilityOutOfRange(f"p_x + p_y + p_z = {total} exceeds 1")
    weights = [max(1.0 - total, 0.0), *probs]
    return QuantumChannel(tuple(np.sqrt(w) * s for w, s in zip(weights, PAULIS)))


def amplitude_damping_channel(gamma: float) -> QuantumChannel:
    """Not teleportation-covariant; used as a non-simulable fixture."""
    g = _check_prob(gamma, "gamma")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]], dtype=np.complex128)
    k1 = np.array([[0, np.sqrt(g)], [0, 0]], dtype=np.complex128)
    return QuantumChannel((k0, k1))


def random_channel(n: int, rng: np.random.Generator, num_kraus: int | None = None) -> QuantumChannel:
    """Random channel from a Haar-random isometry; full-rank Choi when ``num_kraus = 4**n``."""
    d = 1 << n
    r = d * d if num_kraus is None else num_kraus
    g = rng.standard_normal((r * d, d)) + 1j * rng.standard_normal((r * d, d))
    q, _ = np.linalg.qr(g)
    return QuantumChannel(tuple(q[i * d:(i + 1) * d] for i in range(r)))


def mix_channels(channels: Sequence[QuantumChannel], weights: Sequence[float]) -> QuantumChannel:
    """Probabilistic mixture ``sum_j w_j E_j``."""
    if len(channels) != len(weights):
        raise DimensionMismatch("one weight per channel is required")
    ops = []
    for ch, w in zip(channels, weights):
        ops.extend(np.sqrt(float(w)) * k for k in ch.kraus_ops)
    return QuantumChannel(tuple(ops))


def channel_distance(a: QuantumChannel, b: QuantumChannel) -> float:
    """Trace distance between Choi matrices; channels are treated as equal below 1e-10."""
    return 0.5 * trace_norm(choi_of_channel(a) - choi_of_channel(b))


def channels_equal(a: QuantumChannel, b: QuantumChannel, atol: float = 1e-10) -> bool:
    return channel_distance(a, b) <= atol


def dephasing_from_choi(c) -> float:
    """Read ``p`` back from the ``(0, 3)`` corner entry ``(1 - 2p)/2`` of a dephasing Choi."""
    return float((1.0 - 2.0 * np.real(np.asarray(c)[0, 3])) / 2.0)

