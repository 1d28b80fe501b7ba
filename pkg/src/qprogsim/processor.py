"""Programmable processors: the map from a program state to the Choi matrix it simulates.

A processor ``Q`` acting on ``rho x pi`` induces a channel ``E_pi``. Its Choi
matrix depends linearly and completely positively on ``pi``; that map and its
adjoint are what the optimizer needs. :class:`ProcessorMap` stores the map in
Kraus form so that other processors can be plugged in. The generalized
teleportation processor (GTP) is the one implementation shipped, together
with a circuit-level simulator used to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    PAULIS,
    QuantumChannel,
    check_density,
    choi_of_channel,
    identity_channel,
    projector,
)
from .errors import DimensionMismatch
from .linalg import as_matrix, dagger, partial_trace


@dataclass(frozen=True, eq=False)
class ProcessorMap:
    """Program-to-Choi map ``Lambda(pi) = sum_i A_i pi A_i^dagger`` and its dual.

    Kraus operators have shape ``(4**channel_qubits, 2**program_qubits)``. The
    map is taken to be time-invariant.
    """

    kraus_ops: tuple[np.ndarray, ...]
    program_qubits: int
    channel_qubits: int

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.kraus_ops)
        want = (1 << (2 * self.channel_qubits), 1 << self.program_qubits)
        if any(k.shape != want for k in ops):
            raise DimensionMismatch(f"processor Kraus operators must have shape {want}")
        object.__setattr__(self, "kraus_ops", ops)
        # stacked copies for vectorized evaluation
        object.__setattr__(self, "_stack", np.stack(ops))

    @property
    def program_dim(self) -> int:
        return 1 << self.program_qubits

    @property
    def choi_dim(self) -> int:
        return 1 << (2 * self.channel_qubits)

    def forward(self, pi) -> np.ndarray:
        """Choi matrix of the channel simulated with program ``pi``.

        Accepts a single matrix or a stack of shape ``(..., d, d)``.
        """
        pi = np.asarray(pi, dtype=np.complex128)
        if pi.shape[-2:] != (self.program_dim, self.program_dim):
            raise DimensionMismatch(
                f"program must be {self.program_dim}x{self.program_dim}, got {pi.shape[-2:]}"
            )
        a = self._stack
        return (a @ pi[..., None, :, :] @ dagger(a)).sum(axis=-3)

    def dual(self, x) -> np.ndarray:
        """Adjoint map ``sum_i A_i^dagger X A_i``."""
        x = np.asarray(x, dtype=np.complex128)
        if x.shape[-2:] != (self.choi_dim, self.choi_dim):
            raise DimensionMismatch(
                f"dual input must be {self.choi_dim}x{self.choi_dim}, got {x.shape[-2:]}"
            )
        a = self._stack
        return (dagger(a) @ x[..., None, :, :] @ a).sum(axis=-3)


# Nielsen-Chuang Bell states. Measurement outcome k selects projector P_k and
# correction V_k: Phi+ -> I, Psi+ -> X, Psi- -> Y, Phi- -> Z. Y = iXZ, and the
# global phase does not matter under conjugation.
_S = 1.0 / np.sqrt(2.0)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=np.complex128) * _S
PSI_PLUS = np.array([0, 1, 1, 0], dtype=np.complex128) * _S
PSI_MINUS = np.array([0, 1, -1, 0], dtype=np.complex128) * _S
PHI_MINUS = np.array([1, 0, 0, -1], dtype=np.complex128) * _S
BELL_PROJECTORS = tuple(projector(v) for v in (PHI_PLUS, PSI_PLUS, PSI_MINUS, PHI_MINUS))
CORRECTIONS = PAULIS


class GtpProcessor(ProcessorMap):
    """Generalized teleportation processor: one input qubit, two program qubits.

    The input qubit and the first program qubit undergo a Bell measurement;
    outcome ``k`` triggers the Pauli correction ``V_k`` on the second program
    qubit, which carries the output.

    Its program-to-Choi map is the Pauli twirl
    ``Lambda(pi) = 1/4 sum_k (V_k^dagger x V_k) pi (V_k^dagger x V_k)^dagger``,
    which is self-dual.
    """

    bell_projectors = BELL_PROJECTORS
    corrections = CORRECTIONS

    def __init__(self):
        ops = tuple(0.5 * np.kron(v.conj().T, v) for v in CORRECTIONS)
        super().__init__(ops, program_qubits=2, channel_qubits=1)

    def apply(self, rho, pi) -> np.ndarray:
        """Circuit-level output ``E_pi(rho)`` as exact density-matrix arithmetic.

        Register order is (input, program 1, program 2); the first two qubits
        are traced out after the outcome-conditioned correction.
        """
        rho = check_density(rho, qubits=1)
        pi = check_density(pi, qubits=2)
        return _gtp_circuit(rho, pi)

    def choi_of_simulated(self, pi) -> np.ndarray:
        """Choi matrix of ``rho -> apply(rho, pi)`` evaluated through its definition."""
        pi = check_density(pi, qubits=2)
        c = np.zeros((4, 4), dtype=np.complex128)
        for i in range(2):
            for j in range(2):
                e_ij = np.zeros((2, 2), dtype=np.complex128)
                e_ij[i, j] = 1.0
                # the circuit is linear in its input, so it can act on |i><j|
                c += np.kron(e_ij, _gtp_circuit(e_ij, pi))
        return c / 2.0


def _gtp_circuit(rho: np.ndarray, pi: np.ndarray) -> np.ndarray:
    state = np.kron(rho, pi)
    out = np.zeros((2, 2), dtype=np.complex128)
    eye2 = np.eye(2)
    for p_k, v_k in zip(BELL_PROJECTORS, CORRECTIONS):
        m = np.kron(p_k, eye2)
        branch = partial_trace(m @ state @ m, (2, 4), which="first")
        out += v_k @ branch @ v_k.conj().T
    return out


_GTP = GtpProcessor()


def gtp() -> GtpProcessor:
    """Shared immutable GTP instance."""
    return _GTP


def gtp_lambda(pi) -> np.ndarray:
    pi = check_density(pi, qubits=2)
    return _GTP.forward(pi)


def gtp_lambda_dual(x) -> np.ndarray:
    x = as_matrix(x)
    if x.shape != (4, 4):
        raise DimensionMismatch(f"expected a 4x4 operator, got {x.shape}")
    return _GTP.dual(x)


def gtp_apply(rho, pi) -> np.ndarray:
    return _GTP.apply(rho, pi)


def choi_of_simulated(pi) -> np.ndarray:
    return _GTP.choi_of_simulated(pi)


def exact_program_for(ch: QuantumChannel) -> np.ndarray:
    """Program state equal to the channel's Choi matrix.

    GTP reproduces the channel exactly only when it is teleportation-covariant
    (Pauli channels, for instance). For other channels, such as amplitude damping,
    the simulated Choi differs from the target.
    """
    if ch.in_qubits != 1 or ch.out_qubits != 1:
        raise DimensionMismatch("exact_program_for supports single-qubit channels")
    return choi_of_channel(ch)


def identity_program() -> np.ndarray:
    return exact_program_for(identity_channel(1))

