"""Matrix exponentiated gradient descent (MEGD) over density matrices.

The optimizer keeps the running sum of Hermitian subgradients and produces
the next program as ``exp(Z) / tr exp(Z)`` with
``Z = d I + log(pi_1) - eta * grad_sum``. This unrolled form avoids
repeated log/exp round trips. The scalar shift ``d`` cancels in the
normalization and only guards against overflow.

The module also provides the entropy and Bregman-divergence machinery used to
certify the update and the learning-rate/regret formulas of the worst-case
analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

from .errors import DimensionMismatch, InvalidInput, InvalidRate
from .linalg import eig_hermitian, hermitian_part, matrix_function, random_density
from .losses import LossEvaluation

DEFAULT_D = 2.0
LOG_EPS = 1e-12

DRule = Union[float, Callable[[int], float]]


@dataclass(frozen=True, eq=False)
class MegdState:
    program_qubits: int
    eta: float
    grad_sum: np.ndarray
    step_count: int
    d_rule: DRule
    initial_log: np.ndarray

    @property
    def dim(self) -> int:
        return 1 << self.program_qubits

    def d_at(self, t: int) -> float:
        return float(self.d_rule(t)) if callable(self.d_rule) else float(self.d_rule)

    @property
    def program(self) -> np.ndarray:
        return current_program(self)


def megd_init(n_pi: int, eta: float, d_rule: DRule = DEFAULT_D) -> MegdState:
    """Start from the maximally mixed program ``I / 2**n_pi``."""
    if not eta > 0:
        raise InvalidRate(f"learning rate must be positive, got {eta}")
    if n_pi < 1:
        raise InvalidInput("n_pi must be a positive integer")
    d = 1 << n_pi
    return MegdState(
        program_qubits=n_pi,
        eta=float(eta),
        grad_sum=np.zeros((d, d), dtype=np.complex128),
        step_count=0,
        d_rule=d_rule,
        initial_log=-n_pi * math.log(2.0) * np.eye(d, dtype=np.complex128),
    )


def exponent(s: MegdState) -> np.ndarray:
    """The matrix ``Z`` whose normalized exponential is the current program."""
    eye = np.eye(s.dim)
    return s.d_at(s.step_count) * eye + s.initial_log - s.eta * s.grad_sum


def normalized_exp(z: np.ndarray) -> np.ndarray:
    e = matrix_function(z, "exp")
    return e / np.trace(e).real


def current_program(s: MegdState) -> np.ndarray:
    return normalized_exp(exponent(s))


def megd_step(s: MegdState, g: LossEvaluation | np.ndarray) -> MegdState:
    """Accumulate one subgradient (only its Hermitian part is used)."""
    gt = g.hermitian_subgradient if isinstance(g, LossEvaluation) else hermitian_part(g)
    if gt.shape != s.grad_sum.shape:
        raise DimensionMismatch(f"subgradient must be {s.grad_sum.shape}, got {gt.shape}")
    return replace(s, grad_sum=s.grad_sum + gt, step_count=s.step_count + 1)


def recursive_step(pi: np.ndarray, g_herm: np.ndarray, eta: float) -> np.ndarray:
    """One step of the plain recursion ``exp(log(pi) - eta g) / tr(...)``.

    Only used to cross-check the unrolled form.
    """
    return normalized_exp(matrix_function(pi, "log", eps=LOG_EPS) - eta * hermitian_part(g_herm))


@dataclass(frozen=True)
class RegretBoundInputs:
    horizon: int
    grad_bound: float
    program_qubits: int

    def __post_init__(self):
        if not (self.horizon > 0 and self.grad_bound > 0 and self.program_qubits > 0):
            raise InvalidInput("horizon, grad_bound and program_qubits must all be positive")


def theoretical_eta(b: RegretBoundInputs) -> float:
    """``sqrt(2 ln(2) n_pi / (T L^2))``."""
    return math.sqrt(2.0 * math.log(2.0) * b.program_qubits / (b.horizon * b.grad_bound**2))


def regret_bound(b: RegretBoundInputs) -> float:
    """``L sqrt(2 ln(2) n_pi T)``."""
    return b.grad_bound * math.sqrt(2.0 * math.log(2.0) * b.program_qubits * b.horizon)


def proof_chain_bound(eta: float, program_qubits: int, grad_norms) -> float:
    """``ln(2) n_pi / eta + eta/2 * sum_t ||g_t||_*^2``, valid for any ``eta``."""
    g = np.asarray(grad_norms, dtype=float)
    return math.log(2.0) * program_qubits / eta + 0.5 * eta * float(np.sum(g**2))


def von_neumann_F(pi) -> float:
    """Negative von Neumann entropy ``tr(pi ln pi)`` with ``0 ln 0 = 0``."""
    w = eig_hermitian(pi).eigenvalues
    w = w[w > 0]
    return float(np.sum(w * np.log(w)))


def bregman_divergence(pi1, pi2, eps: float = LOG_EPS) -> float:
    """Quantum relative entropy ``tr(pi1 ln pi1 - pi1 ln pi2)``.

    Eigenvalues of ``pi2`` are floored at ``eps`` inside the logarithm.
    """
    cross = np.trace(np.asarray(pi1) @ matrix_function(pi2, "log", eps=eps)).real
    return von_neumann_F(pi1) - float(cross)


def variational_objective(pi, g_herm: np.ndarray, eta: float, pi_prev) -> float:
    return eta * float(np.trace(np.asarray(pi) @ g_herm).real) + bregman_divergence(pi, pi_prev)


def variational_certificate(
    s_before: MegdState,
    g: LossEvaluation | np.ndarray,
    trials: int,
    rng: np.random.Generator | None = None,
) -> bool:
    """Check numerically that the MEGD step minimizes ``eta tr[pi g] + B_F(pi; pi_t)``.

    The objective at the updated program is compared against ``trials`` random
    density matrices (a mix of full-rank and low-rank ones).
    """
    rng = np.random.default_rng() if rng is None else rng
    gt = g.hermitian_subgradient if isinstance(g, LossEvaluation) else hermitian_part(g)
    pi_t = current_program(s_before)
    pi_next = current_program(megd_step(s_before, gt))
    best = variational_objective(pi_next, gt, s_before.eta, pi_t)
    for i in range(trials):
        rank = None if i % 4 else int(rng.integers(1, s_before.dim + 1))
        sigma = random_density(s_before.dim, rng, rank=rank)
        if variational_objective(sigma, gt, s_before.eta, pi_t) < best - 1e-12:
            return False
    return True
