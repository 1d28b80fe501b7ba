"""Simulation-error losses between Choi matrices and their subgradients in the program.

Two losses are supported: the trace distance ``1/2 ||C_E - C_pi||_tr`` and the
infidelity ``1 - F(C_E, C_pi)^2``, with ``F(A, B) = tr sqrt(sqrt(A) B sqrt(A))``.
Subgradients are taken with respect to the program state ``pi``, where
``C_pi = Lambda(pi)`` for the processor map ``Lambda``.

Every evaluation path runs through a batched core that handles a stack of
targets at once. The online loop passes a single target and the hindsight
reference solver passes the whole schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatch
from .linalg import as_matrix, dagger, hermitian_part
from .processor import ProcessorMap

FIDELITY_EPS = 1e-10
# eigenvalues below this fraction of max(largest eigenvalue, 1) are numerical zeros
RANK_RTOL = 1e-13


class LossKind(str, Enum):
    TRACE = "trace_distance"
    FIDELITY = "infidelity"

    @classmethod
    def parse(cls, tag: "str | LossKind") -> "LossKind":
        if isinstance(tag, LossKind):
            return tag
        aliases = {"trace": cls.TRACE, "trace_distance": cls.TRACE,
                   "fidelity": cls.FIDELITY, "infidelity": cls.FIDELITY}
        try:
            return aliases[str(tag).lower()]
        except KeyError:
            raise ValueError(f"unknown loss {tag!r}; use 'trace' or 'fidelity'") from None


@dataclass(frozen=True, eq=False)
class LossEvaluation:
    value: float
    subgradient: np.ndarray
    hermitian_subgradient: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "hermitian_subgradient", hermitian_part(self.subgradient))


def _stack(targets) -> np.ndarray:
    t = np.asarray(targets, dtype=np.complex128)
    return t[None] if t.ndim == 2 else t


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Batched PSD square root with numerical-zero eigenvalues dropped."""
    w, v = np.linalg.eigh(hermitian_part_batch(a))
    w = _clip_small(w)
    return (v * np.sqrt(w)[..., None, :]) @ dagger(v)


def _clip_small(w: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.max(np.abs(w), axis=-1, keepdims=True), 1.0)
    return np.where(w > RANK_RTOL * scale, w, 0.0)


def hermitian_part_batch(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def _check_pair(c_target, c_sim) -> tuple[np.ndarray, np.ndarray]:
    a, b = as_matrix(c_target), as_matrix(c_sim)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"Choi matrices must share a square shape, got {a.shape} and {b.shape}")
    return a, b


def _trace_terms(c_sim: np.ndarray, targets: np.ndarray):
    # per-target loss values and the summed sign-projector operator
    w, v = np.linalg.eigh(hermitian_part_batch(c_sim[None] - targets))
    values = 0.5 * np.sum(np.abs(w), axis=-1)
    signs = np.where(w >= 0.0, 1.0, -1.0)
    sign_ops = (v * signs[..., None, :]) @ dagger(v)
    return values, sign_ops.sum(axis=0)


def _fidelity_terms(c_sim: np.ndarray, sqrt_targets: np.ndarray, eps: float):
    m = hermitian_part_batch(sqrt_targets @ c_sim[None] @ sqrt_targets)
    w, u = np.linalg.eigh(m)
    w = _clip_small(w)
    fid = np.sum(np.sqrt(w), axis=-1)
    inv = np.zeros_like(w)
    keep = w > eps
    inv[keep] = 1.0 / np.sqrt(w[keep])
    m_inv_sqrt = (u * inv[..., None, :]) @ dagger(u)
    inner = sqrt_targets @ m_inv_sqrt @ sqrt_targets
    values = np.clip(1.0 - fid**2, 0.0, 1.0)
    # d(1 - F^2) = -2 F dF and dF = 1/2 tr[Lambda*(inner) dpi]
    weighted = -(fid[:, None, None] * inner).sum(axis=0)
    return values, fid, weighted


def trace_loss(c_target, c_sim) -> float:
    """Trace distance ``1/2 ||C_E - C_pi||_tr``."""
    a, b = _check_pair(c_target, c_sim)
    values, _ = _trace_terms(b, a[None])
    return float(values[0])


def fidelity_loss(c_target, c_sim) -> float:
    """Infidelity ``1 - (tr sqrt(sqrt(C_E) C_pi sqrt(C_E)))^2``, clipped to [0, 1]."""
    a, b = _check_pair(c_target, c_sim)
    values, _, _ = _fidelity_terms(b, _psd_sqrt(a[None]), FIDELITY_EPS)
    return float(values[0])


def subgrad_trace(c_target, proc: ProcessorMap, pi) -> LossEvaluation:
    """Trace-distance loss and its subgradient in ``pi``.

    With ``C_pi - C_E = sum_i lambda_i E_i`` the subgradient is
    ``1/2 sum_i sign(lambda_i) Lambda*(E_i)`` with ``sign(0) = +1``. The 1/2
    comes from the 1/2 in the loss, so this is the true gradient wherever the
    error operator is nonsingular.
    """
    pi = as_matrix(pi)
    values, sign_op = _trace_terms(proc.forward(pi), _stack(c_target))
    return LossEvaluation(float(values[0]), 0.5 * proc.dual(sign_op))


def subgrad_fidelity(c_target, proc: ProcessorMap, pi, eps: float = FIDELITY_EPS) -> LossEvaluation:
    """Infidelity loss and its subgradient ``-F * Lambda*(sqrt(C_E) M^{-1/2} sqrt(C_E))``.

    ``M = sqrt(C_E) Lambda(pi) sqrt(C_E)`` and ``M^{-1/2}`` is the pseudo-inverse
    square root on eigenvalues above ``eps``, which matters for rank-deficient targets
    such as dephasing Chois.
    """
    pi = as_matrix(pi)
    values, _, weighted = _fidelity_terms(proc.forward(pi), _psd_sqrt(_stack(c_target)), eps)
    return LossEvaluation(float(values[0]), proc.dual(weighted))


def evaluate(kind: LossKind | str, c_target, proc: ProcessorMap, pi) -> LossEvaluation:
    kind = LossKind.parse(kind)
    if kind is LossKind.TRACE:
        return subgrad_trace(c_target, proc, pi)
    return subgrad_fidelity(c_target, proc, pi)


def loss_value(kind: LossKind | str, c_target, c_sim) -> float:
    if LossKind.parse(kind) is LossKind.TRACE:
        return trace_loss(c_target, c_sim)
    return fidelity_loss(c_target, c_sim)


class TargetBatch:
    """A fixed stack of target Choi matrices for repeated summed-loss evaluation.

    Square roots of the targets are computed once up front when the infidelity
    loss is selected.
    """

    def __init__(self, targets, kind: LossKind | str):
        self.targets = _stack(targets)
        self.kind = LossKind.parse(kind)
        self._sqrt = _psd_sqrt(self.targets) if self.kind is LossKind.FIDELITY else None

    def __len__(self) -> int:
        return self.targets.shape[0]

    def losses(self, proc: ProcessorMap, pi) -> np.ndarray:
        """Per-target loss values at program ``pi``."""
        c_sim = proc.forward(np.asarray(pi, dtype=np.complex128))
        if self.kind is LossKind.TRACE:
            return _trace_terms(c_sim, self.targets)[0]
        return _fidelity_terms(c_sim, self._sqrt, FIDELITY_EPS)[0]

    def summed(self, proc: ProcessorMap, pi) -> LossEvaluation:
        """Sum of the per-target losses and the subgradient of that sum."""
        c_sim = proc.forward(np.asarray(pi, dtype=np.complex128))
        if self.kind is LossKind.TRACE:
            values, sign_op = _trace_terms(c_sim, self.targets)
            return LossEvaluation(float(values.sum()), 0.5 * proc.dual(sign_op))
        values, _, weighted = _fidelity_terms(c_sim, self._sqrt, FIDELITY_EPS)
        return LossEvaluation(float(values.sum()), proc.dual(weighted))
