import numpy as np
import pytest

from qprogsim.channels import (
    amplitude_damping_channel,
    apply_channel,
    bell_state,
    choi_of_channel,
    dephasing_channel,
    identity_channel,
    is_choi,
    pauli_channel,
    projector,
)
from qprogsim.errors import DimensionMismatch
from qprogsim.linalg import random_density, random_hermitian, trace_norm
from qprogsim.losses import trace_loss
from qprogsim.processor import (
    BELL_PROJECTORS,
    CORRECTIONS,
    choi_of_simulated,
    exact_program_for,
    gtp,
    gtp_apply,
    gtp_lambda,
    gtp_lambda_dual,
)

PHI_MINUS_STATE = projector(np.array([1, 0, 0, -1]) / np.sqrt(2))


def test_bell_projectors_resolve_identity():
    np.testing.assert_allclose(sum(BELL_PROJECTORS), np.eye(4), atol=1e-15)
    for k, pk in enumerate(BELL_PROJECTORS):
        for j, pj in enumerate(BELL_PROJECTORS):
            np.testing.assert_allclose(pk @ pj, pk if j == k else 0, atol=1e-12)


def test_corrections_unitary():
    np.testing.assert_array_equal(CORRECTIONS[0], np.eye(2))
    for v in CORRECTIONS:
        np.testing.assert_allclose(v.conj().T @ v, np.eye(2))


def test_lambda_examples():
    np.testing.assert_allclose(gtp_lambda(np.eye(4) / 4), np.eye(4) / 4, atol=1e-15)
    np.testing.assert_allclose(gtp_lambda(bell_state(1)), bell_state(1), atol=1e-15)
    for p in (0.0, 0.2, 0.65, 1.0):
        c = choi_of_channel(dephasing_channel(p))
        np.testing.assert_allclose(gtp_lambda(c), c, atol=1e-15)


def test_lambda_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        gtp_lambda(np.eye(2) / 2)
    with pytest.raises(DimensionMismatch):
        gtp_lambda_dual(np.eye(8))


def test_dual_examples(rng):
    np.testing.assert_allclose(gtp_lambda_dual(np.eye(4)), np.eye(4), atol=1e-15)
    np.testing.assert_allclose(gtp_lambda_dual(bell_state(1)), bell_state(1), atol=1e-15)
    for _ in range(20):
        x = random_hermitian(4, rng)
        np.testing.assert_allclose(gtp_lambda_dual(x), gtp().forward(x), atol=1e-14)


def test_duality_identity(rng):
    proc = gtp()
    for _ in range(100):
        pi = random_density(4, rng)
        x = random_hermitian(4, rng)
        assert abs(np.trace(proc.forward(pi) @ x) - np.trace(pi @ proc.dual(x))) < 1e-10


def test_lambda_channel_properties(rng):
    proc = gtp()
    np.testing.assert_allclose(sum(k.conj().T @ k for k in proc.kraus_ops), np.eye(4), atol=1e-15)
    for _ in range(100):
        pi = random_density(4, rng, rank=int(rng.integers(1, 5)))
        c = gtp_lambda(pi)
        assert abs(np.trace(c) - 1) < 1e-12
        assert np.linalg.eigvalsh(c)[0] >= -1e-12
        assert is_choi(c)


def test_gtp_apply_identity_program(rng):
    for _ in range(20):
        rho = random_density(2, rng, rank=int(rng.integers(1, 3)))
        np.testing.assert_allclose(gtp_apply(rho, bell_state(1)), rho, atol=1e-14)


def test_gtp_apply_dephasing_program():
    plus = projector(np.array([1, 1]) / np.sqrt(2))
    minus = projector(np.array([1, -1]) / np.sqrt(2))
    for p in (0.0, 0.1, 0.3, 0.9):
        pi = choi_of_channel(dephasing_channel(p))
        out = gtp_apply(plus, pi)
        np.testing.assert_allclose(out, (1 - p) * plus + p * minus, atol=1e-14)
        np.testing.assert_allclose(out, apply_channel(dephasing_channel(p), plus), atol=1e-14)


def test_gtp_apply_maximally_mixed_program(rng):
    for _ in range(10):
        rho = random_density(2, rng)
        np.testing.assert_allclose(gtp_apply(rho, np.eye(4) / 4), np.eye(2) / 2, atol=1e-15)


def test_gtp_apply_outputs_states(rng):
    for _ in range(50):
        out = gtp_apply(random_density(2, rng), random_density(4, rng))
        assert abs(np.trace(out) - 1) < 1e-12
        assert np.linalg.eigvalsh(out)[0] >= -1e-12


def test_choi_of_simulated_examples():
    np.testing.assert_allclose(choi_of_simulated(bell_state(1)), bell_state(1), atol=1e-15)
    c = choi_of_channel(dephasing_channel(0.3))
    np.testing.assert_allclose(choi_of_simulated(c), c, atol=1e-15)


def test_circuit_matches_twirl(rng):
    for _ in range(200):
        pi = random_density(4, rng, rank=int(rng.integers(1, 5)))
        assert 0.5 * trace_norm(choi_of_simulated(pi) - gtp_lambda(pi)) < 1e-10


def test_exact_program_for():
    np.testing.assert_allclose(exact_program_for(identity_channel()), bell_state(1))
    for p in np.linspace(0, 1, 11):
        ch = dephasing_channel(p)
        assert trace_loss(choi_of_channel(ch), gtp_lambda(exact_program_for(ch))) <= 1e-10


def test_exact_program_pauli_channels(rng):
    for _ in range(50):
        p = rng.dirichlet(np.ones(4))
        ch = pauli_channel(*p[1:])
        assert trace_loss(choi_of_channel(ch), gtp_lambda(exact_program_for(ch))) <= 1e-10


def test_amplitude_damping_not_simulable():
    ch = amplitude_damping_channel(0.5)
    residual = trace_loss(choi_of_channel(ch), gtp_lambda(exact_program_for(ch)))
    assert residual > 1e-3
    # the twirl of the amplitude-damping Choi is a Pauli-channel Choi
    assert is_choi(gtp_lambda(exact_program_for(ch)))


def test_identity_program_phi_minus():
    # Phi- program simulates Z conjugation
    plus = projector(np.array([1, 1]) / np.sqrt(2))
    minus = projector(np.array([1, -1]) / np.sqrt(2))
    np.testing.assert_allclose(gtp_apply(plus, PHI_MINUS_STATE), minus, atol=1e-15)
