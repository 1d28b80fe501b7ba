import numpy as np
import pytest

from conftest import traceless_direction
from qprogsim.channels import bell_state, choi_of_channel, dephasing_channel, random_channel
from qprogsim.errors import DimensionMismatch
from qprogsim.linalg import random_density, spectral_norm
from qprogsim.losses import (
    LossEvaluation,
    LossKind,
    TargetBatch,
    evaluate,
    fidelity_loss,
    loss_value,
    subgrad_fidelity,
    subgrad_trace,
    trace_loss,
)
from qprogsim.processor import gtp


def dephasing_choi(p):
    return choi_of_channel(dephasing_channel(p))


def fidelity_oracle(p1, p2):
    return 1 - (np.sqrt((1 - p1) * (1 - p2)) + np.sqrt(p1 * p2)) ** 2


def test_trace_loss_examples():
    assert trace_loss(bell_state(1), bell_state(1)) == pytest.approx(0, abs=1e-15)
    assert trace_loss(dephasing_choi(0.2), dephasing_choi(0.5)) == pytest.approx(0.3, abs=1e-12)
    phi_minus = dephasing_choi(1.0)
    assert trace_loss(bell_state(1), phi_minus) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_loss_examples():
    assert fidelity_loss(bell_state(1), bell_state(1)) == pytest.approx(0, abs=1e-12)
    assert fidelity_loss(bell_state(1), dephasing_choi(1.0)) == pytest.approx(1.0, abs=1e-12)
    assert fidelity_loss(bell_state(1), np.eye(4) / 4) == pytest.approx(0.75, abs=1e-12)


def test_loss_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        trace_loss(np.eye(4) / 4, np.eye(2) / 2)
    with pytest.raises(DimensionMismatch):
        fidelity_loss(np.eye(2) / 2, np.eye(4) / 4)


def test_analytic_grid():
    grid = np.linspace(0, 1, 21)
    for p1 in grid:
        for p2 in grid:
            a, b = dephasing_choi(p1), dephasing_choi(p2)
            assert abs(trace_loss(a, b) - abs(p1 - p2)) < 1e-9
            assert abs(fidelity_loss(a, b) - fidelity_oracle(p1, p2)) < 1e-9


def test_losses_symmetric_and_bounded(rng):
    for _ in range(100):
        a = random_density(4, rng, rank=int(rng.integers(1, 5)))
        b = random_density(4, rng, rank=int(rng.integers(1, 5)))
        assert abs(trace_loss(a, b) - trace_loss(b, a)) < 1e-12
        assert abs(fidelity_loss(a, b) - fidelity_loss(b, a)) < 1e-9
        assert 0 <= trace_loss(a, b) <= 1
        assert 0 <= fidelity_loss(a, b) <= 1
        # Fuchs-van de Graaf
        t, f = trace_loss(a, b), 1 - fidelity_loss(a, b)
        assert 1 - np.sqrt(f) <= t + 1e-9
        assert t <= np.sqrt(1 - f) + 1e-9


def _fd(kind, target, pi, direction, h=1e-6):
    proc = gtp()
    plus = loss_value(kind, target, proc.forward(pi + h * direction))
    minus = loss_value(kind, target, proc.forward(pi - h * direction))
    return (plus - minus) / (2 * h)


@pytest.mark.parametrize("kind", [LossKind.TRACE, LossKind.FIDELITY])
def test_subgradient_matches_finite_difference(kind, rng):
    proc = gtp()
    for _ in range(60):
        target = choi_of_channel(random_channel(1, rng, num_kraus=4))
        pi = 0.9 * random_density(4, rng) + 0.1 * np.eye(4) / 4
        direction = traceless_direction(pi, rng)
        g = evaluate(kind, target, proc, pi).hermitian_subgradient
        analytic = np.trace(g @ direction).real
        assert abs(_fd(kind, target, pi, direction) - analytic) < 1e-4


def test_trace_subgradient_inequality(rng):
    proc = gtp()
    for _ in range(200):
        target = choi_of_channel(random_channel(1, rng))
        pi = random_density(4, rng, rank=int(rng.integers(1, 5)))
        other = random_density(4, rng, rank=int(rng.integers(1, 5)))
        ev = subgrad_trace(target, proc, pi)
        lower = ev.value + np.trace(ev.hermitian_subgradient @ (other - pi)).real
        assert trace_loss(target, proc.forward(other)) >= lower - 1e-12


def test_root_fidelity_concavity_inequality(rng):
    # F = sqrt(1 - lF) is concave in pi and dF = -g / (2F)
    proc = gtp()
    for _ in range(200):
        target = choi_of_channel(random_channel(1, rng, num_kraus=4))
        pi = 0.9 * random_density(4, rng) + 0.1 * np.eye(4) / 4
        other = random_density(4, rng, rank=int(rng.integers(1, 5)))
        ev = subgrad_fidelity(target, proc, pi)
        f = np.sqrt(1 - ev.value)
        upper = f + np.trace(-ev.hermitian_subgradient / (2 * f) @ (other - pi)).real
        assert np.sqrt(1 - fidelity_loss(target, proc.forward(other))) <= upper + 1e-9


def test_trace_loss_convex_along_segments(rng):
    proc = gtp()
    for _ in range(100):
        target = choi_of_channel(random_channel(1, rng))
        a, b = random_density(4, rng), random_density(4, rng)
        w = rng.uniform()
        mid = trace_loss(target, proc.forward(w * a + (1 - w) * b))
        ends = w * trace_loss(target, proc.forward(a)) + (1 - w) * trace_loss(target, proc.forward(b))
        assert mid <= ends + 1e-12


def test_trace_subgradient_at_exact_match():
    # sign(0) = +1 turns the sign operator into the identity, and Lambda*(I) = I
    proc = gtp()
    for pi in (bell_state(1), dephasing_choi(0.3), np.eye(4) / 4):
        ev = subgrad_trace(proc.forward(pi), proc, pi)
        assert ev.value < 1e-12
        np.testing.assert_allclose(ev.subgradient, 0.5 * np.eye(4), atol=1e-12)


def test_fidelity_subgradient_at_exact_match():
    # at C_pi = C_E the inner operator is the support projector of C_E
    proc = gtp()
    ev = subgrad_fidelity(bell_state(1), proc, bell_state(1))
    assert ev.value < 1e-12
    np.testing.assert_allclose(ev.subgradient, -bell_state(1), atol=1e-10)
    c = dephasing_choi(0.3)
    ev = subgrad_fidelity(c, proc, c)
    np.testing.assert_allclose(ev.subgradient, -np.diag([1.0, 0, 0, 1.0]), atol=1e-10)


def test_trace_subgradient_norm_bound(rng):
    proc = gtp()
    for _ in range(200):
        target = choi_of_channel(random_channel(1, rng))
        pi = random_density(4, rng, rank=int(rng.integers(1, 5)))
        assert spectral_norm(subgrad_trace(target, proc, pi).subgradient) <= 0.5 + 1e-12


def test_subgradients_hermitian(rng):
    proc = gtp()
    for _ in range(50):
        target = choi_of_channel(random_channel(1, rng))
        pi = random_density(4, rng)
        for kind in LossKind:
            g = evaluate(kind, target, proc, pi).subgradient
            np.testing.assert_allclose(g, g.conj().T, atol=1e-12)


def test_loss_kind_parse():
    assert LossKind.parse("trace") is LossKind.TRACE
    assert LossKind.parse("infidelity") is LossKind.FIDELITY
    assert LossKind.parse(LossKind.FIDELITY) is LossKind.FIDELITY
    with pytest.raises(ValueError):
        LossKind.parse("kl")


def test_loss_evaluation_hermitian_part():
    ev = LossEvaluation(0.0, np.array([[0, 1], [0, 0]], dtype=complex))
    np.testing.assert_allclose(ev.hermitian_subgradient, [[0, 0.5], [0.5, 0]])


@pytest.mark.parametrize("kind", list(LossKind))
def test_target_batch_matches_single_evaluations(kind, rng):
    proc = gtp()
    targets = np.stack([dephasing_choi(p) for p in rng.uniform(0.2, 0.8, 7)])
    batch = TargetBatch(targets, kind)
    assert len(batch) == 7
    for _ in range(10):
        pi = random_density(4, rng)
        singles = [evaluate(kind, t, proc, pi) for t in targets]
        np.testing.assert_allclose(batch.losses(proc, pi), [e.value for e in singles], atol=1e-12)
        summed = batch.summed(proc, pi)
        assert summed.value == pytest.approx(sum(e.value for e in singles), abs=1e-11)
        np.testing.assert_allclose(summed.subgradient, sum(e.subgradient for e in singles), atol=1e-10)
