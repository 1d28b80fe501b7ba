import numpy as np
import pytest

from qprogsim.processor import PHI_MINUS, PHI_PLUS, PSI_MINUS, PSI_PLUS

BELL_BASIS = np.stack([PHI_PLUS, PSI_PLUS, PSI_MINUS, PHI_MINUS], axis=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def bell_diag(q):
    """Density matrix diagonal in the Bell basis with weights q."""
    return (BELL_BASIS * np.asarray(q, dtype=float)) @ BELL_BASIS.conj().T


def in_bell_basis(m):
    return BELL_BASIS.conj().T @ m @ BELL_BASIS


def traceless_direction(pi, rng, scale=1.0):
    """Random traceless Hermitian direction, scaled so pi +/- 1e-3 * dir stays PSD."""
    d = pi.shape[0]
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (g + g.conj().T)
    h -= np.trace(h).real / d * np.eye(d)
    h /= np.linalg.norm(h, 2)
    lam_min = np.linalg.eigvalsh(pi)[0]
    return scale * min(1.0, lam_min) * h


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
