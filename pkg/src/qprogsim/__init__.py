"""Online optimization of program states for programmable quantum processors.

A time-varying single-qubit channel is simulated on a generalized
teleportation processor by updating the processor's program state with
matrix exponentiated gradient descent.
"""

from .channels import (
    QuantumChannel,
    amplitude_damping_channel,
    apply_channel,
    bell_state,
    choi_of_channel,
    dephasing_channel,
    identity_channel,
    pauli_channel,
)
from .losses import LossEvaluation, LossKind, fidelity_loss, subgrad_fidelity, subgrad_trace, trace_loss
from .megd import (
    MegdState,
    RegretBoundInputs,
    bregman_divergence,
    current_program,
    megd_init,
    megd_step,
    regret_bound,
    theoretical_eta,
    von_neumann_F,
)
from .processor import (
    GtpProcessor,
    ProcessorMap,
    choi_of_simulated,
    exact_program_for,
    gtp,
    gtp_apply,
    gtp_lambda,
    gtp_lambda_dual,
)

__version__ = "0.1.0"
