"""Pass/fail certificate suite behind the ``certify`` subcommand."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..channels import choi_of_channel, dephasing_channel
from ..linalg import random_density, random_hermitian, trace_norm
from ..losses import LossKind, fidelity_loss, trace_loss
from ..megd import RegretBoundInputs, proof_chain_bound, regret_bound
from ..processor import gtp
from .experiment import PAPER_P_MAXES, ExperimentConfig, run_online
from .schedule import ScheduleSpec, stream


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def check_exact_simulation() -> Check:
    proc = gtp()
    worst_l1 = worst_lf = 0.0
    for p in np.linspace(0.0, 1.0, 11):
        c = choi_of_channel(dephasing_channel(p))
        sim = proc.forward(c)
        worst_l1 = max(worst_l1, trace_loss(c, sim))
        worst_lf = max(worst_lf, fidelity_loss(c, sim))
    ok = worst_l1 <= 1e-10 and worst_lf <= 1e-9
    return Check("exact dephasing simulation", ok, f"max l1={worst_l1:.2e}, max lF={worst_lf:.2e}")


def check_processor(n_pairs: int = 100, n_programs: int = 200, seed: int = 0) -> list[Check]:
    proc = gtp()
    rng = stream(seed, 1)
    worst_dual = 0.0
    for _ in range(n_pairs):
        pi = random_density(4, rng)
        x = random_hermitian(4, rng)
        lhs = np.trace(proc.forward(pi) @ x)
        rhs = np.trace(pi @ proc.dual(x))
        worst_dual = max(worst_dual, abs(lhs - rhs))
    worst_circ = 0.0
    for _ in range(n_programs):
        pi = random_density(4, rng)
        worst_circ = max(worst_circ, 0.5 * trace_norm(proc.choi_of_simulated(pi) - proc.forward(pi)))
    return [
        Check("processor duality", worst_dual <= 1e-10, f"max |tr(L(pi)X) - tr(pi L*(X))| = {worst_dual:.2e}"),
        Check("circuit vs twirl", worst_circ <= 1e-10, f"max trace distance = {worst_circ:.2e}"),
    ]


def check_regret_bounds(
    horizons: Sequence[int] = (10, 50, 150),
    p_maxes: Sequence[float] = PAPER_P_MAXES,
    seeds: Sequence[int] = tuple(range(10)),
    loss: LossKind = LossKind.TRACE,
    chain_eta: float = 0.01,
    base: ExperimentConfig | None = None,
) -> list[Check]:
    """Realized regret against the worst-case bound and the intermediate proof bound."""
    base = ExperimentConfig() if base is None else base
    n_pi = gtp().program_qubits
    bound_viol = chain_viol = skipped = 0
    worst_ratio = worst_chain = -np.inf
    runs = 0
    for T in horizons:
        for p_max in p_maxes:
            for seed in seeds:
                spec = ScheduleSpec("uniform_iid", base.schedule.p_min, p_max, T, seed)
                for eta in ("theoretical", chain_eta):
                    cfg = ExperimentConfig(spec, loss, eta, base.d_const,
                                           base.reference_iters, base.reference_base)
                    r = run_online(cfg)
                    runs += 1
                    norms = r.metadata["grad_norms"]
                    chain = proof_chain_bound(r.metadata["eta_used"], n_pi, norms)
                    worst_chain = max(worst_chain, r.regret - chain)
                    chain_viol += r.regret > chain
                    if eta == "theoretical":
                        lstar = r.metadata["grad_bound"]
                        if norms.max() > lstar + 1e-12:
                            skipped += 1
                            continue
                        b = regret_bound(RegretBoundInputs(T, lstar, n_pi))
                        worst_ratio = max(worst_ratio, r.regret / b)
                        bound_viol += r.regret > b
    return [
        Check(
            "regret <= L*sqrt(2 ln2 n_pi T)",
            bound_viol == 0,
            f"{bound_viol} violations, max regret/bound = {worst_ratio:.4f}, "
            f"{skipped} runs skipped (gradient bound not met)",
        ),
        Check(
            "regret <= ln2 n_pi/eta + eta/2 sum ||g||^2",
            chain_viol == 0,
            f"{chain_viol} violations over {runs} runs, max regret - bound = {worst_chain:.4f}",
        ),
    ]


def run_certificates(**regret_kwargs) -> list[Check]:
    checks = [check_exact_simulation(), *check_processor()]
    checks.extend(check_regret_bounds(**regret_kwargs))
    return checks
