"""Online runs, hindsight reference programs and regret accounting.

Each online step commits to the program ``pi_t`` before the channel ``E_t``
is revealed. It then pays ``loss(E_t, pi_t)`` and feeds the subgradient to
MEGD. The reference program ``pi*`` is the best fixed program in hindsight,
approximated by batch MEGD on the summed loss.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np

from ..channels import choi_of_channel, dephasing_channel
from ..errors import InvalidInput, LengthMismatch
from ..linalg import spectral_norm
from ..losses import LossKind, TargetBatch, evaluate
from ..megd import (
    DEFAULT_D,
    RegretBoundInputs,
    current_program,
    megd_init,
    megd_step,
    theoretical_eta,
)
from ..processor import ProcessorMap, gtp
from .schedule import ScheduleSpec, gen_schedule

PAPER_ETA = 0.01
PAPER_P_MAXES = (0.2, 0.4, 0.6, 0.8)
TRACE_GRAD_BOUND = 1.0
CALIBRATION_ETA = PAPER_ETA

Eta = Union[float, str]


@dataclass(frozen=True)
class ExperimentConfig:
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    loss: LossKind = LossKind.TRACE
    eta: Eta = PAPER_ETA
    d_const: float = DEFAULT_D
    reference_iters: int = 120
    reference_base: float = 0.01
    output_path: str = ""

    def __post_init__(self):
        object.__setattr__(self, "loss", LossKind.parse(self.loss))
        if isinstance(self.eta, str):
            if self.eta != "theoretical":
                raise InvalidInput(f"eta must be a positive number or 'theoretical', got {self.eta!r}")
        elif not self.eta > 0:
            raise InvalidInput(f"eta must be positive, got {self.eta}")
        if self.reference_iters < 1:
            raise InvalidInput("reference_iters must be at least 1")
        if not self.reference_base > 0:
            raise InvalidInput("reference_base must be positive")

    def echo(self) -> dict:
        d = asdict(self)
        d["loss"] = self.loss.value
        return d


@dataclass(eq=False)
class RunResult:
    p: np.ndarray
    loss_online: np.ndarray
    loss_reference: np.ndarray
    reference_program: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.p) == len(self.loss_online) == len(self.loss_reference)):
            raise LengthMismatch("per-step columns must have equal length")

    @property
    def horizon(self) -> int:
        return len(self.p)

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.horizon + 1)

    @property
    def cum_online(self) -> np.ndarray:
        return np.cumsum(self.loss_online)

    @property
    def cum_reference(self) -> np.ndarray:
        return np.cumsum(self.loss_reference)

    @property
    def regret_to_t(self) -> np.ndarray:
        return self.cum_online - self.cum_reference

    @property
    def regret(self) -> float:
        return float(self.regret_to_t[-1])

    @property
    def normalized_regret(self) -> float:
        return self.regret / self.horizon


def dephasing_targets(probs: Sequence[float]) -> np.ndarray:
    return np.stack([choi_of_channel(dephasing_channel(p)) for p in probs])


@dataclass
class OnlineTrace:
    losses: np.ndarray
    grad_norms: np.ndarray
    programs: list


def online_losses(
    targets: np.ndarray,
    loss: LossKind,
    eta: float,
    d_const: float = DEFAULT_D,
    proc: ProcessorMap | None = None,
    keep_programs: bool = False,
) -> OnlineTrace:
    """Run MEGD over a known target sequence, one revealed channel at a time."""
    proc = gtp() if proc is None else proc
    state = megd_init(proc.program_qubits, eta, d_const)
    losses, norms, programs = [], [], []
    for c_t in targets:
        pi_t = current_program(state)
        ev = evaluate(loss, c_t, proc, pi_t)
        losses.append(ev.value)
        norms.append(spectral_norm(ev.subgradient))
        if keep_programs:
            programs.append(pi_t)
        state = megd_step(state, ev)
    return OnlineTrace(np.array(losses), np.array(norms), programs)


def solve_reference(
    targets: np.ndarray,
    cfg: ExperimentConfig,
    proc: ProcessorMap | None = None,
) -> np.ndarray:
    """Approximate ``argmin_pi sum_t loss(E_t, pi)`` by batch MEGD.

    Runs ``cfg.reference_iters`` MEGD iterations on the gradient of the sum at
    rate ``cfg.reference_base / T``, which is the same as the gradient of the
    mean at rate ``reference_base``. Returns the iterate with the lowest summed
    loss seen, so the result is never worse than the maximally mixed start.
    """
    proc = gtp() if proc is None else proc
    batch = TargetBatch(targets, cfg.loss)
    state = megd_init(proc.program_qubits, cfg.reference_base / len(batch), cfg.d_const)
    best_pi, best_val = None, np.inf
    for _ in range(cfg.reference_iters):
        pi = current_program(state)
        ev = batch.summed(proc, pi)
        if ev.value < best_val:
            best_pi, best_val = pi, ev.value
        state = megd_step(state, ev)
    pi = current_program(state)
    if float(batch.losses(proc, pi).sum()) < best_val:
        best_pi = pi
    return best_pi


def compute_regret(
    loss_online: Sequence[float],
    reference: np.ndarray,
    targets: np.ndarray,
    loss: LossKind | str,
    proc: ProcessorMap | None = None,
) -> tuple[float, float]:
    """``sum_t loss(E_t, pi_t) - sum_t loss(E_t, pi*)`` and the same divided by ``T``."""
    proc = gtp() if proc is None else proc
    online = np.asarray(loss_online, dtype=float)
    if online.shape[0] != len(targets):
        raise LengthMismatch(f"{online.shape[0]} online losses for {len(targets)} channels")
    ref = TargetBatch(targets, loss).losses(proc, reference)
    regret = float(np.cumsum(online)[-1] - np.cumsum(ref)[-1])
    return regret, regret / online.shape[0]


def calibrate_grad_bound(targets: np.ndarray, loss: LossKind, d_const: float = DEFAULT_D) -> float:
    """Largest observed subgradient spectral norm over a calibration run."""
    if loss is LossKind.TRACE:
        return TRACE_GRAD_BOUND
    trace = online_losses(targets, loss, CALIBRATION_ETA, d_const)
    return float(max(trace.grad_norms.max(), 1e-12))


def resolve_eta(cfg: ExperimentConfig, targets: np.ndarray) -> tuple[float, float | None]:
    """Numeric learning rate for a run and the gradient bound used, if any."""
    if cfg.eta != "theoretical":
        return float(cfg.eta), None
    grad_bound = calibrate_grad_bound(targets, cfg.loss, cfg.d_const)
    b = RegretBoundInputs(len(targets), grad_bound, gtp().program_qubits)
    return theoretical_eta(b), grad_bound


def run_online(cfg: ExperimentConfig, proc: ProcessorMap | None = None) -> RunResult:
    """One full experiment: online MEGD, hindsight reference and per-step records."""
    start = time.perf_counter()
    probs = gen_schedule(cfg.schedule)
    targets = dephasing_targets(probs)
    eta, grad_bound = resolve_eta(cfg, targets)
    trace = online_losses(targets, cfg.loss, eta, cfg.d_const, proc)
    reference = solve_reference(targets, cfg, proc)
    ref_losses = TargetBatch(targets, cfg.loss).losses(proc or gtp(), reference)
    meta = {
        "config": cfg.echo(),
        "eta_used": eta,
        "grad_bound": grad_bound if grad_bound is not None else (
            TRACE_GRAD_BOUND if cfg.loss is LossKind.TRACE else None),
        "max_grad_norm": float(trace.grad_norms.max()),
        "grad_norms": trace.grad_norms,
        "wall_time_s": time.perf_counter() - start,
    }
    return RunResult(probs, trace.losses, ref_losses, reference, meta)


@dataclass(eq=False)
class RegretCurve:
    """Normalized regret as a function of the window length ``T`` for one schedule."""

    p_max: float
    seed: int
    horizons: np.ndarray
    regret: np.ndarray

    @property
    def normalized_regret(self) -> np.ndarray:
        return self.regret / self.horizons


def regret_curve(
    probs: np.ndarray,
    cfg: ExperimentConfig,
    horizons: Sequence[int],
    p_max: float = float("nan"),
    seed: int = 0,
) -> RegretCurve:
    """Regret for every window ``E_1..E_T``, with ``pi*`` re-solved per window.

    With a fixed learning rate the online trajectory does not depend on ``T``,
    so it is computed once over the longest window and sliced.
    """
    targets = dephasing_targets(probs)
    hs = np.asarray(sorted(set(int(h) for h in horizons)), dtype=int)
    if hs[0] < 1 or hs[-1] > len(probs):
        raise InvalidInput("horizons must lie in [1, len(schedule)]")
    regrets = []
    shared = None if cfg.eta == "theoretical" else online_losses(targets, cfg.loss, cfg.eta, cfg.d_const).losses
    for h in hs:
        window = targets[:h]
        if shared is None:
            eta, _ = resolve_eta(cfg, window)
            online = online_losses(window, cfg.loss, eta, cfg.d_const).losses
        else:
            online = shared[:h]
        ref = solve_reference(window, cfg)
        regrets.append(compute_regret(online, ref, window, cfg.loss)[0])
    return RegretCurve(float(p_max), int(seed), hs, np.array(regrets))


@dataclass(frozen=True)
class SweepCell:
    index: int
    p_max: float
    seed: int


@dataclass(eq=False)
class CellOutcome:
    cell: SweepCell
    run: RunResult
    curve: RegretCurve


def sweep_cells(p_maxes: Sequence[float], n_seeds: int) -> list[SweepCell]:
    cells = []
    for i, p_max in enumerate(p_maxes):
        for s in range(n_seeds):
            cells.append(SweepCell(i * n_seeds + s, float(p_max), s))
    return cells


def _run_cell(args) -> CellOutcome:
    cell, base, master_seed, horizons = args
    spec = ScheduleSpec(
        kind="uniform_iid",
        p_min=base.schedule.p_min,
        p_max=cell.p_max,
        horizon=max(horizons),
        seed=master_seed,
        spawn_key=(cell.index,),
    )
    cfg = ExperimentConfig(spec, base.loss, base.eta, base.d_const,
                           base.reference_iters, base.reference_base)
    run = run_online(cfg)
    curve = regret_curve(run.p, cfg, horizons, cell.p_max, cell.seed)
    return CellOutcome(cell, run, curve)


def run_sweep(
    base: ExperimentConfig,
    p_maxes: Sequence[float] = PAPER_P_MAXES,
    n_seeds: int = 5,
    master_seed: int = 0,
    horizons: Sequence[int] | None = None,
    jobs: int = 1,
) -> list[CellOutcome]:
    """Evaluate every (p_max, seed) cell; results come back ordered by cell index.

    Cell ``i`` draws its schedule from ``stream(master_seed, i)``, so the output
    does not depend on ``jobs``.
    """
    if n_seeds < 1:
        raise InvalidInput("n_seeds must be at least 1")
    hs = list(range(1, base.schedule.horizon + 1)) if horizons is None else list(horizons)
    cells = sweep_cells(p_maxes, n_seeds)
    work = [(c, base, master_seed, hs) for c in cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_cell, work))
    else:
        outcomes = [_run_cell(w) for w in work]
    return sorted(outcomes, key=lambda o: o.cell.index)


def mean_curves(outcomes: Sequence[CellOutcome]) -> list[RegretCurve]:
    """Seed-averaged normalized-regret curve per ``p_max``, in first-seen order."""
    groups: dict[float, list[RegretCurve]] = {}
    for o in outcomes:
        groups.setdefault(o.cell.p_max, []).append(o.curve)
    out = []
    for p_max, curves in groups.items():
        hs = curves[0].horizons
        mean = np.mean([c.regret for c in curves], axis=0)
        out.append(RegretCurve(p_max, -1, hs, mean))
    return out
