"""Experiment orchestration: schedules, online runs, reference programs and outputs."""

from .experiment import (
    ExperimentConfig,
    RegretCurve,
    RunResult,
    compute_regret,
    regret_curve,
    run_online,
    run_sweep,
    solve_reference,
)
from .schedule import ScheduleSpec, gen_schedule, stream
