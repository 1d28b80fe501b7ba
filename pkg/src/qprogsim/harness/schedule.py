"""Adversarial dephasing schedules and the random streams behind them.

Randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence``. PCG64 output is specified bit-for-bit, so a given seed
yields the same schedule on every platform. Independent per-cell streams for
sweeps are derived with ``SeedSequence`` spawn keys, as in
``stream(master_seed, cell_index)``, which keeps parallel runs reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from ..errors import InvalidRange

ScheduleKind = Literal["uniform_iid", "constant", "custom_list"]
UINT64_MAX = (1 << 64) - 1


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Generator for ``seed`` split along ``keys`` (the spawn key)."""
    if not 0 <= int(seed) <= UINT64_MAX:
        raise InvalidRange(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ScheduleSpec:
    kind: ScheduleKind = "uniform_iid"
    p_min: float = 0.2
    p_max: float = 0.2
    horizon: int = 150
    seed: int = 0
    spawn_key: tuple[int, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("uniform_iid", "constant", "custom_list"):
            raise InvalidRange(f"unknown schedule kind {self.kind!r}")
        if self.horizon < 1:
            raise InvalidRange("horizon must be at least 1")
        if not 0 <= self.seed <= UINT64_MAX:
            raise InvalidRange(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.kind == "custom_list":
            if len(self.values) != self.horizon:
                raise InvalidRange("custom_list needs exactly `horizon` values")
            if any(not 0.0 <= v <= 1.0 for v in self.values):
                raise InvalidRange("custom_list probabilities must lie in [0, 1]")
        elif not 0.0 <= self.p_min <= self.p_max <= 1.0:
            raise InvalidRange(f"need 0 <= p_min <= p_max <= 1, got [{self.p_min}, {self.p_max}]")


def gen_schedule(spec: ScheduleSpec) -> np.ndarray:
    """Dephasing probabilities ``p_1..p_T``.

    ``uniform_iid`` draws from the half-open interval ``[p_min, p_max)``; when
    ``p_min == p_max`` the channel is constant at ``p_min``.
    """
    if spec.kind == "custom_list":
        return np.array(spec.values, dtype=float)
    if spec.kind == "constant" or spec.p_min == spec.p_max:
        return np.full(spec.horizon, spec.p_min, dtype=float)
    rng = stream(spec.seed, *spec.spawn_key)
    return rng.uniform(spec.p_min, spec.p_max, size=spec.horizon)


def custom_schedule(values: Sequence[float]) -> ScheduleSpec:
    vals = tuple(float(v) for v in values)
    return ScheduleSpec(kind="custom_list", horizon=len(vals), values=vals)
