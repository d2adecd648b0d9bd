"""Synthetic failure histories drawn from the geometric-rates process.

Each fault's first-failure time is sampled from its geometric distribution
by inverse transform, ``ceil(ln(1 - u) / ln(1 - p))`` with u uniform on
[0, 1), which reproduces the occurrence law exactly at integer times.
Draws are made with NumPy's PCG64 generator (``numpy.random.default_rng``);
replication i seeds its own generator with ``seed + i``, so runs are
reproducible and replications can be produced independently in any order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import FailureDataset, TimeUnit
from .model import GeometricModelParams

__all__ = [
    "FaultRealization",
    "SimulationConfig",
    "draw_realizations",
    "empirical_intensity",
    "simulate",
]


@dataclass(frozen=True)
class FaultRealization:
    """One fault's sampled first-failure time, in whole incidents."""

    fault_index: int
    failure_time: int

    def __post_init__(self) -> None:
        if self.fault_index < 1:
            raise ValueError("fault_index must be positive")
        if self.failure_time < 1:
            raise ValueError("failure_time must be at least 1")


@dataclass(frozen=True)
class SimulationConfig:
    """What to simulate: model parameters, observation horizon (incidents),
    base seed, and replication count."""

    params: GeometricModelParams
    horizon: int
    seed: int
    replications: int = 1

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1 incident")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative 64-bit integer")


def _draw_failure_times(params: GeometricModelParams, rng: np.random.Generator) -> np.ndarray:
    """One geometric draw per fault (values may exceed any horizon)."""
    u = rng.random(params.truncation)
    times = np.ceil(np.log1p(-u) / params.log_survival)
    return np.maximum(times, 1.0).astype(np.int64)


def draw_realizations(
    params: GeometricModelParams, rng: np.random.Generator
) -> list[FaultRealization]:
    """Sample every fault's first-failure time once."""
    times = _draw_failure_times(params, rng)
    return [FaultRealization(i + 1, int(t)) for i, t in enumerate(times)]


def simulate(config: SimulationConfig) -> list[FailureDataset]:
    """Generate one failure history per replication.

    Failures are the fault draws landing inside the horizon; ties at the
    same incident merge into a single measurement with the count jumping
    accordingly.  A replication with no failures is represented by the
    single measurement (horizon, 0).  Identical configs produce identical
    histories bit for bit.
    """
    datasets = []
    for i in range(config.replications):
        rng = np.random.default_rng(config.seed + i)
        times = _draw_failure_times(config.params, rng)
        hits = np.sort(times[times <= config.horizon])
        label = f"sim-seed{config.seed}-rep{i:03d}"
        if hits.size == 0:
            points: tuple[tuple[float, int], ...] = ((float(config.horizon), 0),)
        else:
            unique, per_time = np.unique(hits, return_counts=True)
            cumulative = np.cumsum(per_time)
            points = tuple(
                (float(t), int(c)) for t, c in zip(unique, cumulative)
            )
        datasets.append(FailureDataset(points, label, TimeUnit.INCIDENT))
    return datasets


def empirical_intensity(datasets: list[FailureDataset], t: int, horizon: int) -> float:
    """Average number of failures landing exactly at incident ``t`` across
    replications.

    ``horizon`` is the simulation horizon the histories share; it bounds
    the times at which the estimate is meaningful (beyond it every history
    is silent by construction, not by behaviour).
    """
    if not datasets:
        raise ValueError("need at least one replication")
    if t < 1:
        raise ValueError("t must be at least 1")
    if t > horizon:
        raise ValueError(f"t={t} lies beyond the simulation horizon {horizon}")
    total = sum(ds.count_at(t) - ds.count_at(t - 1) for ds in datasets)
    return total / len(datasets)
