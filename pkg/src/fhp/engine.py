"""Reference semantics of one FHP time step.

A step is: ghost-column sync, gather motion ``src -> dst``, buffer swap,
then table collision plus forcing on the new ``src``.  Every parallel
backend is checked against :func:`full_step`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from fhp import kernels
from fhp.collision import CollisionTable, build_table
from fhp.config import SimConfig
from fhp.lattice import Lattice, init_lattice, sync_ghost_columns
from fhp.rng import threshold

StepCallback = Callable[[int, Lattice], None]


def motion_step(src: np.ndarray, dst: np.ndarray, geometry: np.ndarray) -> None:
    kernels.motion_pull(src, dst, geometry, 0, src.shape[0])


def collision_step(buf: np.ndarray, table: CollisionTable, step_index: int, force_p: float, seed: int) -> None:
    width = buf.shape[1] - 2
    kernels.collide(buf, table.entries, seed, step_index, threshold(force_p), 1, width + 1, 0, buf.shape[0])


def full_step(lat: Lattice, table: CollisionTable, cfg: SimConfig, step_index: int | None = None) -> None:
    step_index = lat.step if step_index is None else step_index
    sync_ghost_columns(lat)
    motion_step(lat.src, lat.dst, lat.geometry)
    lat.swap()
    collision_step(lat.src, table, step_index, cfg.force_p, cfg.seed)
    lat.step = step_index + 1


@dataclass
class ObservableSeries:
    steps: list[int] = field(default_factory=list)
    mass: list[int] = field(default_factory=list)
    momentum: list[tuple[int, int]] = field(default_factory=list)

    def record(self, lat: Lattice) -> None:
        from fhp.observables import total_mass, total_momentum

        self.steps.append(lat.step)
        self.mass.append(total_mass(lat))
        self.momentum.append(total_momentum(lat))


def sample_steps(steps: int, dump_every: int) -> list[int]:
    """Steps after which observables are sampled; ``dump_every == 0`` means final only."""
    if dump_every == 0:
        return [steps]
    points = list(range(0, steps + 1, dump_every))
    if points[-1] != steps:
        points.append(steps)
    return points


def run(
    cfg: SimConfig,
    table: CollisionTable | None = None,
    obstacle_mask: np.ndarray | None = None,
    on_sample: StepCallback | None = None,
) -> tuple[Lattice, ObservableSeries]:
    """Initialize a lattice and advance it ``cfg.steps`` steps on the configured backend.

    ``on_sample(step, lattice)`` is called at every sample point (see
    :func:`sample_steps`), including step 0 when ``dump_every > 0``.
    """
    from fhp.backends import make_stepper

    cfg.validate()
    table = build_table() if table is None else table
    lat = init_lattice(cfg, obstacle_mask)
    stepper = make_stepper(cfg, table)
    series = ObservableSeries()
    for target in sample_steps(cfg.steps, cfg.dump_every):
        if target > lat.step:
            stepper.advance(lat, target - lat.step)
        series.record(lat)
        if on_sample is not None:
            on_sample(lat.step, lat)
    return lat, series
