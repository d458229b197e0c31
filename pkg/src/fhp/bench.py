"""Timing harness reporting million lattice-site updates per second (Mups)."""

from __future__ import annotations

import dataclasses
import json
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Iterable, TextIO

from fhp import kernels
from fhp.backends import make_stepper
from fhp.collision import CollisionTable, build_table
from fhp.config import Backend, SimConfig
from fhp.lattice import init_lattice, state_digest

DEFAULT_WARMUP = 10


@dataclass
class BenchRecord:
    backend: str
    threads: int
    lanes: int
    tile_x: int
    tile_y: int
    width: int
    height: int
    steps: int
    wall_seconds: float
    mups: float
    state_digest: int
    warmup_steps: int
    repeat: int | str
    kernel_impl: str = kernels.IMPLEMENTATION

    def to_json(self) -> str:
        d = dataclasses.asdict(self)
        d["state_digest"] = f"{self.state_digest:016x}"
        return json.dumps(d, sort_keys=False)


def compute_mups(width: int, height: int, steps: int, wall_seconds: float) -> float:
    if wall_seconds <= 0:
        raise ValueError(f"wall time must be positive, got {wall_seconds}")
    return width * height * steps / (wall_seconds * 1e6)


def run_bench(
    cfg: SimConfig,
    repeats: int = 3,
    warmup: int = DEFAULT_WARMUP,
    table: CollisionTable | None = None,
    obstacle_mask=None,
    clock: Callable[[], float] = time.perf_counter,
) -> list[BenchRecord]:
    """Time ``cfg.steps`` steps ``repeats`` times; the last record is the median summary.

    Warmup steps run untimed on each repeat's fresh lattice.  The digest is
    taken after warmup plus timed steps, so it doubles as a correctness
    check across backends.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    if cfg.steps < 1:
        raise ValueError("steps must be >= 1 to benchmark")
    if warmup < 0:
        raise ValueError(f"warmup must be >= 0, got {warmup}")
    table = build_table() if table is None else table
    records = []
    for rep in range(repeats):
        lat = init_lattice(cfg, obstacle_mask)
        stepper = make_stepper(cfg, table)
        if warmup:
            stepper.advance(lat, warmup)
        t0 = clock()
        stepper.advance(lat, cfg.steps)
        wall = clock() - t0
        records.append(_record(cfg, wall, state_digest(lat), warmup, rep))
    wall = statistics.median(r.wall_seconds for r in records)
    records.append(_record(cfg, wall, records[-1].state_digest, warmup, "median"))
    return records


def _record(cfg: SimConfig, wall: float, digest: int, warmup: int, repeat) -> BenchRecord:
    return BenchRecord(
        backend=Backend(cfg.backend).value,
        threads=cfg.threads,
        lanes=cfg.lanes,
        tile_x=cfg.tile_x,
        tile_y=cfg.tile_y,
        width=cfg.width,
        height=cfg.height,
        steps=cfg.steps,
        wall_seconds=wall,
        mups=compute_mups(cfg.width, cfg.height, cfg.steps, wall),
        state_digest=digest,
        warmup_steps=warmup,
        repeat=repeat,
    )


def speedups(records: Iterable[BenchRecord]) -> dict[str, float]:
    """Median Mups of each backend relative to the scalar backend."""
    medians = {r.backend: r.mups for r in records if r.repeat == "median"}
    base = medians.get(Backend.SCALAR.value)
    if not base:
        return {}
    return {name: mups / base for name, mups in medians.items()}


_CODE_TYPE = {"scalar": "seq", "lanes": "SIMD", "strips": "Pth", "tiles": "tiles"}


def format_table(records: Iterable[BenchRecord], out: TextIO) -> None:
    """Aligned table of median records: code type, parallelism, Mups, speedup."""
    medians = [r for r in records if r.repeat == "median"]
    ratio = speedups(medians)
    rows = [("code", "backend", "threads", "lanes", "tile", "Mups", "vs scalar", "digest")]
    for r in medians:
        rows.append(
            (
                _CODE_TYPE.get(r.backend, r.backend),
                r.backend,
                str(r.threads) if r.backend in ("strips", "tiles") else "1",
                str(r.lanes) if r.backend == "lanes" else "-",
                f"{r.tile_x}x{r.tile_y}" if r.backend == "tiles" else "-",
                f"{r.mups:.2f}",
                f"{ratio[r.backend]:.2f}" if r.backend in ratio else "-",
                f"{r.state_digest:016x}",
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    for row in rows:
        out.write("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) + "\n")
