"""Parallel step implementations, each byte-identical to :func:`fhp.engine.full_step`.

``lanes``
    Scatter motion on wide words of 16/32/64 nodes (the SSE/AVX analog).
``strips``
    Horizontal strips, one worker thread each, two barriers per step.
``tiles``
    Overlapping blocks: each tile reads its write region plus a one-node
    halo into private scratch, scatters there, and stores back only its
    write region.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from fhp import kernels
from fhp.collision import CollisionTable
from fhp.config import LANE_WIDTHS, Backend, SimConfig
from fhp.engine import collision_step, full_step
from fhp.lattice import Lattice, sync_ghost_columns
from fhp.rng import threshold


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class LanePlan:
    lanes: int

    def __post_init__(self) -> None:
        if self.lanes not in LANE_WIDTHS:
            raise PlanError(f"lane width must be one of {LANE_WIDTHS}, got {self.lanes}")

    def chunks(self, width: int) -> tuple[int, int]:
        """``(wide words, leftover scalar columns)`` for one row of ``width`` interior nodes."""
        return width // self.lanes, width % self.lanes


@dataclass(frozen=True)
class StripPlan:
    """Row ranges ``[r_start, r_end)`` over the interior rows ``1 .. H-2``."""

    height: int
    strips: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.strips:
            raise PlanError("strip plan has no strips")
        expected = 1
        for r0, r1 in self.strips:
            if r1 <= r0:
                raise PlanError(f"empty strip [{r0}, {r1})")
            if r0 != expected:
                raise PlanError(f"strips must be contiguous and disjoint; got [{r0}, {r1}) after row {expected}")
            expected = r1
        if expected != self.height - 1:
            raise PlanError(f"strips cover rows 1..{expected - 1}, need 1..{self.height - 2}")

    @property
    def n(self) -> int:
        return len(self.strips)

    def write_rows(self) -> list[tuple[int, int]]:
        """Strips with the wall rows attached to the first and last strip."""
        rows = [list(s) for s in self.strips]
        rows[0][0] = 0
        rows[-1][1] = self.height
        return [tuple(r) for r in rows]


@dataclass(frozen=True)
class TilePlan:
    """Write regions ``B`` as ``(x0, x1, y0, y1)`` tiling columns ``1..W`` and rows ``1..H-2``."""

    width: int
    height: int
    tile_x: int
    tile_y: int
    tiles: tuple[tuple[int, int, int, int], ...]

    def write_regions(self) -> np.ndarray:
        """Write regions with the wall rows folded into the top and bottom tiles."""
        regions = np.array(self.tiles, dtype=np.int64).reshape(-1, 4)
        regions[regions[:, 2] == 1, 2] = 0
        regions[regions[:, 3] == self.height - 1, 3] = self.height
        return np.ascontiguousarray(regions)

    def read_regions(self) -> np.ndarray:
        """Region ``A``: each write region grown by the one-node halo, clipped to the grid."""
        a = self.write_regions() + np.array([-1, 1, -1, 1])
        a[:, 2] = np.maximum(a[:, 2], 0)
        a[:, 3] = np.minimum(a[:, 3], self.height)
        return a


def make_strip_plan(height: int, n: int) -> StripPlan:
    interior = height - 2
    if n < 1:
        raise PlanError(f"thread count must be >= 1, got {n}")
    if n > interior:
        raise PlanError(f"{n} strips requested but only {interior} interior rows")
    base, extra = divmod(interior, n)
    strips, r = [], 1
    for i in range(n):
        size = base + (1 if i < extra else 0)
        strips.append((r, r + size))
        r += size
    return StripPlan(height, tuple(strips))


def make_tile_plan(width: int, height: int, tile_x: int, tile_y: int) -> TilePlan:
    if tile_x < 1 or tile_y < 1:
        raise PlanError(f"tile sizes must be >= 1, got {tile_x}x{tile_y}")
    tiles = []
    for y0 in range(1, height - 1, tile_y):
        y1 = min(y0 + tile_y, height - 1)
        for x0 in range(1, width + 1, tile_x):
            tiles.append((x0, min(x0 + tile_x, width + 1), y0, y1))
    return TilePlan(width, height, tile_x, tile_y, tuple(tiles))


def motion_step_lanes(src: np.ndarray, dst: np.ndarray, geometry: np.ndarray, plan: LanePlan) -> int:
    """Scatter motion in ``plan.lanes``-node words; returns the number of wide words processed."""
    return kernels.motion_lanes(src, dst, geometry, plan.lanes)


def step_lanes(lat: Lattice, table: CollisionTable, cfg: SimConfig, step_index: int, plan: LanePlan) -> int:
    sync_ghost_columns(lat)
    words = motion_step_lanes(lat.src, lat.dst, lat.geometry, plan)
    lat.swap()
    collision_step(lat.src, table, step_index, cfg.force_p, cfg.seed)
    lat.step = step_index + 1
    return words


class _StripWorkers:
    """``plan.n`` workers advancing a lattice together.

    Barrier one (action: ghost sync) opens each step; barrier two (action:
    buffer swap) separates motion from collision.  Workers only ever write
    their own rows.
    """

    def __init__(self, lat, table, cfg, plan: StripPlan):
        self.lat, self.table, self.cfg = lat, table, cfg
        self.rows = plan.write_rows()
        self.thr = threshold(cfg.force_p)
        self.errors: list[BaseException] = []

    def motion(self, i: int) -> None:
        r0, r1 = self.rows[i]
        kernels.motion_pull(self.lat.src, self.lat.dst, self.lat.geometry, r0, r1)

    def collide(self, i: int, step: int) -> None:
        r0, r1 = self.rows[i]
        w = self.lat.width
        kernels.collide(self.lat.src, self.table.entries, self.cfg.seed, step, self.thr, 1, w + 1, r0, r1)

    def run_threads(self, first: int, count: int) -> None:
        n = len(self.rows)
        start = threading.Barrier(n, action=lambda: sync_ghost_columns(self.lat))
        middle = threading.Barrier(n, action=self.lat.swap)

        def work(i: int) -> None:
            try:
                for step in range(first, first + count):
                    start.wait()
                    self.motion(i)
                    middle.wait()
                    self.collide(i, step)
            except threading.BrokenBarrierError:
                pass
            except BaseException as exc:
                self.errors.append(exc)
                start.abort()
                middle.abort()

        threads = [threading.Thread(target=work, args=(i,), name=f"fhp-strip-{i}") for i in range(n)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if self.errors:
            raise self.errors[0]

    def run_sequential(self, first: int, count: int) -> None:
        for step in range(first, first + count):
            sync_ghost_columns(self.lat)
            for i in range(len(self.rows)):
                self.motion(i)
            self.lat.swap()
            for i in range(len(self.rows)):
                self.collide(i, step)


def step_strips(
    lat: Lattice,
    table: CollisionTable,
    cfg: SimConfig,
    step_index: int,
    plan: StripPlan,
    sequential: bool = False,
    count: int = 1,
) -> None:
    """Advance ``count`` steps starting at ``step_index`` with one worker per strip."""
    if plan.height != lat.height:
        raise PlanError(f"strip plan is for H={plan.height}, lattice has H={lat.height}")
    workers = _StripWorkers(lat, table, cfg, plan)
    if sequential or plan.n == 1:
        workers.run_sequential(step_index, count)
    else:
        workers.run_threads(step_index, count)
    lat.step = step_index + count


def _split(regions: np.ndarray, parts: int) -> list[np.ndarray]:
    return [np.ascontiguousarray(c) for c in np.array_split(regions, parts) if len(c)]


def step_tiles(
    lat: Lattice,
    table: CollisionTable,
    cfg: SimConfig,
    step_index: int,
    plan: TilePlan,
    threads: int = 1,
    sequential: bool = False,
    pool: ThreadPoolExecutor | None = None,
) -> None:
    """One step over independent tiles; tile groups may run concurrently since write regions are disjoint."""
    if (plan.width, plan.height) != (lat.width, lat.height):
        raise PlanError(f"tile plan is for {plan.width}x{plan.height}, lattice is {lat.width}x{lat.height}")
    sync_ghost_columns(lat)
    src, dst, geom = lat.src, lat.dst, lat.geometry
    thr = threshold(cfg.force_p)

    def work(group: np.ndarray) -> None:
        kernels.motion_tiles(src, dst, geom, group)
        # dst becomes the current state after the swap; collide it in place.
        kernels.collide_tiles(dst, table.entries, cfg.seed, step_index, thr, group)

    groups = _split(plan.write_regions(), 1 if sequential else threads)
    if len(groups) == 1:
        work(groups[0])
    elif pool is not None:
        list(pool.map(work, groups))
    else:
        with ThreadPoolExecutor(max_workers=len(groups)) as ex:
            list(ex.map(work, groups))
    lat.swap()
    lat.step = step_index + 1


def motion_write_counts(lat: Lattice, regions: list[tuple[int, int, int, int]] | np.ndarray, backend: str) -> np.ndarray:
    """Instrumented motion: how many workers write each node of ``dst``.

    Each worker's motion is run alone onto two sentinel-filled buffers; a
    node counts as written by that worker if either sentinel changed.
    ``regions`` are per-worker row ranges (``strips``) or write regions
    (``tiles``).
    """
    counts = np.zeros(lat.src.shape, dtype=np.int64)
    for region in regions:
        touched = np.zeros(lat.src.shape, dtype=bool)
        for sentinel in (0x00, 0xFF):
            dst = np.full_like(lat.src, sentinel)
            if backend == "strips":
                kernels.motion_pull(lat.src, dst, lat.geometry, int(region[0]), int(region[1]))
            elif backend == "tiles":
                kernels.motion_tiles(lat.src, dst, lat.geometry, np.array([region], dtype=np.int64))
            else:
                raise ValueError(f"unknown backend {backend!r}")
            touched |= dst != sentinel
        counts += touched
    return counts


def tile_coverage(plan: TilePlan) -> tuple[np.ndarray, np.ndarray]:
    """``(writes, reads)`` per storage node for a tile plan (ghost columns are separate locations)."""
    shape = (plan.height, plan.width + 2)
    writes = np.zeros(shape, dtype=np.int64)
    reads = np.zeros(shape, dtype=np.int64)
    for x0, x1, y0, y1 in plan.write_regions():
        writes[y0:y1, x0:x1] += 1
    for x0, x1, y0, y1 in plan.read_regions():
        reads[y0:y1, x0:x1] += 1
    return writes, reads


class Stepper:
    """Advances a lattice on one backend; built by :func:`make_stepper`."""

    def __init__(self, cfg: SimConfig, table: CollisionTable, sequential: bool = False):
        self.cfg, self.table, self.sequential = cfg, table, sequential
        self.backend = Backend(cfg.backend)
        self.wide_words = 0
        self._tile_plan: TilePlan | None = None

    def advance(self, lat: Lattice, count: int) -> None:
        cfg, table = self.cfg, self.table
        if self.backend is Backend.SCALAR:
            for _ in range(count):
                full_step(lat, table, cfg)
        elif self.backend is Backend.LANES:
            plan = LanePlan(cfg.lanes)
            for _ in range(count):
                self.wide_words += step_lanes(lat, table, cfg, lat.step, plan)
        elif self.backend is Backend.STRIPS:
            plan = make_strip_plan(lat.height, cfg.threads)
            step_strips(lat, table, cfg, lat.step, plan, sequential=self.sequential, count=count)
        elif self.backend is Backend.TILES:
            if self._tile_plan is None or (self._tile_plan.width, self._tile_plan.height) != (lat.width, lat.height):
                self._tile_plan = make_tile_plan(lat.width, lat.height, cfg.tile_x, cfg.tile_y)
            threads = 1 if self.sequential else cfg.threads
            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    for _ in range(count):
                        step_tiles(lat, table, cfg, lat.step, self._tile_plan, threads=threads, pool=pool)
            else:
                for _ in range(count):
                    step_tiles(lat, table, cfg, lat.step, self._tile_plan, sequential=True)
        else:  # pragma: no cover - Backend is closed
            raise ValueError(f"unknown backend {self.backend!r}")


def make_stepper(cfg: SimConfig, table: CollisionTable, sequential: bool = False) -> Stepper:
    if cfg.backend is Backend.STRIPS and cfg.threads > cfg.height - 2:
        raise PlanError(f"{cfg.threads} strips requested but only {cfg.height - 2} interior rows")
    return Stepper(cfg, table, sequential)
