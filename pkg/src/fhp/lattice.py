"""Node encoding, hexagonal geometry and the double-buffered lattice.

Storage layout: ``H`` rows by ``W + 2`` columns of bytes.  Columns ``0`` and
``W + 1`` are ghost columns mirroring columns ``W`` and ``1``; rows ``0`` and
``H - 1`` are solid walls.  Odd rows are shifted by half a lattice constant
in +x, and row indices grow southward.

Bit layout of a node::

    bit 0..5  moving particle, direction NW, NE, E, SE, SW, W
    bit 6     rest particle
    bit 7     obstacle
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from os import PathLike
from typing import TYPE_CHECKING

import numpy as np

from fhp.rng import RngPurpose, mix64_array, node_random_grid, threshold

if TYPE_CHECKING:
    from fhp.config import SimConfig

NW, NE, E, SE, SW, W = range(6)
REST = 6
OBSTACLE = 7

DIRECTION_NAMES = ("NW", "NE", "E", "SE", "SW", "W")

MOVING_MASK = 0x3F
REST_BIT = 1 << REST
OBSTACLE_BIT = 1 << OBSTACLE
PARTICLE_MASK = 0x7F

# Momentum in integer units: px in c/2, py in (sqrt(3)/2)c.  y points north.
MOMENTUM = ((-1, 1), (1, 1), (2, 0), (1, -1), (-1, -1), (-2, 0))

# Physical unit vectors, same order as MOMENTUM.
UNIT_VECTORS = tuple((px / 2.0, py * np.sqrt(3.0) / 2.0) for px, py in MOMENTUM)

POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def opposite(d: int) -> int:
    return (d + 3) % 6


def offset(d: int, parity: int) -> tuple[int, int]:
    """``(dx, dr)`` storage offset for one hop in direction ``d`` from a row of ``parity``."""
    q = parity
    return (
        (q - 1, -1),  # NW
        (q, -1),  # NE
        (1, 0),  # E
        (q, 1),  # SE
        (q - 1, 1),  # SW
        (-1, 0),  # W
    )[d]


def neighbor_of(x: int, r: int, d: int) -> tuple[int, int]:
    """Storage coordinates of the neighbor of column ``x``, row ``r`` in direction ``d``."""
    dx, dr = offset(d, r & 1)
    return x + dx, r + dr


def moving_momentum(state: int) -> tuple[int, int]:
    px = py = 0
    for k in range(6):
        if state >> k & 1:
            px += MOMENTUM[k][0]
            py += MOMENTUM[k][1]
    return px, py


@dataclass
class Lattice:
    """Two byte buffers plus the fixed obstacle geometry.

    After a complete time step ``src`` holds the current state; ``dst`` is
    scratch.
    """

    width: int
    height: int
    src: np.ndarray
    dst: np.ndarray
    obstacle_mask: np.ndarray
    step: int = 0
    geometry: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        shape = (self.height, self.width + 2)
        for name in ("src", "dst", "obstacle_mask"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        self.obstacle_mask.setflags(write=False)
        # Obstacle bit field as bytes, the form the kernels consume.
        self.geometry = np.where(self.obstacle_mask, OBSTACLE_BIT, 0).astype(np.uint8)
        self.geometry.setflags(write=False)

    @classmethod
    def empty(cls, width: int, height: int, obstacle_mask: np.ndarray | None = None) -> "Lattice":
        if width < 1 or height < 3:
            raise ValueError(f"lattice needs W >= 1 and H >= 3, got W={width}, H={height}")
        if obstacle_mask is None:
            obstacle_mask = channel_mask(width, height)
        geom = np.where(obstacle_mask, OBSTACLE_BIT, 0).astype(np.uint8)
        return cls(width, height, geom.copy(), geom.copy(), np.array(obstacle_mask, dtype=bool))

    def swap(self) -> None:
        self.src, self.dst = self.dst, self.src

    @property
    def interior(self) -> np.ndarray:
        """View of the current state without ghost columns (all rows)."""
        return self.src[:, 1 : self.width + 1]

    def copy(self) -> "Lattice":
        return Lattice(
            self.width,
            self.height,
            self.src.copy(),
            self.dst.copy(),
            self.obstacle_mask.copy(),
            self.step,
        )


def channel_mask(width: int, height: int) -> np.ndarray:
    """Obstacle mask of a plain channel: solid top and bottom rows."""
    mask = np.zeros((height, width + 2), dtype=bool)
    mask[0, :] = True
    mask[-1, :] = True
    return mask


def mask_from_interior(interior: np.ndarray) -> np.ndarray:
    """Extend an ``H x W`` obstacle mask with mirrored ghost columns and forced wall rows."""
    interior = np.asarray(interior, dtype=bool)
    height, width = interior.shape
    mask = np.zeros((height, width + 2), dtype=bool)
    mask[:, 1 : width + 1] = interior
    mask[0, :] = True
    mask[-1, :] = True
    mask[:, 0] = mask[:, width]
    mask[:, width + 1] = mask[:, 1]
    return mask


def load_geometry(path: str | PathLike, width: int, height: int) -> np.ndarray:
    """Read an ASCII obstacle map ('.' fluid, '#' obstacle), one lattice row per line.

    Returns the full ``H x (W + 2)`` obstacle mask.  Rows 0 and H-1 are walls
    regardless of what the file says.
    """
    with open(path) as fh:
        lines = [line.rstrip("\r\n") for line in fh]
    while lines and not lines[-1]:
        lines.pop()
    if len(lines) != height:
        raise ValueError(f"geometry file has {len(lines)} rows, config says {height}")
    interior = np.zeros((height, width), dtype=bool)
    for r, line in enumerate(lines):
        if len(line) != width:
            raise ValueError(f"geometry row {r} has {len(line)} columns, config says {width}")
        bad = set(line) - {".", "#"}
        if bad:
            raise ValueError(f"geometry row {r} contains invalid characters {sorted(bad)}")
        interior[r] = [c == "#" for c in line]
    return mask_from_interior(interior)


def sync_ghost_columns(lat: Lattice) -> Lattice:
    buf = lat.src
    buf[:, lat.width + 1] = buf[:, 1]
    buf[:, 0] = buf[:, lat.width]
    return lat


def init_bits(seed: int, width: int, height: int) -> np.ndarray:
    """Per-bit INIT words, shape ``(7, H, W + 2)``; bit ``k`` of node uses ``mix64(w + k)``."""
    base = node_random_grid(seed, RngPurpose.INIT, 0, np.arange(width + 2), np.arange(height))
    return np.stack([mix64_array(base + np.uint64(k)) for k in range(7)])


def init_lattice(cfg: "SimConfig", obstacle_mask: np.ndarray | None = None) -> Lattice:
    """Fill every fluid node's seven particle bits independently with ``cfg.fill_density``."""
    if not 0.0 <= cfg.fill_density <= 1.0:
        raise ValueError(f"fill_density must lie in [0, 1], got {cfg.fill_density!r}")
    lat = Lattice.empty(cfg.width, cfg.height, obstacle_mask)
    thr = threshold(cfg.fill_density)
    words = init_bits(cfg.seed, cfg.width, cfg.height)
    accepted = (words >> np.uint64(32)) < np.uint64(thr) if thr < (1 << 32) else np.ones(words.shape, bool)
    state = np.zeros((cfg.height, cfg.width + 2), dtype=np.uint8)
    for k in range(7):
        state |= accepted[k].astype(np.uint8) << k
    fluid = ~lat.obstacle_mask
    fluid[:, 0] = False
    fluid[:, -1] = False
    lat.src[fluid] = state[fluid]
    sync_ghost_columns(lat)
    return lat



def state_digest(lat: Lattice) -> int:
    """64-bit BLAKE2b digest of the interior nodes (all rows, columns 1..W), row-major."""
    data = np.ascontiguousarray(lat.src[:, 1 : lat.width + 1]).tobytes()
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")
