from __future__ import annotations

import enum
from dataclasses import dataclass


class Backend(str, enum.Enum):
    SCALAR = "scalar"
    LANES = "lanes"
    STRIPS = "strips"
    TILES = "tiles"


LANE_WIDTHS = (16, 32, 64)


@dataclass
class SimConfig:
    width: int = 256
    height: int = 66
    steps: int = 100
    fill_density: float = 0.3
    force_p: float = 0.0
    seed: int = 0
    backend: Backend = Backend.SCALAR
    threads: int = 1
    lanes: int = 32
    tile_x: int = 32
    tile_y: int = 8
    dump_every: int = 0
    out_prefix: str = "fhp"

    def __post_init__(self) -> None:
        self.backend = Backend(self.backend)
        self.validate()

    def validate(self) -> None:
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")
        if self.height < 3:
            raise ValueError(f"height must be >= 3, got {self.height}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if not 0.0 <= self.fill_density <= 1.0:
            raise ValueError(f"fill_density must lie in [0, 1], got {self.fill_density}")
        if not 0.0 <= self.force_p <= 1.0:
            raise ValueError(f"force_p must lie in [0, 1], got {self.force_p}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.lanes not in LANE_WIDTHS:
            raise ValueError(f"lanes must be one of {LANE_WIDTHS}, got {self.lanes}")
        if self.tile_x < 1 or self.tile_y < 1:
            raise ValueError(f"tile sizes must be >= 1, got {self.tile_x}x{self.tile_y}")
        if self.dump_every < 0:
            raise ValueError(f"dump_every must be >= 0, got {self.dump_every}")
