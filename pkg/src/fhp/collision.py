"""The 512-entry collision look-up table.

Index layout is ``(chirality << 8) | state``.  Fluid states follow the FHP
rules with a rest particle; obstacle states (bit 7 set) reverse every moving
particle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from fhp.lattice import MOVING_MASK, OBSTACLE_BIT, PARTICLE_MASK, REST_BIT, moving_momentum

MAGIC = b"FHPTAB01"
TABLE_SIZE = 512


class RuleVariant(enum.Enum):
    DEFAULT = "default"


class TableFormatError(ValueError):
    pass


class TableValidationError(ValueError):
    def __init__(self, report: "ValidationReport"):
        super().__init__(f"collision table failed validation: {report.summary()}")
        self.report = report


def _bits(*dirs: int) -> int:
    out = 0
    for d in dirs:
        out |= 1 << (d % 6)
    return out


def reverse6(moving: int) -> int:
    """Map moving bit ``i`` to bit ``(i + 3) % 6``."""
    return ((moving << 3) | (moving >> 3)) & MOVING_MASK


def _fluid_rules(chirality: int) -> dict[int, int]:
    rules = {}
    for i in range(6):
        if chirality:
            rules[_bits(i, i + 3)] = _bits(i + 1, i + 4)
        else:
            rules[_bits(i, i + 3)] = _bits(i + 2, i + 5)
        rules[_bits(i, i + 2, i + 4)] = _bits(i + 1, i + 3, i + 5)
        rules[_bits(i) | REST_BIT] = _bits(i + 5, i + 1)
        rules[_bits(i, i + 2)] = _bits(i + 1) | REST_BIT
    return rules


@dataclass(frozen=True)
class CollisionTable:
    entries: np.ndarray
    variant: RuleVariant | None = None

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.uint8)
        if entries.shape != (TABLE_SIZE,):
            raise TableFormatError(f"table must have {TABLE_SIZE} entries, got shape {entries.shape}")
        entries = entries.copy()
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CollisionTable):
            return NotImplemented
        return bool(np.array_equal(self.entries, other.entries))

    def __hash__(self) -> int:
        return hash(self.entries.tobytes())

    def __getitem__(self, index: int) -> int:
        return int(self.entries[index])


def build_table(variant: RuleVariant = RuleVariant.DEFAULT) -> CollisionTable:
    if variant is not RuleVariant.DEFAULT:
        raise ValueError(f"unknown rule variant {variant!r}")
    entries = np.zeros(TABLE_SIZE, dtype=np.uint8)
    for chirality in (0, 1):
        rules = _fluid_rules(chirality)
        for s in range(256):
            if s & OBSTACLE_BIT:
                out = (s & 0xC0) | reverse6(s & MOVING_MASK)
            else:
                out = rules.get(s, s)
            entries[(chirality << 8) | s] = out
    return CollisionTable(entries, variant)


def collide_node(table: CollisionTable, state: int, chirality: int) -> int:
    return int(table.entries[((chirality & 1) << 8) | (state & 0xFF)])


@dataclass
class ValidationReport:
    """Per-entry conservation failures of a collision table.

    ``mass`` and ``momentum`` map table index to the delta (out minus in);
    ``bounce_back`` lists obstacle indices whose entry is not the reversal.
    """

    mass: dict[int, int] = field(default_factory=dict)
    momentum: dict[int, tuple[int, int]] = field(default_factory=dict)
    bounce_back: list[int] = field(default_factory=list)
    obstacle_changed: list[int] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return len(self.mass) + len(self.momentum) + len(self.bounce_back) + len(self.obstacle_changed)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def summary(self) -> str:
        return (
            f"{len(self.mass)} mass, {len(self.momentum)} momentum, "
            f"{len(self.bounce_back)} bounce-back, {len(self.obstacle_changed)} obstacle-bit violations"
        )


def validate_table(table: CollisionTable) -> ValidationReport:
    report = ValidationReport()
    for index in range(TABLE_SIZE):
        s = index & 0xFF
        out = int(table.entries[index])
        if (out ^ s) & OBSTACLE_BIT:
            report.obstacle_changed.append(index)
        if s & OBSTACLE_BIT:
            expected = (s & 0xC0) | reverse6(s & MOVING_MASK)
            if out != expected:
                report.bounce_back.append(index)
            continue
        dm = bin(out & PARTICLE_MASK).count("1") - bin(s & PARTICLE_MASK).count("1")
        if dm:
            report.mass[index] = dm
        p_in = moving_momentum(s)
        p_out = moving_momentum(out)
        dp = (p_out[0] - p_in[0], p_out[1] - p_in[1])
        if dp != (0, 0):
            report.momentum[index] = dp
    return report


def save_table(table: CollisionTable) -> bytes:
    return MAGIC + table.entries.tobytes()


def load_table(data: bytes, force: bool = False) -> CollisionTable:
    """Parse a table file.  Invalid tables are refused unless ``force`` is set."""
    if len(data) != len(MAGIC) + TABLE_SIZE:
        raise TableFormatError(f"table file must be {len(MAGIC) + TABLE_SIZE} bytes, got {len(data)}")
    if data[: len(MAGIC)] != MAGIC:
        raise TableFormatError(f"bad magic {data[:len(MAGIC)]!r}, expected {MAGIC!r}")
    table = CollisionTable(np.frombuffer(data, dtype=np.uint8, offset=len(MAGIC)))
    report = validate_table(table)
    if not report.ok and not force:
        raise TableValidationError(report)
    return table
