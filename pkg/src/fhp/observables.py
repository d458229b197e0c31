"""Mass, momentum and coarse-grained flow fields of a lattice.

All sums run over the interior columns ``1..W``.  Mass counts every row
(particles parked in a wall node for one step are still particles);
momentum, density and velocity fields count fluid nodes only.
"""

from __future__ import annotations

from dataclasses import dataclass
from os import PathLike

import numpy as np

from fhp.lattice import MOMENTUM, POPCOUNT, Lattice

_PX = np.zeros(256, dtype=np.int64)
_PY = np.zeros(256, dtype=np.int64)
for _s in range(256):
    for _k in range(6):
        if _s >> _k & 1:
            _PX[_s] += MOMENTUM[_k][0]
            _PY[_s] += MOMENTUM[_k][1]

SQRT3_2 = np.sqrt(3.0) / 2.0


def _fluid_interior(lat: Lattice) -> tuple[np.ndarray, np.ndarray]:
    w = lat.width
    return lat.src[:, 1 : w + 1], ~lat.obstacle_mask[:, 1 : w + 1]


def total_mass(lat: Lattice) -> int:
    return int(POPCOUNT[lat.src[:, 1 : lat.width + 1] & 0x7F].sum())


def total_momentum(lat: Lattice) -> tuple[int, int]:
    """Integer momentum ``(px, py)`` in units of c/2 and (sqrt(3)/2)c."""
    state, fluid = _fluid_interior(lat)
    s = state[fluid]
    return int(_PX[s].sum()), int(_PY[s].sum())


@dataclass
class FlowField:
    """Per-cell density (particles per fluid node) and mean particle velocity.

    ``x_phys``/``y_phys`` are the cell centroids in lattice units with odd
    rows shifted by +1/2 and y pointing north (row 0 is the top).
    """

    block: int
    rho: np.ndarray
    ux: np.ndarray
    uy: np.ndarray
    nodes: np.ndarray
    particles: np.ndarray
    x_phys: np.ndarray
    y_phys: np.ndarray


def _block_sum(a: np.ndarray, block: int) -> np.ndarray:
    h, w = a.shape
    ny, nx = -(-h // block), -(-w // block)
    padded = np.zeros((ny * block, nx * block), dtype=a.dtype)
    padded[:h, :w] = a
    return padded.reshape(ny, block, nx, block).sum(axis=(1, 3))


def coarse_grain(lat: Lattice, block: int) -> FlowField:
    if block < 1:
        raise ValueError(f"block size must be >= 1, got {block}")
    state, fluid = _fluid_interior(lat)
    s = np.where(fluid, state, 0)
    nodes = _block_sum(fluid.astype(np.int64), block)
    particles = _block_sum(POPCOUNT[s & 0x7F], block)
    px = _block_sum(_PX[s], block)
    py = _block_sum(_PY[s], block)
    denom = np.maximum(particles, 1)
    rows = np.arange(lat.height)[:, None]
    xs = np.arange(lat.width)[None, :] + 0.5 * (rows & 1)
    ys = np.broadcast_to(-rows.astype(float), xs.shape)
    nn = np.maximum(nodes, 1)
    return FlowField(
        block=block,
        rho=particles / nn,
        ux=px / 2.0 / denom,
        uy=py * SQRT3_2 / denom,
        nodes=nodes,
        particles=particles,
        x_phys=_block_sum(np.where(fluid, xs, 0.0), block) / nn,
        y_phys=_block_sum(np.where(fluid, ys, 0.0), block) / nn,
    )


def profile_sums(lat: Lattice) -> tuple[np.ndarray, np.ndarray]:
    """Per-row ``(sum of px/2, particle count)`` over fluid nodes of every row."""
    state, fluid = _fluid_interior(lat)
    s = np.where(fluid, state, 0)
    return _PX[s].sum(axis=1) / 2.0, POPCOUNT[s & 0x7F].sum(axis=1)


def velocity_profile(lat: Lattice) -> tuple[np.ndarray, np.ndarray]:
    """Mean particle x-velocity per interior row ``1..H-2`` and the particle count behind it."""
    ux_sum, count = profile_sums(lat)
    ux_sum, count = ux_sum[1:-1], count[1:-1]
    return ux_sum / np.maximum(count, 1), count


def write_field_csv(path: str | PathLike, field: FlowField) -> None:
    with open(path, "w") as fh:
        fh.write("# rho = particles per fluid node; ux, uy = mean particle velocity in lattice units per step\n")
        fh.write("cell_x,cell_y,rho,ux,uy\n")
        ny, nx = field.rho.shape
        for j in range(ny):
            for i in range(nx):
                fh.write(f"{i},{j},{field.rho[j, i]:.9g},{field.ux[j, i]:.9g},{field.uy[j, i]:.9g}\n")


def write_profile_csv(path: str | PathLike, mean_ux: np.ndarray, counts: np.ndarray, first_row: int = 1) -> None:
    with open(path, "w") as fh:
        fh.write("# mean_ux = sum(px)/2 / particle count per row (per-particle normalization); sample_count = particles\n")
        fh.write("row,mean_ux,sample_count\n")
        for i, (u, n) in enumerate(zip(mean_ux, counts)):
            fh.write(f"{first_row + i},{u:.9g},{int(n)}\n")


def density_image(field: FlowField) -> np.ndarray:
    return np.clip(np.rint(255.0 * field.rho / 7.0), 0, 255).astype(np.uint8)


def write_pgm(path: str | PathLike, image: np.ndarray) -> None:
    image = np.asarray(image, dtype=np.uint8)
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())
