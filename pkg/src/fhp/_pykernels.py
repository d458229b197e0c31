"""Pure-Python (numpy) kernels, used when the compiled core is unavailable.

Signatures and results match :mod:`fhp._core` byte for byte.
"""

from __future__ import annotations

import numpy as np

from fhp.lattice import REST_BIT, offset, opposite
from fhp.rng import RngPurpose, THRESHOLD_ONE, mix64, node_random_grid

IMPLEMENTATION = "python"


def mix64_c(z: int) -> int:
    return mix64(z)


def node_random_c(seed: int, purpose: int, step: int, x: int, y: int) -> int:
    from fhp.rng import node_random

    return node_random(seed, purpose, step, x, y)


def _rows_of_parity(r0: int, r1: int, q: int) -> np.ndarray:
    return np.arange(r0 + ((q - r0) % 2), r1, 2)


def motion_pull(src, dst, geom, r0, r1):
    height, width = src.shape[0], src.shape[1] - 2
    for q in (0, 1):
        rows = _rows_of_parity(r0, r1, q)
        if rows.size == 0:
            continue
        out = (src[rows, 1 : width + 1] & REST_BIT) | geom[rows, 1 : width + 1]
        for k in range(6):
            dx, dr = offset(opposite(k), q)
            srows = rows + dr
            ok = (srows >= 0) & (srows < height)
            out[ok] |= src[srows[ok], 1 + dx : width + 1 + dx] & (1 << k)
        dst[rows, 1 : width + 1] = out


def _push(block, out, row0, cols):
    """OR the moving bits of ``block`` into ``out`` one hop away.

    ``out`` has a one-node margin on every side relative to ``block``;
    ``cols`` restricts which block columns are pushed.
    """
    c0, c1 = cols
    for q in (0, 1):
        js = _rows_of_parity(row0, row0 + block.shape[0], q) - row0
        if js.size == 0:
            continue
        v = block[js, c0:c1]
        for k in range(6):
            dx, dr = offset(k, q)
            out[js + 1 + dr, c0 + 1 + dx : c1 + 1 + dx] |= v & (1 << k)


def motion_lanes(src, dst, geom, lanes):
    height, width = src.shape[0], src.shape[1] - 2
    dst[:, 1 : width + 1] = (src[:, 1 : width + 1] & REST_BIT) | geom[:, 1 : width + 1]
    # Scatter target with one spare row above and below; the spare rows catch
    # particles leaving the grid vertically and are dropped.
    scatter = np.zeros((height + 2, width + 4), dtype=np.uint8)
    chunks = 0
    c = 1
    while c + lanes - 1 <= width:
        _push(src, scatter, 0, (c, c + lanes))
        chunks += height
        c += lanes
    for x in range(c, width + 1):
        _push(src, scatter, 0, (x, x + 1))
    moved = scatter[1:-1, 1:-1]
    moved[:, 1] |= moved[:, width + 1]
    moved[:, width] |= moved[:, 0]
    dst[:, 1 : width + 1] |= moved[:, 1 : width + 1] & 0x3F
    dst[:, 0] = 0
    dst[:, width + 1] = 0
    return chunks


def motion_tiles(src, dst, geom, tiles):
    """Tiles with equal shape and row parity are gathered into one batch."""
    tiles = np.asarray(tiles, dtype=np.int64).reshape(-1, 4)
    if not len(tiles):
        return
    # One zero row above and below, so halo rows outside the grid read as empty.
    padded = np.zeros((src.shape[0] + 2, src.shape[1]), dtype=np.uint8)
    padded[1:-1] = src
    x0, x1, y0, y1 = tiles.T
    keys = np.stack([x1 - x0, y1 - y0, (y0 - 1) & 1], axis=1)
    for key in np.unique(keys, axis=0):
        sel = np.all(keys == key, axis=1)
        bw, bh, q0 = (int(v) for v in key)
        aw, ah = bw + 2, bh + 2
        rows = y0[sel][:, None] + np.arange(ah)  # padded coordinates of region A
        cols = x0[sel][:, None] - 1 + np.arange(aw)
        a = padded[rows[:, :, None], cols[:, None, :]]
        c = np.zeros((len(a), ah + 2, aw + 2), dtype=np.uint8)
        for q in (0, 1):
            js = np.arange((q - q0) % 2, ah, 2)
            for k in range(6):
                dx, dr = offset(k, q)
                c[:, js + 1 + dr, 1 + dx : 1 + dx + aw] |= a[:, js] & (1 << k)
        grow = rows[:, 1:-1, None] - 1
        gcol = cols[:, None, 1:-1]
        dst[grow, gcol] = (c[:, 2:-2, 2:-2] & 0x3F) | (a[:, 1:-1, 1:-1] & REST_BIT) | geom[grow, gcol]


def collide(buf, table, seed, step, thr, x0, x1, y0, y1):
    if x1 <= x0 or y1 <= y0:
        return
    xs, ys = np.arange(x0, x1), np.arange(y0, y1)
    sub = buf[y0:y1, x0:x1]
    chir = node_random_grid(seed, RngPurpose.CHIRALITY, step, xs, ys) & np.uint64(1)
    out = np.asarray(table)[(chir.astype(np.intp) << 8) | sub]
    if thr:
        eligible = (out & 0xA4) == 0x20
        if thr >= THRESHOLD_ONE:
            accepted = eligible
        else:
            words = node_random_grid(seed, RngPurpose.FORCING, step, xs, ys)
            accepted = eligible & ((words >> np.uint64(32)) < np.uint64(thr))
        out[accepted] = (out[accepted] & 0xDF) | 0x04
    sub[...] = out



def collide_tiles(buf, table, seed, step, thr, tiles):
    """:func:`collide` over the union of ``tiles``, done as one masked pass over the bounding box."""
    tiles = np.asarray(tiles, dtype=np.int64).reshape(-1, 4)
    if not len(tiles):
        return
    bx0, by0 = int(tiles[:, 0].min()), int(tiles[:, 2].min())
    bx1, by1 = int(tiles[:, 1].max()), int(tiles[:, 3].max())
    covered = np.zeros(buf.shape, dtype=bool)
    for x0, x1, y0, y1 in tiles:
        covered[y0:y1, x0:x1] = True
    collided = buf.copy()
    collide(collided, table, seed, step, thr, bx0, bx1, by0, by1)
    buf[covered] = collided[covered]
