# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled FHP kernels.  Same signatures as :mod:`fhp._pykernels`.

All loops run without the GIL so the strip and tile backends get real
parallelism from ordinary Python threads.
"""

from libc.stdint cimport uint8_t, uint64_t, int64_t
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset

from fhp.rng import stream_base

IMPLEMENTATION = "cython"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL

# (dx, dr) per direction for even (q=0) and odd (q=1) rows; NW NE E SE SW W.
cdef int DX[2][6]
cdef int DR[6]
DX[0][:] = [-1, 0, 1, 0, -1, -1]
DX[1][:] = [0, 1, 1, 1, 0, -1]
DR[:] = [-1, -1, 0, 1, 1, 0]


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z += GOLDEN
    z ^= z >> 30
    z *= 0xBF58476D1CE4E5B9ULL
    z ^= z >> 27
    z *= 0x94D049BB133111EBULL
    z ^= z >> 31
    return z


def mix64_c(uint64_t z):
    return mix64(z)


def node_random_c(uint64_t seed, uint64_t purpose, uint64_t step, uint64_t x, uint64_t y):
    return mix64(mix64(mix64(mix64(seed + GOLDEN * purpose) + step) + x) + y)


def motion_pull(uint8_t[:, ::1] src, uint8_t[:, ::1] dst, const uint8_t[:, ::1] geom,
                Py_ssize_t r0, Py_ssize_t r1):
    """Gather motion for rows ``[r0, r1)``, interior columns only."""
    cdef Py_ssize_t H = src.shape[0], W = src.shape[1] - 2
    cdef Py_ssize_t r, x, q
    cdef uint8_t *up
    cdef uint8_t *mid
    cdef uint8_t *down
    cdef uint8_t *out
    cdef const uint8_t *g
    cdef uint8_t v
    with nogil:
        for r in range(r0, r1):
            q = r & 1
            mid = &src[r, 0]
            up = &src[r - 1, 0] if r > 0 else NULL
            down = &src[r + 1, 0] if r < H - 1 else NULL
            out = &dst[r, 0]
            g = &geom[r, 0]
            for x in range(1, W + 1):
                v = (mid[x] & 0x40) | g[x]
                v |= mid[x - 1] & 0x04          # E from W neighbor
                v |= mid[x + 1] & 0x20          # W from E neighbor
                if down != NULL:
                    v |= down[x + q] & 0x01     # NW from SE neighbor
                    v |= down[x - 1 + q] & 0x02 # NE from SW neighbor
                if up != NULL:
                    v |= up[x - 1 + q] & 0x08   # SE from NW neighbor
                    v |= up[x + q] & 0x10       # SW from NE neighbor
                out[x] = v


def motion_lanes(uint8_t[:, ::1] src, uint8_t[:, ::1] dst, const uint8_t[:, ::1] geom, int lanes):
    """Scatter motion on ``lanes``-node wide words; returns the number of wide words processed."""
    cdef Py_ssize_t H = src.shape[0], W = src.shape[1] - 2
    cdef Py_ssize_t r, x, c, col, rr, w, nwords = lanes // 8
    cdef int k, q, dx, dr
    cdef uint64_t v, m, t
    cdef uint64_t bcast[6]
    cdef uint8_t b
    cdef long chunks = 0
    for k in range(6):
        bcast[k] = 0x0101010101010101ULL << k
    with nogil:
        for r in range(H):
            for x in range(1, W + 1):
                dst[r, x] = (src[r, x] & 0x40) | geom[r, x]
            dst[r, 0] = 0
            dst[r, W + 1] = 0
        for r in range(H):
            q = r & 1
            c = 1
            while c + lanes - 1 <= W:
                for w in range(nwords):
                    col = c + 8 * w
                    memcpy(&v, &src[r, col], 8)
                    for k in range(6):
                        m = v & bcast[k]
                        if m == 0:
                            continue
                        rr = r + DR[k]
                        if rr < 0 or rr >= H:
                            continue
                        dx = DX[q][k]
                        memcpy(&t, &dst[rr, col + dx], 8)
                        t |= m
                        memcpy(&dst[rr, col + dx], &t, 8)
                chunks += 1
                c += lanes
            for x in range(c, W + 1):
                b = src[r, x]
                for k in range(6):
                    if b & (1 << k):
                        rr = r + DR[k]
                        if 0 <= rr < H:
                            dst[rr, x + DX[q][k]] |= 1 << k
        for r in range(H):
            dst[r, 1] |= dst[r, W + 1] & 0x3F
            dst[r, W] |= dst[r, 0] & 0x3F
            dst[r, 0] = 0
            dst[r, W + 1] = 0
    return chunks


def motion_tiles(uint8_t[:, ::1] src, uint8_t[:, ::1] dst, const uint8_t[:, ::1] geom,
                 const int64_t[:, ::1] tiles):
    """Per-tile motion through private scratch.

    Each row of ``tiles`` is a write region ``(x0, x1, y0, y1)``, half-open.
    The read region is the write region grown by one node; particles pushed
    out of it land in a further one-node margin of the scratch and are
    discarded.
    """
    cdef Py_ssize_t H = src.shape[0]
    cdef Py_ssize_t n = tiles.shape[0], t, i, j, gy, ax0, ay0, aw, ah, cw, ch, cap = 0
    cdef Py_ssize_t x0, x1, y0, y1, ci, cj
    cdef Py_ssize_t off[6]
    cdef int k, q
    cdef uint8_t v
    cdef uint8_t *a_buf
    cdef uint8_t *c_buf
    for t in range(n):
        i = (tiles[t, 1] - tiles[t, 0] + 4) * (tiles[t, 3] - tiles[t, 2] + 4)
        if i > cap:
            cap = i
    a_buf = <uint8_t *> malloc(cap)
    c_buf = <uint8_t *> malloc(cap)
    if a_buf == NULL or c_buf == NULL:
        free(a_buf)
        free(c_buf)
        raise MemoryError()
    with nogil:
        for t in range(n):
            x0 = tiles[t, 0]; x1 = tiles[t, 1]; y0 = tiles[t, 2]; y1 = tiles[t, 3]
            ax0 = x0 - 1
            ay0 = y0 - 1
            aw = x1 - x0 + 2
            ah = y1 - y0 + 2
            cw = aw + 2
            ch = ah + 2
            for j in range(ah):
                gy = ay0 + j
                if 0 <= gy < H:
                    memcpy(&a_buf[j * aw], &src[gy, ax0], aw)
                else:
                    memset(&a_buf[j * aw], 0, aw)
            memset(c_buf, 0, cw * ch)
            for j in range(ah):
                q = (ay0 + j) & 1
                for k in range(6):
                    off[k] = (j + 1 + DR[k]) * cw + 1 + DX[q][k]
                for i in range(aw):
                    v = a_buf[j * aw + i]
                    if v & 0x3F == 0:
                        continue
                    c_buf[off[0] + i] |= v & 0x01
                    c_buf[off[1] + i] |= v & 0x02
                    c_buf[off[2] + i] |= v & 0x04
                    c_buf[off[3] + i] |= v & 0x08
                    c_buf[off[4] + i] |= v & 0x10
                    c_buf[off[5] + i] |= v & 0x20
            for j in range(1, ah - 1):
                gy = ay0 + j
                cj = j + 1
                for i in range(1, aw - 1):
                    ci = i + 1
                    dst[gy, ax0 + i] = (c_buf[cj * cw + ci] & 0x3F) | (a_buf[j * aw + i] & 0x40) | geom[gy, ax0 + i]
    free(a_buf)
    free(c_buf)


cdef int _collide_rect(uint8_t[:, ::1] buf, const uint8_t[::1] table, uint64_t chir_base,
                       uint64_t force_base, uint64_t thr, Py_ssize_t x0, Py_ssize_t x1,
                       Py_ssize_t y0, Py_ssize_t y1) noexcept nogil:
    cdef Py_ssize_t nx = x1 - x0, x, r
    cdef uint64_t *hc
    cdef uint64_t *hf
    cdef uint8_t s
    if nx <= 0 or y1 <= y0:
        return 0
    hc = <uint64_t *> malloc(2 * nx * sizeof(uint64_t))
    if hc == NULL:
        return -1
    hf = hc + nx
    for x in range(nx):
        hc[x] = mix64(chir_base + <uint64_t> (x0 + x))
        hf[x] = mix64(force_base + <uint64_t> (x0 + x))
    for r in range(y0, y1):
        for x in range(nx):
            s = buf[r, x0 + x]
            s = table[((mix64(hc[x] + <uint64_t> r) & 1) << 8) | s]
            if thr != 0 and (s & 0xA4) == 0x20:
                if (mix64(hf[x] + <uint64_t> r) >> 32) < thr:
                    s = (s & 0xDF) | 0x04
            buf[r, x0 + x] = s
    free(hc)
    return 0


def collide(uint8_t[:, ::1] buf, const uint8_t[::1] table, uint64_t seed, uint64_t step,
            uint64_t thr, Py_ssize_t x0, Py_ssize_t x1, Py_ssize_t y0, Py_ssize_t y1):
    """Table collision plus horizontal forcing over columns ``[x0, x1)`` and rows ``[y0, y1)``."""
    cdef uint64_t chir_base = stream_base(seed, 2, step)
    cdef uint64_t force_base = stream_base(seed, 1, step)
    cdef int rc
    with nogil:
        rc = _collide_rect(buf, table, chir_base, force_base, thr, x0, x1, y0, y1)
    if rc:
        raise MemoryError()


def collide_tiles(uint8_t[:, ::1] buf, const uint8_t[::1] table, uint64_t seed, uint64_t step,
                  uint64_t thr, const int64_t[:, ::1] tiles):
    """:func:`collide` over every ``(x0, x1, y0, y1)`` region in ``tiles``."""
    cdef uint64_t chir_base = stream_base(seed, 2, step)
    cdef uint64_t force_base = stream_base(seed, 1, step)
    cdef Py_ssize_t t
    cdef int rc = 0
    with nogil:
        for t in range(tiles.shape[0]):
            rc = _collide_rect(buf, table, chir_base, force_base, thr,
                               tiles[t, 0], tiles[t, 1], tiles[t, 2], tiles[t, 3])
            if rc:
                break
    if rc:
        raise MemoryError()
