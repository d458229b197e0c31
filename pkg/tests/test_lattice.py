import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fhp.config import SimConfig
from fhp.lattice import (
    MOMENTUM,
    E,
    Lattice,
    NE,
    NW,
    W,
    init_lattice,
    load_geometry,
    neighbor_of,
    opposite,
    state_digest,
    sync_ghost_columns,
)
from fhp.rng import RngPurpose, bernoulli, mix64, node_random

from oracle import physical_neighbor


@pytest.mark.parametrize("d, expected", [(E, W), (NW, 3), (W, E)])
def test_opposite_examples(d, expected):
    assert opposite(d) == expected


def test_opposite_is_an_involution():
    assert [opposite(opposite(d)) for d in range(6)] == list(range(6))


@pytest.mark.parametrize(
    "x, r, d, expected",
    [
        (5, 2, E, (6, 2)),
        (5, 2, NE, (5, 1)),
        (5, 3, NE, (6, 2)),
    ],
)
def test_neighbor_examples(x, r, d, expected):
    assert neighbor_of(x, r, d) == expected


def test_neighbor_round_trip_exhaustive():
    width, height = 9, 8
    for x, r, d in itertools.product(range(width + 2), range(height), range(6)):
        nx, nr = neighbor_of(x, r, d)
        if 0 <= nr < height and 0 <= nx < width + 2:
            assert neighbor_of(nx, nr, opposite(d)) == (x, r)


def test_neighbor_matches_physical_geometry():
    width, height = 7, 6
    for x, r, d in itertools.product(range(1, width + 1), range(height), range(6)):
        expected = physical_neighbor(x, r, d, width, height)
        got = neighbor_of(x, r, d)
        if expected is None:
            assert not 0 <= got[1] < height
        else:
            assert got == expected


def test_velocity_closure():
    assert tuple(map(sum, zip(*MOMENTUM))) == (0, 0)
    for i in range(6):
        a, b = MOMENTUM[(i - 1) % 6], MOMENTUM[(i + 1) % 6]
        assert (a[0] + b[0], a[1] + b[1]) == MOMENTUM[i]
        assert tuple(-c for c in MOMENTUM[opposite(i)]) == MOMENTUM[i]


def test_init_empty_lattice():
    lat = init_lattice(SimConfig(width=8, height=6, fill_density=0.0))
    assert np.all(lat.src[1:-1, 1:-1] == 0)
    assert np.all(lat.src[[0, -1], :] == 0x80)


def test_init_saturated_lattice():
    lat = init_lattice(SimConfig(width=8, height=6, fill_density=1.0))
    assert np.all(lat.src[1:-1, :] == 0x7F)
    assert np.all(lat.src[[0, -1], :] == 0x80)


def test_init_mass_matches_rng_oracle():
    cfg = SimConfig(width=16, height=16, fill_density=0.3, seed=42)
    lat = init_lattice(cfg)
    expected = 0
    for r in range(1, 15):
        for x in range(1, 17):
            base = node_random(42, RngPurpose.INIT, 0, x, r)
            for k in range(7):
                word = mix64((base + k) % 2**64)
                bit = bernoulli(word, 0.3)
                expected += bit
                assert bool(lat.src[r, x] >> k & 1) == bit
    assert int(np.unpackbits(lat.src[1:-1, 1:-1] & 0x7F).sum()) == expected


def test_init_rejects_bad_density():
    cfg = SimConfig(width=4, height=4)
    cfg.fill_density = 1.2
    with pytest.raises(ValueError):
        init_lattice(cfg)
    with pytest.raises(ValueError):
        SimConfig(fill_density=-0.5)


def test_init_leaves_obstacles_empty(tmp_path):
    geo = tmp_path / "g.txt"
    geo.write_text("######\n......\n..##..\n......\n######\n")
    mask = load_geometry(geo, 6, 5)
    lat = init_lattice(SimConfig(width=6, height=5, fill_density=1.0), mask)
    assert lat.src[2, 3] == 0x80 and lat.src[2, 4] == 0x80
    assert lat.src[2, 2] == 0x7F


def test_sync_ghost_columns_copies_edges():
    lat = Lattice.empty(4, 3)
    lat.src[:, 1] = [1, 2, 3]
    lat.src[:, 4] = [7, 8, 9]
    sync_ghost_columns(lat)
    assert list(lat.src[:, 5]) == [1, 2, 3]
    assert list(lat.src[:, 0]) == [7, 8, 9]


def test_sync_ghost_columns_leaves_zero_lattice_alone():
    lat = Lattice.empty(4, 3, np.zeros((3, 6), dtype=bool))
    sync_ghost_columns(lat)
    assert not lat.src.any()


@given(st.integers(1, 12), st.integers(3, 10), st.integers(0, 2**32 - 1))
def test_sync_ghost_columns_idempotent(width, height, seed):
    lat = Lattice.empty(width, height)
    lat.src[:] = np.random.default_rng(seed).integers(0, 256, lat.src.shape, dtype=np.uint8)
    once = sync_ghost_columns(lat).src.copy()
    twice = sync_ghost_columns(lat).src
    assert np.array_equal(once, twice)
    assert np.array_equal(twice[:, 0], twice[:, width])
    assert np.array_equal(twice[:, width + 1], twice[:, 1])


def test_lattice_validation():
    with pytest.raises(ValueError):
        Lattice.empty(0, 5)
    with pytest.raises(ValueError):
        Lattice.empty(4, 2)


def test_geometry_file_errors(tmp_path):
    geo = tmp_path / "g.txt"
    geo.write_text("....\n....\n")
    with pytest.raises(ValueError, match="rows"):
        load_geometry(geo, 4, 3)
    geo.write_text("....\n...\n....\n")
    with pytest.raises(ValueError, match="columns"):
        load_geometry(geo, 4, 3)
    geo.write_text("....\n.x..\n....\n")
    with pytest.raises(ValueError, match="invalid"):
        load_geometry(geo, 4, 3)


def test_geometry_forces_wall_rows_and_mirrors_ghosts(tmp_path):
    geo = tmp_path / "g.txt"
    geo.write_text("....\n#...\n....\n")
    mask = load_geometry(geo, 4, 3)
    assert mask[0].all() and mask[2].all()
    assert mask[1, 1] and mask[1, 5] and not mask[1, 0]


def test_digest_ignores_ghost_columns():
    lat = init_lattice(SimConfig(width=8, height=6, seed=3))
    d = state_digest(lat)
    lat.src[:, 0] ^= 0x01
    assert state_digest(lat) == d
    lat.src[2, 3] ^= 0x01
    assert state_digest(lat) != d
