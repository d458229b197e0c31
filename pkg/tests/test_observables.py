import numpy as np
import pytest

from fhp.config import SimConfig
from fhp.lattice import UNIT_VECTORS, Lattice, init_lattice
from fhp.observables import (
    coarse_grain,
    density_image,
    total_mass,
    total_momentum,
    velocity_profile,
    write_field_csv,
    write_pgm,
    write_profile_csv,
)


def filled(width, height, value):
    lat = Lattice.empty(width, height)
    lat.src[1:-1, :] = value
    return lat


def test_vacuum():
    lat = Lattice.empty(6, 5)
    assert total_mass(lat) == 0
    assert total_momentum(lat) == (0, 0)
    f = coarse_grain(lat, 2)
    assert not f.rho.any() and not f.ux.any() and not f.uy.any()
    mean, count = velocity_profile(lat)
    assert not mean.any() and not count.any()


def test_saturated_mass():
    assert total_mass(filled(4, 5, 0x7F)) == 84


def test_opposite_pair_has_no_momentum():
    lat = Lattice.empty(6, 5)
    lat.src[1, 2] = 0x04
    lat.src[3, 5] = 0x20
    assert total_momentum(lat) == (0, 0)


def test_single_ne_particle():
    lat = Lattice.empty(6, 5)
    lat.src[2, 3] = 0x02
    assert total_momentum(lat) == (1, 1)


def test_wall_particles_count_as_mass_not_momentum():
    lat = Lattice.empty(6, 5)
    lat.src[0, 3] |= 0x02
    assert total_mass(lat) == 1
    assert total_momentum(lat) == (0, 0)


def test_uniform_east_field():
    lat = filled(8, 10, 0x04)
    f = coarse_grain(lat, 4)
    assert np.allclose(f.rho[f.nodes > 0], 1.0)
    assert np.allclose(f.ux[f.nodes > 0], 1.0)
    assert np.allclose(f.uy, 0.0)
    mean, count = velocity_profile(lat)
    assert np.allclose(mean, 1.0) and np.all(count == 8)


def test_coarse_grain_matches_per_node_sum(rng):
    cfg = SimConfig(width=19, height=13, fill_density=0.4, seed=2)
    lat = init_lattice(cfg)
    block = 4
    f = coarse_grain(lat, block)
    for cy in range(f.rho.shape[0]):
        for cx in range(f.rho.shape[1]):
            n = p = 0
            vx = vy = 0.0
            for r in range(cy * block, min((cy + 1) * block, 13)):
                for x in range(cx * block + 1, min((cx + 1) * block, 19) + 1):
                    if lat.obstacle_mask[r, x]:
                        continue
                    n += 1
                    s = int(lat.src[r, x])
                    p += bin(s & 0x7F).count("1")
                    for k in range(6):
                        if s >> k & 1:
                            vx += UNIT_VECTORS[k][0]
                            vy += UNIT_VECTORS[k][1]
            assert f.nodes[cy, cx] == n and f.particles[cy, cx] == p
            if n:
                assert f.rho[cy, cx] * n == pytest.approx(p, abs=1e-12)
            assert f.ux[cy, cx] == pytest.approx(vx / max(p, 1), abs=1e-12)
            assert f.uy[cy, cx] == pytest.approx(vy / max(p, 1), abs=1e-12)


def test_coarse_grain_sums_match_totals():
    lat = init_lattice(SimConfig(width=37, height=21, fill_density=0.3, seed=12))
    f = coarse_grain(lat, 5)
    assert int(round((f.rho * f.nodes).sum())) == total_mass(lat)
    px, py = total_momentum(lat)
    assert (f.ux * f.particles).sum() == pytest.approx(px / 2.0, abs=1e-12)
    assert (f.uy * f.particles).sum() == pytest.approx(py * np.sqrt(3) / 2, abs=1e-12)


def test_coarse_grain_odd_row_shift():
    lat = Lattice.empty(4, 3, np.zeros((3, 6), dtype=bool))
    f = coarse_grain(lat, 1)
    assert f.x_phys[0, 0] == 0.0 and f.x_phys[1, 0] == 0.5


def test_coarse_grain_rejects_bad_block():
    with pytest.raises(ValueError):
        coarse_grain(Lattice.empty(4, 3), 0)


def test_csv_and_pgm_formats(tmp_path):
    lat = filled(8, 6, 0x7F)
    f = coarse_grain(lat, 2)
    write_field_csv(tmp_path / "f.csv", f)
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[1] == "cell_x,cell_y,rho,ux,uy"
    assert len(lines) == 2 + f.rho.size
    write_profile_csv(tmp_path / "p.csv", *velocity_profile(lat))
    plines = (tmp_path / "p.csv").read_text().splitlines()
    assert plines[1] == "row,mean_ux,sample_count"
    assert plines[2] == "1,0,56"
    img = density_image(f)
    write_pgm(tmp_path / "d.pgm", img)
    data = (tmp_path / "d.pgm").read_bytes()
    assert data.startswith(b"P5\n4 3\n255\n")
    assert data[len(b"P5\n4 3\n255\n"):] == img.tobytes()
    assert img[1, 0] == 255
