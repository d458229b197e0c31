import json

import pytest

from fhp.cli import main, parse_args
from fhp.collision import MAGIC, build_table, save_table
from fhp.config import Backend


def test_parse_run_defaults():
    inv = parse_args(["run", "--width", "64", "--height", "32", "--steps", "100", "--seed", "1"])
    cfg = inv.config
    assert inv.command == "run"
    assert (cfg.width, cfg.height, cfg.steps, cfg.seed) == (64, 32, 100, 1)
    assert cfg.backend is Backend.SCALAR and cfg.dump_every == 0


def test_parse_bench_lanes():
    inv = parse_args(["bench", "--backend", "lanes", "--lanes", "32"])
    assert inv.command == "bench" and inv.backends == [Backend.LANES] and inv.config.lanes == 32


@pytest.mark.parametrize(
    "argv, flag",
    [
        (["run", "--force-p", "1.5"], "--force-p"),
        (["run", "--density", "-0.1"], "--density"),
        (["run", "--height", "2"], "--height"),
        (["run", "--width", "0"], "--width"),
        (["run", "--lanes", "24"], "--lanes"),
        (["run", "--backend", "gpu"], "--backend"),
        (["run", "--bogus"], "--bogus"),
        (["bench", "--steps", "0"], "--steps"),
        (["run", "--backend", "strips", "--threads", "9", "--height", "10"], "--threads"),
    ],
)
def test_usage_errors(argv, flag, capsys):
    assert main(argv) == 2
    assert flag in capsys.readouterr().err


def test_tablegen_then_validate(tmp_path):
    out = tmp_path / "table.bin"
    assert main(["tablegen", str(out)]) == 0
    assert out.read_bytes() == save_table(build_table())
    assert main(["validate", str(out)]) == 0


def test_validate_truncated(tmp_path, capsys):
    out = tmp_path / "short.bin"
    out.write_bytes(save_table(build_table())[:300])
    assert main(["validate", str(out)]) in (1, 3)
    assert "bytes" in capsys.readouterr().err


def test_validate_invalid_table(tmp_path):
    entries = bytearray(build_table().entries.tobytes())
    entries[1] = 0
    out = tmp_path / "bad.bin"
    out.write_bytes(MAGIC + bytes(entries))
    assert main(["validate", str(out)]) == 1


def test_validate_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "nope.bin")]) == 3


def test_run_final_only_dump(tmp_path, capsys):
    prefix = tmp_path / "out"
    argv = ["run", "--width", "32", "--height", "18", "--steps", "20", "--seed", "3", "--dump-every", "0", "--out-prefix", str(prefix)]
    assert main(argv) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["out_000020.pgm", "out_000020_field.csv", "out_000020_profile.csv", "out_summary.json"]
    summary = json.loads(capsys.readouterr().out)
    assert summary["steps"] == 20 and summary["backend"] == "scalar"


def test_run_periodic_dumps(tmp_path):
    prefix = tmp_path / "out"
    argv = ["run", "--width", "16", "--height", "10", "--steps", "10", "--dump-every", "4", "--out-prefix", str(prefix)]
    assert main(argv) == 0
    steps = sorted(p.name[4:10] for p in tmp_path.glob("out_*.pgm"))
    assert steps == ["000000", "000004", "000008", "000010"]


def test_run_outputs_are_byte_identical(tmp_path):
    outputs = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        d.mkdir()
        argv = ["run", "--width", "40", "--height", "20", "--steps", "30", "--force-p", "0.1", "--seed", "9",
                "--dump-every", "10", "--out-prefix", str(d / "o")]
        assert main(argv) == 0
        outputs.append({p.name: p.read_bytes() for p in d.iterdir()})
    assert outputs[0] == outputs[1]


def test_run_backends_agree(tmp_path, capsys):
    digests = set()
    for backend in ("scalar", "lanes", "strips", "tiles"):
        argv = ["run", "--width", "40", "--height", "20", "--steps", "30", "--force-p", "0.1", "--seed", "9",
                "--backend", backend, "--threads", "3", "--tile-x", "6", "--tile-y", "4",
                "--out-prefix", str(tmp_path / backend)]
        assert main(argv) == 0
        digests.add(json.loads(capsys.readouterr().out)["state_digest"])
    assert len(digests) == 1


def test_run_with_geometry_and_table(tmp_path):
    geo = tmp_path / "g.txt"
    geo.write_text("\n".join(["#" * 8] + ["........"] * 2 + ["...##..."] + ["........"] * 2 + ["#" * 8]) + "\n")
    tab = tmp_path / "t.bin"
    tab.write_bytes(save_table(build_table()))
    argv = ["run", "--width", "8", "--height", "7", "--steps", "5", "--geometry-file", str(geo),
            "--table-file", str(tab), "--out-prefix", str(tmp_path / "o")]
    assert main(argv) == 0


def test_run_bad_geometry(tmp_path):
    geo = tmp_path / "g.txt"
    geo.write_text("....\n")
    argv = ["run", "--width", "8", "--height", "7", "--steps", "1", "--geometry-file", str(geo), "--out-prefix", str(tmp_path / "o")]
    assert main(argv) == 1


def test_run_missing_geometry(tmp_path):
    argv = ["run", "--width", "8", "--height", "7", "--geometry-file", str(tmp_path / "missing.txt"), "--out-prefix", str(tmp_path / "o")]
    assert main(argv) == 3


def test_bench_json_lines(tmp_path, capsys):
    out = tmp_path / "bench.jsonl"
    argv = ["bench", "--width", "32", "--height", "16", "--steps", "5", "--repeats", "2", "--warmup", "1", "--out", str(out)]
    assert main(argv) == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(records) == 4 * 3
    assert {r["backend"] for r in records} == {"scalar", "lanes", "strips", "tiles"}
    assert len({r["state_digest"] for r in records}) == 1
    assert "Mups" in capsys.readouterr().out


def test_bench_stdout(capsys):
    assert main(["bench", "--backend", "lanes", "--lanes", "16", "--width", "32", "--height", "8", "--steps", "3", "--repeats", "1", "--no-table"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and json.loads(lines[-1])["repeat"] == "median"
