"""Command-line entry point: ``fhp {run,bench,tablegen,validate}``.

Exit status: 0 success, 1 validation failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from fhp import kernels
from fhp.backends import PlanError, make_stepper
from fhp.bench import DEFAULT_WARMUP, format_table, run_bench
from fhp.collision import (
    CollisionTable,
    TableFormatError,
    TableValidationError,
    build_table,
    load_table,
    save_table,
    validate_table,
)
from fhp.config import LANE_WIDTHS, Backend, SimConfig
from fhp.engine import sample_steps
from fhp.lattice import init_lattice, load_geometry, state_digest
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

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonnegative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"must be a 64-bit unsigned integer, got {value}")
    return value


def _height(text: str) -> int:
    value = int(text)
    if value < 3:
        raise argparse.ArgumentTypeError(f"must be >= 3 (two wall rows plus fluid), got {value}")
    return value


def _backends(text: str) -> list[Backend]:
    if text == "all":
        return list(Backend)
    try:
        return [Backend(name) for name in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected one of {', '.join(b.value for b in Backend)} (comma-separated) or 'all', got {text!r}"
        ) from None


def _sim_flags(p: argparse.ArgumentParser, bench: bool) -> None:
    d = SimConfig()
    p.add_argument("--width", type=_positive, default=d.width, help="interior columns W (default %(default)s)")
    p.add_argument("--height", type=_height, default=d.height, help="rows H including both wall rows (default %(default)s)")
    p.add_argument("--steps", type=_positive if bench else _nonnegative, default=d.steps, help="time steps (default %(default)s)")
    if bench:
        p.add_argument("--backend", type=_backends, default=list(Backend), help="backend, comma list, or 'all' (default all)")
    else:
        p.add_argument("--backend", choices=[b.value for b in Backend], default=d.backend.value, help="(default %(default)s)")
    p.add_argument("--threads", type=_positive, default=d.threads, help="strip/tile worker count (default %(default)s)")
    p.add_argument("--lanes", type=int, choices=LANE_WIDTHS, default=d.lanes, help="nodes per wide word (default %(default)s)")
    p.add_argument("--tile-x", type=_positive, default=d.tile_x, help="tile write-region width (default %(default)s)")
    p.add_argument("--tile-y", type=_positive, default=d.tile_y, help="tile write-region height (default %(default)s)")
    p.add_argument("--force-p", type=_probability, default=d.force_p, help="forcing swap probability (default %(default)s)")
    p.add_argument("--density", type=_probability, default=d.fill_density, help="initial per-bit fill probability (default %(default)s)")
    p.add_argument("--seed", type=_seed, default=d.seed, help="64-bit seed (default %(default)s)")
    p.add_argument("--geometry-file", type=Path, help="ASCII obstacle map, '.' fluid and '#' obstacle")
    p.add_argument("--table-file", type=Path, help="custom collision table (FHPTAB01 format)")
    if bench:
        p.add_argument("--repeats", type=_positive, default=3, help="timed repeats (default %(default)s)")
        p.add_argument("--warmup", type=_nonnegative, default=DEFAULT_WARMUP, help="untimed warmup steps (default %(default)s)")
        p.add_argument("--out", type=Path, help="write JSON lines here instead of stdout")
        p.add_argument("--no-table", action="store_true", help="skip the aligned summary table")
    else:
        p.add_argument("--dump-every", type=_nonnegative, default=d.dump_every, help="dump interval; 0 = final state only (default %(default)s)")
        p.add_argument("--out-prefix", default=d.out_prefix, help="prefix for CSV/PGM dumps (default %(default)s)")
        p.add_argument("--block", type=_positive, default=8, help="coarse-graining cell size in nodes (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fhp", description="FHP lattice-gas simulator and benchmark")
    sub = parser.add_subparsers(dest="command", required=True)
    _sim_flags(sub.add_parser("run", help="simulate and write CSV/PGM dumps"), bench=False)
    _sim_flags(sub.add_parser("bench", help="time backends, emit JSON-lines records"), bench=True)
    tg = sub.add_parser("tablegen", help="write the default collision table")
    tg.add_argument("output", type=Path)
    va = sub.add_parser("validate", help="check a collision table file; exit 0 iff valid")
    va.add_argument("table", type=Path)
    return parser


@dataclass
class CliInvocation:
    command: str
    config: SimConfig | None = None
    backends: list[Backend] = field(default_factory=list)
    args: argparse.Namespace | None = None


def parse_args(argv: list[str] | None = None) -> CliInvocation:
    """Parse and validate; usage errors exit with status 2 via argparse."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command not in ("run", "bench"):
        return CliInvocation(args.command, args=args)
    backends = args.backend if args.command == "bench" else [Backend(args.backend)]
    if Backend.STRIPS in backends and args.threads > args.height - 2:
        parser.error(f"argument --threads: {args.threads} strips need at least {args.threads + 2} rows (--height {args.height})")
    cfg = SimConfig(
        width=args.width,
        height=args.height,
        steps=args.steps,
        fill_density=args.density,
        force_p=args.force_p,
        seed=args.seed,
        backend=backends[0],
        threads=args.threads,
        lanes=args.lanes,
        tile_x=args.tile_x,
        tile_y=args.tile_y,
        dump_every=getattr(args, "dump_every", 0),
        out_prefix=getattr(args, "out_prefix", "fhp"),
    )
    return CliInvocation(args.command, cfg, backends, args)


def _load_inputs(inv: CliInvocation) -> tuple[CollisionTable, object]:
    args, cfg = inv.args, inv.config
    table = build_table()
    if args.table_file is not None:
        table = load_table(args.table_file.read_bytes())
    mask = None
    if args.geometry_file is not None:
        mask = load_geometry(args.geometry_file, cfg.width, cfg.height)
    return table, mask


def _dump(lat, prefix: str, block: int) -> None:
    tag = f"{prefix}_{lat.step:06d}"
    field_ = coarse_grain(lat, block)
    write_field_csv(f"{tag}_field.csv", field_)
    write_profile_csv(f"{tag}_profile.csv", *velocity_profile(lat))
    write_pgm(f"{tag}.pgm", density_image(field_))


def cmd_run(inv: CliInvocation) -> int:
    cfg, args = inv.config, inv.args
    table, mask = _load_inputs(inv)
    lat = init_lattice(cfg, mask)
    stepper = make_stepper(cfg, table)
    for target in sample_steps(cfg.steps, cfg.dump_every):
        if target > lat.step:
            stepper.advance(lat, target - lat.step)
        _dump(lat, cfg.out_prefix, args.block)
    summary = {
        "backend": cfg.backend.value,
        "kernels": kernels.IMPLEMENTATION,
        "width": cfg.width,
        "height": cfg.height,
        "steps": lat.step,
        "mass": total_mass(lat),
        "momentum": list(total_momentum(lat)),
        "state_digest": f"{state_digest(lat):016x}",
    }
    text = json.dumps(summary)
    Path(f"{cfg.out_prefix}_summary.json").write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_bench(inv: CliInvocation) -> int:
    args = inv.args
    table, mask = _load_inputs(inv)
    records = []
    for backend in inv.backends:
        cfg = SimConfig(**{**vars(inv.config), "backend": backend})
        records += run_bench(cfg, repeats=args.repeats, warmup=args.warmup, table=table, obstacle_mask=mask)
    lines = "".join(r.to_json() + "\n" for r in records)
    if args.out is not None:
        args.out.write_text(lines)
    else:
        sys.stdout.write(lines)
    if not args.no_table:
        format_table(records, sys.stdout if args.out is not None else sys.stderr)
    if len({r.state_digest for r in records}) > 1:
        print("fhp: backends disagree on the final state digest", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_tablegen(inv: CliInvocation) -> int:
    inv.args.output.write_bytes(save_table(build_table()))
    return EXIT_OK


def cmd_validate(inv: CliInvocation) -> int:
    data = inv.args.table.read_bytes()
    try:
        table = load_table(data, force=True)
    except TableFormatError as exc:
        print(f"fhp: {inv.args.table}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report = validate_table(table)
    if not report.ok:
        print(f"fhp: {inv.args.table}: invalid table: {report.summary()}", file=sys.stderr)
        return EXIT_INVALID
    print(f"{inv.args.table}: valid")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "bench": cmd_bench, "tablegen": cmd_tablegen, "validate": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    try:
        inv = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[inv.command](inv)
    except (TableFormatError, TableValidationError) as exc:
        print(f"fhp: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PlanError as exc:
        print(f"fhp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # Geometry file shape/content problems.
        print(f"fhp: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"fhp: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
