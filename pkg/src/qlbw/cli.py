"""Command-line workbench: validate, build, lower, simulate, bench, export."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

from qlbw import __version__
from qlbw.bench import SUITES, rows_to_csv, run_suite
from qlbw.circuit import metrics
from qlbw.components import LeftHalfUniform, PointSource, cqlbm_step, grid_measurement, initial_conditions
from qlbw.errors import QlbwError
from qlbw.export import counts_csv, export_stl, export_vtk
from qlbw.lattice import AXES, lattice_to_dict, load_lattice, parse_lattice, register_layout
from qlbw.lowering import compile_report, lower, optimize
from qlbw.runner import SimulationConfig, run


def parse_initial(text: str):
    """``left-half`` or ``point:X,Y[,Z]:VX,VY[,VZ]`` with signed speeds."""
    if text == "left-half":
        return LeftHalfUniform()
    parts = text.split(":")
    if len(parts) != 3 or parts[0] != "point":
        raise argparse.ArgumentTypeError(f"bad initial condition {text!r}")
    try:
        pos = tuple(int(v) for v in parts[1].split(","))
        vel = tuple(int(v) for v in parts[2].split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad initial condition {text!r}") from None
    return PointSource(pos, vel)


def format_initial(kind) -> str:
    if isinstance(kind, PointSource):
        return "point:" + ",".join(map(str, kind.position)) + ":" + ",".join(map(str, kind.velocity))
    return "left-half"


def resolve_seed(seed: int) -> int:
    env = os.environ.get("QLBW_SEED")
    return int(env) if env not in (None, "") else seed


def _cmd_validate(args) -> int:
    lat = load_lattice(args.lattice)
    rmap = register_layout(lat)
    print(f"ok: {len(lat.dims)}D grid {'x'.join(map(str, lat.dims))}, "
          f"{len(lat.blocks)} obstacle(s), {rmap.total_qubits} qubits")
    return 0


def _cmd_build(args) -> int:
    lat = load_lattice(args.lattice)
    rmap = register_layout(lat)
    step = cqlbm_step(lat, rmap)
    info = {"qubits": rmap.total_qubits,
            "registers": [{"name": n, "start": s, "width": w} for n, s, w in rmap.registers],
            **metrics(step)}
    if args.dump:
        Path(args.dump).write_text(step.dump())
    print(json.dumps(info, indent=2))
    return 0


def _cmd_lower(args) -> int:
    lat = load_lattice(args.lattice)
    step = cqlbm_step(lat)
    report = compile_report(step, args.level)
    if args.dump:
        Path(args.dump).write_text(optimize(lower(step), args.level).dump())
    print(json.dumps(report, indent=2))
    return 0


def simulate(lattice_doc: dict, steps: int, shots: int, exact: bool, snapshots: bool, seed: int,
             initial: str, out: Path) -> dict:
    lat = parse_lattice(json.dumps(lattice_doc))
    rmap = register_layout(lat)
    kind = parse_initial(initial)
    t0 = time.perf_counter()
    cfg = SimulationConfig(initial_conditions(lat, rmap, kind), cqlbm_step(lat, rmap), grid_measurement(rmap),
                           snapshots=snapshots, shots=shots, seed=seed, exact=exact)
    build = time.perf_counter() - t0
    res = run(cfg, steps)

    out.mkdir(parents=True, exist_ok=True)
    files = ["geometry.stl"]
    (out / "geometry.stl").write_bytes(export_stl(lat.blocks))
    if steps:
        (out / "counts.csv").write_text(counts_csv(enumerate(res.counts, 1), lat.num_dims))
        files.append("counts.csv")
    for k, counts in enumerate(res.counts, 1):
        name = f"density_{k:04d}.vtk"
        (out / name).write_bytes(export_vtk(counts.data, lat.dims, f"qlbw density step {k}"))
        files.append(name)

    manifest = {
        "version": __version__,
        "config": {"lattice": lattice_doc, "steps": steps, "shots": shots, "exact": exact,
                   "snapshots": snapshots, "seed": seed, "initial": initial},
        "seed": seed,
        "qubits": rmap.total_qubits,
        "counters": {"step_applications": res.total_step_applications,
                     "step_applications_per_step": res.step_applications,
                     "statevector_copies": res.copies},
        "timings": {"build_wall_time": build, "step_wall_times": res.wall_times,
                    "total_wall_time": time.perf_counter() - t0},
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def _cmd_simulate(args) -> int:
    if args.manifest:
        cfg = json.loads(Path(args.manifest).read_text())["config"]
        doc, steps, shots = cfg["lattice"], cfg["steps"], cfg["shots"]
        exact, snapshots, seed, initial = cfg["exact"], cfg["snapshots"], cfg["seed"], cfg["initial"]
    else:
        if args.lattice is None or args.steps is None:
            raise SystemExit("simulate: --lattice and --steps are required without --manifest")
        doc = lattice_to_dict(load_lattice(args.lattice))
        steps, shots, exact, snapshots = args.steps, args.shots, args.exact, not args.no_snapshots
        seed, initial = args.seed, format_initial(args.initial)
    if steps < 0:
        raise SystemExit("simulate: --steps must be non-negative")
    m = simulate(doc, steps, shots, exact, snapshots, resolve_seed(seed), initial, Path(args.out))
    print(f"wrote {len(m['files']) + 1} file(s) to {args.out}; "
          f"{m['counters']['step_applications']} step application(s)")
    return 0


def _cmd_bench(args) -> int:
    rows = run_suite(args.suite, tuple(args.grid), args.max_obstacles, args.steps, args.workers)
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _read_counts(path: Path, num_dims: int) -> dict[int, dict]:
    steps: dict[int, dict] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            pos = tuple(int(row[a]) for a in AXES[:num_dims])
            steps.setdefault(int(row["step"]), {})[pos] = float(row["count"])
    return steps


def _cmd_export(args) -> int:
    lat = load_lattice(args.lattice)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "geometry.stl").write_bytes(export_stl(lat.blocks))
    n = 1
    if args.counts:
        for k, density in sorted(_read_counts(Path(args.counts), lat.num_dims).items()):
            (out / f"density_{k:04d}.vtk").write_bytes(export_vtk(density, lat.dims, f"qlbw density step {k}"))
            n += 1
    print(f"wrote {n} file(s) to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qlbw", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="parse and validate a lattice file")
    s.add_argument("lattice_pos", nargs="?", metavar="LATTICE")
    s.add_argument("--lattice")
    s.set_defaults(func=_cmd_validate)

    s = sub.add_parser("build", help="assemble the time-step circuit and print its metrics")
    s.add_argument("--lattice", required=True)
    s.add_argument("--dump", help="write the IR text dump here")
    s.set_defaults(func=_cmd_build)

    s = sub.add_parser("lower", help="lower the time-step circuit to U/CX and report metrics")
    s.add_argument("--lattice", required=True)
    s.add_argument("--level", type=int, choices=(0, 1), default=1)
    s.add_argument("--dump", help="write the lowered circuit dump here")
    s.set_defaults(func=_cmd_lower)

    s = sub.add_parser("simulate", help="run a multi-step simulation and write results")
    s.add_argument("--lattice")
    s.add_argument("--steps", type=int)
    s.add_argument("--shots", type=int, default=1024)
    s.add_argument("--exact", action="store_true", help="record exact probabilities instead of samples")
    s.add_argument("--no-snapshots", action="store_true", help="re-run every step from scratch")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--initial", type=parse_initial, default=LeftHalfUniform(),
                   help="left-half (default) or point:X,Y:VX,VY")
    s.add_argument("--manifest", help="re-run the configuration recorded in a manifest")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_simulate)

    s = sub.add_parser("bench", help="sweep obstacle counts and grid sizes, one CSV row per configuration")
    s.add_argument("--suite", choices=SUITES, required=True)
    s.add_argument("--grid", type=int, nargs="+", default=[16])
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--max-obstacles", type=int, default=6)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_bench)

    s = sub.add_parser("export", help="write geometry STL and per-step VTK from a counts CSV")
    s.add_argument("--lattice", required=True)
    s.add_argument("--counts")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        args.lattice = args.lattice or args.lattice_pos
        if not args.lattice:
            print("qlbw validate: a lattice file is required", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except QlbwError as exc:
        print(f"qlbw {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"qlbw {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
