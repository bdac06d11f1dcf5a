"""Scaling sweeps over obstacle count and grid size."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor

from qlbw import circuit as qc
from qlbw.components import PointSource, cqlbm_step, grid_measurement, initial_conditions
from qlbw.lattice import Block, BoundaryKind, LatticeSpec, register_layout
from qlbw.lowering import compile_report
from qlbw.runner import SimulationConfig, run

SUITES = ("assembly", "lowering", "simulation")

# 2x2 obstacles on a 16-cell reference grid, scaled for larger grids
_X_STARTS = (2, 7, 12)
_Y_STARTS = (3, 10)


def bench_lattice(grid: int, obstacles: int, velocities: int = 4,
                  boundary: BoundaryKind = BoundaryKind.BOUNCEBACK) -> LatticeSpec:
    if grid < 16:
        raise ValueError("benchmark grids must be at least 16 cells wide")
    slots = [(x, y) for y in _Y_STARTS for x in _X_STARTS]
    if not 0 <= obstacles <= len(slots):
        raise ValueError(f"obstacle count must be in 0..{len(slots)}")
    scale = grid // 16
    blocks = tuple(
        Block(((x * scale, x * scale + 1), (y * scale, y * scale + 1)), boundary) for x, y in slots[:obstacles]
    )
    return LatticeSpec((grid, grid), (velocities, velocities), blocks)


def _assembly(grid, k):
    lat = bench_lattice(grid, k)
    t0 = time.perf_counter()
    step = cqlbm_step(lat)
    build = time.perf_counter() - t0
    m = qc.metrics(step)
    return {"qubits": step.num_qubits, "ir_gate_count": m["gate_count"], "ir_depth": m["depth"],
            "build_wall_time": build}, step


def bench_row(suite: str, grid: int, obstacles: int, steps: int = 20, snapshots: bool = True,
              optimization_level: int = 1) -> dict:
    row = {"suite": suite, "grid": grid, "obstacles": obstacles}
    info, step = _assembly(grid, obstacles)
    row.update(info)
    if suite == "lowering":
        row.update(compile_report(step, optimization_level))
    elif suite == "simulation":
        lat = bench_lattice(grid, obstacles)
        rmap = step.register_map
        # obstacles sit in the left half, so start from a single fluid cell; the state is dense regardless
        source = PointSource((0,) * lat.num_dims, (1,) * lat.num_dims)
        cfg = SimulationConfig(initial_conditions(lat, rmap, source), step, grid_measurement(rmap),
                               snapshots=snapshots, exact=True)
        t0 = time.perf_counter()
        res = run(cfg, steps)
        row.update({"snapshots": int(snapshots), "steps": steps,
                    "step_applications": res.total_step_applications,
                    "simulation_wall_time": time.perf_counter() - t0})
    elif suite != "assembly":
        raise ValueError(f"unknown suite {suite!r}")
    return row


def _row_star(args):
    return bench_row(*args)


def run_suite(suite: str, grids=(16,), max_obstacles: int = 6, steps: int = 20, workers: int = 1) -> list[dict]:
    jobs = []
    for grid in grids:
        for k in range(max_obstacles + 1):
            if suite == "simulation":
                jobs += [(suite, grid, k, steps, True), (suite, grid, k, steps, False)]
            else:
                jobs.append((suite, grid, k, steps))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_row_star, jobs))
    return [_row_star(j) for j in jobs]


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
