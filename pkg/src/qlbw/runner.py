"""Multi-step execution: naive re-execution versus statevector snapshots.

Naive mode rebuilds the state for every requested step, so step ``k`` costs
``k`` applications of the step circuit. Snapshot mode keeps the statevector
between steps and samples it in place, so ``n`` steps cost ``n`` applications.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

from qlbw.circuit import Circuit
from qlbw.errors import MeasureInUnitaryApplyError, NormDriftError, QubitCountMismatchError
from qlbw.simulator import Counts, Statevector, apply, evolve, sample

NORM_DRIFT_LIMIT = 1e-6

# (state after a step, counts of that step) -> state or initial-conditions circuit for the next one
Reinitializer = Callable[[Statevector, Counts], "Statevector | Circuit"]


def reinitialize_qtm(psi: Statevector, counts: Counts) -> Statevector:
    """The transport method needs no re-encoding: the state is reused as is."""
    return psi


@dataclass
class SimulationConfig:
    initial: Circuit
    step: Circuit
    measurement: Circuit
    postprocess: Circuit | None = None
    snapshots: bool = True
    sampling: bool = True
    shots: int = 1024
    seed: int = 0
    exact: bool = False

    def __post_init__(self):
        n = self.step.num_qubits
        if self.postprocess is None:
            self.postprocess = Circuit(n, [], "postprocess", self.step.register_map)
        for c in (self.initial, self.postprocess, self.measurement):
            if c.num_qubits != n:
                raise QubitCountMismatchError(f"circuit {c.name!r} has {c.num_qubits} qubits, step has {n}")
        for c in (self.initial, self.step, self.postprocess):
            if c.has_measure:
                raise MeasureInUnitaryApplyError(f"circuit {c.name!r} may not contain measurements")
        if len(self.measurement.measured_qubits()) != len(self.measurement.gates):
            raise ValueError("measurement circuit must contain only measurements")
        if not self.exact and self.shots < 1:
            raise ValueError("shots must be positive")

    @property
    def num_qubits(self) -> int:
        return self.step.num_qubits


@dataclass
class TimeSeriesResult:
    counts: list[Counts] = field(default_factory=list)
    wall_times: list[float] = field(default_factory=list)
    step_applications: list[int] = field(default_factory=list)  # cumulative, after each step
    norms: list[float] = field(default_factory=list)
    copies: int = 0

    def __len__(self):
        return len(self.counts)

    @property
    def total_step_applications(self) -> int:
        return self.step_applications[-1] if self.step_applications else 0


def _decoder(config: SimulationConfig):
    """Map sampled integer keys to grid coordinate tuples when the measurement covers the grid."""
    qubits = config.measurement.measured_qubits()
    rmap = config.step.register_map
    if rmap is None or sorted(qubits) != sorted(rmap.all_grid_qubits()):
        return qubits, lambda key: key
    pos = {q: j for j, q in enumerate(qubits)}
    grids = [rmap.grid(k) for k in range(rmap.num_dims)]

    def decode(key: int):
        return tuple(sum(((key >> pos[q]) & 1) << i for i, q in enumerate(g)) for g in grids)

    return qubits, decode


class _Stepper:
    def __init__(self, config: SimulationConfig, result: TimeSeriesResult):
        self.config = config
        self.result = result
        self.applications = 0

    def step(self, psi: Statevector) -> None:
        evolve(self.config.step, psi)
        self.applications += 1
        norm = psi.norm()
        if abs(norm - 1.0) > NORM_DRIFT_LIMIT:
            raise NormDriftError(f"statevector norm drifted to {norm!r}")


def _measure(config: SimulationConfig, psi: Statevector, k: int, qubits, decode) -> Counts:
    raw = sample(psi, qubits, config.shots, [config.seed, k], exact=config.exact)
    return Counts({decode(key): v for key, v in raw.data.items()}, raw.shots, raw.exact, config.seed)


def run(config: SimulationConfig, steps: int, reinitializer: Reinitializer = reinitialize_qtm) -> TimeSeriesResult:
    if steps < 0:
        raise ValueError("steps must be non-negative")
    result = TimeSeriesResult()
    stepper = _Stepper(config, result)
    qubits, decode = _decoder(config)
    n = config.num_qubits
    has_post = len(config.postprocess.gates) > 0

    if not config.snapshots:
        for k in range(1, steps + 1):
            t0 = time.perf_counter()
            psi = evolve(config.initial, Statevector.zero(n))
            for _ in range(k):
                stepper.step(psi)
            if has_post:
                evolve(config.postprocess, psi)
            result.counts.append(_measure(config, psi, k, qubits, decode))
            result.wall_times.append(time.perf_counter() - t0)
            result.step_applications.append(stepper.applications)
            result.norms.append(psi.norm())
        return result

    psi = evolve(config.initial, Statevector.zero(n))
    for k in range(1, steps + 1):
        t0 = time.perf_counter()
        stepper.step(psi)
        if has_post:
            view = apply(config.postprocess, psi)
            result.copies += 1
        elif not config.sampling:
            # measuring through the evolution path would consume the state
            view = psi.copy()
            result.copies += 1
        else:
            view = psi
        counts = _measure(config, view, k, qubits, decode)
        result.counts.append(counts)
        result.norms.append(psi.norm())
        nxt = reinitializer(psi, counts)
        if isinstance(nxt, Circuit):
            nxt = evolve(nxt, Statevector.zero(n))
        if nxt.num_qubits != n:
            raise QubitCountMismatchError("reinitializer changed the qubit count")
        psi = nxt
        result.wall_times.append(time.perf_counter() - t0)
        result.step_applications.append(stepper.applications)
    return result
