"""Gate-level circuit IR.

A :class:`Circuit` is an ordered list of :class:`Gate` values over a fixed
number of qubits. Controls carry an explicit polarity so that comparators can
match constants without X sandwiches; lowering expands them later.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from qlbw.errors import (
    IndexOutOfRangeError,
    MeasureNotTerminalError,
    NonUnitaryGateError,
)


class GateKind(enum.Enum):
    X = "X"
    H = "H"
    SWAP = "SWAP"
    P = "P"
    U = "U"
    CX = "CX"
    CP = "CP"
    MCX = "MCX"
    MCP = "MCP"
    MEASURE = "MEASURE"


SELF_ADJOINT = {GateKind.X, GateKind.H, GateKind.SWAP, GateKind.CX, GateKind.MCX}
PHASE_KINDS = {GateKind.P, GateKind.CP, GateKind.MCP}


class ComponentKind(enum.Enum):
    PRIMITIVE = "primitive"
    OPERATOR = "operator"
    ALGORITHM = "algorithm"


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    polarity: tuple[bool, ...] = ()
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.polarity) != len(self.controls):
            object.__setattr__(self, "polarity", (True,) * len(self.controls))
        if set(self.targets) & set(self.controls):
            raise IndexOutOfRangeError(f"{self.kind.value}: targets and controls overlap")
        if len(set(self.controls)) != len(self.controls) or len(set(self.targets)) != len(self.targets):
            raise IndexOutOfRangeError(f"{self.kind.value}: repeated qubit")
        if not all(math.isfinite(p) for p in self.params):
            raise ValueError(f"{self.kind.value}: non-finite parameter")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    def adjoint(self) -> Gate:
        if self.kind is GateKind.MEASURE:
            raise NonUnitaryGateError("measurement has no adjoint")
        if self.kind in SELF_ADJOINT:
            return self
        if self.kind in PHASE_KINDS:
            return Gate(self.kind, self.targets, self.controls, self.polarity, (-self.params[0],))
        theta, phi, lam = self.params
        return Gate(self.kind, self.targets, self.controls, self.polarity, (-theta, -lam, -phi))

    def remapped(self, mapping) -> Gate:
        return Gate(
            self.kind,
            tuple(mapping[q] for q in self.targets),
            tuple(mapping[q] for q in self.controls),
            self.polarity,
            self.params,
        )

    def dump(self) -> str:
        head = self.kind.value
        if self.params:
            head += "(" + ",".join(f"{p:.12g}" for p in self.params) + ")"
        text = f"{head} " + " ".join(str(t) for t in self.targets)
        if self.controls:
            text += " | " + " ".join(f"{c}({int(p)})" for c, p in zip(self.controls, self.polarity))
        return text


def x(target: int) -> Gate:
    return Gate(GateKind.X, (target,))


def h(target: int) -> Gate:
    return Gate(GateKind.H, (target,))


def u(theta: float, phi: float, lam: float, target: int) -> Gate:
    return Gate(GateKind.U, (target,), params=(theta, phi, lam))


def swap(a: int, b: int) -> Gate:
    return Gate(GateKind.SWAP, (a, b))


def cx(control: int, target: int) -> Gate:
    return Gate(GateKind.CX, (target,), (control,))


def mcx(controls, target: int, polarity=None) -> Gate:
    """X on ``target`` conditioned on ``controls``; degrades to X or CX when it can."""
    controls = tuple(controls)
    polarity = tuple(polarity) if polarity is not None else (True,) * len(controls)
    if not controls:
        return x(target)
    if len(controls) == 1 and polarity[0]:
        return cx(controls[0], target)
    return Gate(GateKind.MCX, (target,), controls, polarity)


def phase(theta: float, target: int, controls=(), polarity=None) -> Gate:
    controls = tuple(controls)
    polarity = tuple(polarity) if polarity is not None else (True,) * len(controls)
    if not controls:
        return Gate(GateKind.P, (target,), params=(theta,))
    if len(controls) == 1 and polarity[0]:
        return Gate(GateKind.CP, (target,), controls, params=(theta,))
    return Gate(GateKind.MCP, (target,), controls, polarity, (theta,))


def measure(target: int) -> Gate:
    return Gate(GateKind.MEASURE, (target,))


@dataclass
class Circuit:
    num_qubits: int
    gates: list[Gate] = field(default_factory=list)
    name: str = ""
    register_map: object = None
    kind: ComponentKind | None = None

    def __post_init__(self):
        gates, self.gates = list(self.gates), []
        for g in gates:
            self.append(g)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def append(self, gate: Gate) -> Circuit:
        for q in gate.qubits:
            if not 0 <= q < self.num_qubits:
                raise IndexOutOfRangeError(f"qubit {q} out of range for {self.num_qubits}-qubit circuit")
        if self.gates and self.gates[-1].kind is GateKind.MEASURE:
            if gate.kind is not GateKind.MEASURE:
                raise MeasureNotTerminalError("gates may not follow a measurement")
            if gate.targets[0] in self.measured_qubits():
                raise MeasureNotTerminalError(f"qubit {gate.targets[0]} is already measured")
        self.gates.append(gate)
        return self

    def extend(self, gates) -> Circuit:
        for g in gates:
            self.append(g)
        return self

    @property
    def has_measure(self) -> bool:
        return any(g.kind is GateKind.MEASURE for g in self.gates)

    def measured_qubits(self) -> list[int]:
        return [g.targets[0] for g in self.gates if g.kind is GateKind.MEASURE]

    def copy(self, name: str | None = None) -> Circuit:
        return Circuit(self.num_qubits, list(self.gates), name if name is not None else self.name,
                       self.register_map, self.kind)

    def dump(self) -> str:
        return "".join(g.dump() + "\n" for g in self.gates)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return self.num_qubits == other.num_qubits and self.gates == other.gates


def empty(num_qubits: int, name: str = "", register_map=None) -> Circuit:
    return Circuit(num_qubits, [], name, register_map)


def compose(a: Circuit, b: Circuit, qubit_mapping=None) -> Circuit:
    """Append the gates of ``b`` after ``a``; ``qubit_mapping[i]`` is where b's qubit i lands."""
    if qubit_mapping is None:
        if b.num_qubits > a.num_qubits:
            raise IndexOutOfRangeError(f"cannot compose {b.num_qubits} qubits onto {a.num_qubits}")
        mapping = list(range(b.num_qubits))
    else:
        mapping = list(qubit_mapping)
        if len(mapping) != b.num_qubits:
            raise IndexOutOfRangeError(f"mapping has {len(mapping)} entries for {b.num_qubits} qubits")
        if any(not 0 <= m < a.num_qubits for m in mapping):
            raise IndexOutOfRangeError("mapping points outside the host circuit")
    out = a.copy()
    for g in b.gates:
        out.append(g if qubit_mapping is None else g.remapped(mapping))
    return out


def inverse(c: Circuit) -> Circuit:
    if c.has_measure:
        raise NonUnitaryGateError("cannot invert a circuit containing measurements")
    return Circuit(c.num_qubits, [g.adjoint() for g in reversed(c.gates)], c.name + "_dg", c.register_map, c.kind)


def qft_gates(qubits) -> list[Gate]:
    """QFT on ``qubits`` (little-endian) with the final bit-reversal swaps."""
    qubits = list(qubits)
    n = len(qubits)
    gates = []
    for j in reversed(range(n)):
        gates.append(h(qubits[j]))
        for k in reversed(range(j)):
            gates.append(phase(math.pi / 2 ** (j - k), qubits[j], (qubits[k],)))
    for i in range(n // 2):
        gates.append(swap(qubits[i], qubits[n - 1 - i]))
    return gates


def qft(n: int) -> Circuit:
    if n < 1:
        raise ValueError("QFT needs at least one qubit")
    return Circuit(n, qft_gates(range(n)), f"qft{n}")


def metrics(c: Circuit) -> dict:
    """Gate count, depth and per-kind tallies; every gate (composite or not) counts once."""
    frontier = [0] * c.num_qubits
    per_kind: dict[str, int] = {}
    depth = 0
    for g in c.gates:
        level = 1 + max(frontier[q] for q in g.qubits)
        for q in g.qubits:
            frontier[q] = level
        depth = max(depth, level)
        per_kind[g.kind.value] = per_kind.get(g.kind.value, 0) + 1
    return {"gate_count": len(c.gates), "depth": depth, "per_kind_counts": per_kind}
