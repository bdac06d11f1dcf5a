"""Dense statevector simulation.

Amplitudes are stored as a flat complex128 array; qubit ``q`` is bit ``q`` of
the basis index. Each gate reshapes the array so that its own qubits get separate axes;
fixing the control axes to their polarity values selects the controlled
subspace as a numpy view, so every update is an in-place amplitude-pair
operation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from qlbw.circuit import Circuit, Gate, GateKind
from qlbw.errors import MeasureInUnitaryApplyError, QubitCountMismatchError

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def u_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -cmath.exp(1j * lam) * s], [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c]],
        dtype=complex,
    )


def gate_matrix_1q(gate: Gate) -> np.ndarray:
    if gate.kind is GateKind.H:
        return _H
    if gate.kind is GateKind.U:
        return u_matrix(*gate.params)
    if gate.kind in (GateKind.X, GateKind.CX, GateKind.MCX):
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if gate.kind in (GateKind.P, GateKind.CP, GateKind.MCP):
        return np.diag([1, cmath.exp(1j * gate.params[0])])
    raise ValueError(f"{gate.kind.value} is not a single-target gate")


def _split_view(amps: np.ndarray, qubits, n: int):
    """Reshape the flat amplitude array so each qubit in ``qubits`` gets its own axis.

    Runs of untouched qubits are merged into single axes, which keeps numpy's
    strided indexing cheap. Returns the view and a qubit -> axis map.
    """
    shape, axis_of = [], {}
    hi = n
    for q in sorted(qubits, reverse=True):
        if hi - q - 1 > 0:
            shape.append(2 ** (hi - q - 1))
        axis_of[q] = len(shape)
        shape.append(2)
        hi = q
    if hi > 0:
        shape.append(2**hi)
    return amps.reshape(tuple(shape) + amps.shape[1:]), axis_of


def apply_gate(amps: np.ndarray, gate: Gate, n: int) -> None:
    """Apply ``gate`` in place to ``amps`` of shape ``(2**n,)`` or ``(2**n, batch)``."""
    view, axis_of = _split_view(amps, gate.qubits, n)
    base = [slice(None)] * view.ndim
    for c, pol in zip(gate.controls, gate.polarity):
        base[axis_of[c]] = 1 if pol else 0
    kind = gate.kind

    if kind is GateKind.SWAP:
        a, b = gate.targets
        i01, i10 = list(base), list(base)
        i01[axis_of[a]], i01[axis_of[b]] = 0, 1
        i10[axis_of[a]], i10[axis_of[b]] = 1, 0
        i01, i10 = tuple(i01), tuple(i10)
        tmp = view[i01].copy()
        view[i01] = view[i10]
        view[i10] = tmp
        return

    t = axis_of[gate.targets[0]]
    i0, i1 = list(base), list(base)
    i0[t], i1[t] = 0, 1
    i0, i1 = tuple(i0), tuple(i1)

    if kind in (GateKind.X, GateKind.CX, GateKind.MCX):
        sub = view[tuple(base)]
        axis = t - sum(1 for c in gate.controls if axis_of[c] < t)
        sub[...] = np.flip(sub, axis)
    elif kind in (GateKind.P, GateKind.CP, GateKind.MCP):
        view[i1] *= cmath.exp(1j * gate.params[0])
    elif kind in (GateKind.H, GateKind.U):
        m = gate_matrix_1q(gate)
        a0, a1 = view[i0], view[i1]
        new0 = m[0, 0] * a0 + m[0, 1] * a1
        a1 *= m[1, 1]
        a1 += m[1, 0] * a0
        view[i0] = new0
    elif kind is GateKind.MEASURE:
        raise MeasureInUnitaryApplyError("measurement cannot be applied as a unitary")
    else:  # pragma: no cover
        raise ValueError(f"unsupported gate {kind}")


@dataclass
class Statevector:
    amplitudes: np.ndarray
    num_qubits: int

    @classmethod
    def zero(cls, num_qubits: int) -> Statevector:
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps, num_qubits)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> Statevector:
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps, num_qubits)

    def copy(self) -> Statevector:
        return Statevector(self.amplitudes.copy(), self.num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _check(c: Circuit, n: int) -> None:
    if c.num_qubits != n:
        raise QubitCountMismatchError(f"circuit has {c.num_qubits} qubits, state has {n}")
    if c.has_measure:
        raise MeasureInUnitaryApplyError(f"circuit {c.name!r} contains measurements")


def evolve(c: Circuit, psi: Statevector) -> Statevector:
    """Apply ``c`` to ``psi`` in place and return it."""
    _check(c, psi.num_qubits)
    for g in c.gates:
        apply_gate(psi.amplitudes, g, psi.num_qubits)
    return psi


def apply(c: Circuit, psi: Statevector) -> Statevector:
    return evolve(c, psi.copy())


def unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of a measure-free circuit (column j = image of basis state j)."""
    if c.has_measure:
        raise MeasureInUnitaryApplyError(f"circuit {c.name!r} contains measurements")
    n = c.num_qubits
    dim = 2**n
    mat = np.eye(dim, dtype=complex)
    for g in c.gates:
        apply_gate(mat, g, n)
    return mat


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """max |b - e^{ia} a| after removing the best global phase (read off the largest entry)."""
    idx = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    if abs(a[idx]) < 1e-15:
        return float(np.max(np.abs(b)))
    ph = b[idx] / a[idx]
    ph /= abs(ph) if abs(ph) > 0 else 1.0
    return float(np.max(np.abs(b - ph * a)))


@dataclass
class Counts:
    """Measured outcomes: sampled occurrence counts, or exact probabilities."""

    data: dict = field(default_factory=dict)
    shots: int | None = None
    exact: bool = False
    seed: int | None = None

    @property
    def total(self) -> float:
        return sum(self.data.values())

    def normalized(self) -> dict:
        tot = self.total
        return {k: v / tot for k, v in self.data.items()} if tot else {}

    def __eq__(self, other):
        if not isinstance(other, Counts):
            return NotImplemented
        return self.data == other.data and self.exact == other.exact


def marginal(psi: Statevector, qubits) -> np.ndarray:
    """Probabilities over ``qubits``; entry i has bit j set iff ``qubits[j]`` reads 1."""
    n = psi.num_qubits
    qubits = list(qubits)
    probs = psi.probabilities().reshape((2,) * n)
    keep = [n - 1 - q for q in qubits]
    drop = tuple(a for a in range(n) if a not in keep)
    reduced = probs.sum(axis=drop) if drop else probs
    # remaining axes are ordered by ascending axis index; put qubits[-1] first (most significant)
    remaining = sorted(keep)
    order = [remaining.index(n - 1 - q) for q in reversed(qubits)]
    return np.transpose(reduced, order).reshape(-1) if qubits else np.array([probs.sum()])


def sample(psi: Statevector, qubits, shots: int = 1024, seed: int | None = None, exact: bool = False,
           tol: float = 1e-12) -> Counts:
    """Draw from the measurement distribution of ``qubits`` without touching ``psi``.

    Keys are integers whose bit j is the outcome of ``qubits[j]``. In exact mode
    the values are probabilities and entries not above ``tol`` are dropped.
    """
    p = marginal(psi, qubits)
    if exact:
        nz = np.nonzero(p > tol)[0]
        return Counts({int(i): float(p[i]) for i in nz}, None, True, None)
    if shots < 1:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, p / p.sum())
    nz = np.nonzero(draws)[0]
    return Counts({int(i): int(draws[i]) for i in nz}, shots, False, seed)
