"""Compile IR circuits to the basis {U(theta, phi, lambda), CX} and peephole-optimize.

Multi-controlled gates with up to four controls become phase-parity networks
that need no extra qubits. Larger ones are split in two halves around one
borrowed qubit, which may be in any state and is restored afterwards.
"""

from __future__ import annotations

import cmath
import math
import time

import numpy as np

from qlbw import circuit as qc
from qlbw.circuit import Circuit, Gate, GateKind
from qlbw.errors import InsufficientScratchError, NonUnitaryGateError
from qlbw.simulator import u_matrix

PI = math.pi
BASIS = {GateKind.U, GateKind.CX, GateKind.MEASURE}
MAX_DIRECT_CONTROLS = 4


def _u(theta, phi, lam, q) -> Gate:
    return qc.u(theta, phi, lam, q)


def _p(theta, q) -> Gate:
    return _u(0.0, 0.0, theta, q)


def _xg(q) -> Gate:
    return _u(PI, 0.0, PI, q)


def _hg(q) -> Gate:
    return _u(PI / 2, 0.0, PI, q)


def _cx(c, t) -> Gate:
    return qc.cx(c, t)


def _cp(theta, c, t) -> list[Gate]:
    return [_p(theta / 2, c), _cx(c, t), _p(-theta / 2, t), _cx(c, t), _p(theta / 2, t)]


def _toffoli(a, b, t) -> list[Gate]:
    T, Tdg = PI / 4, -PI / 4
    return [
        _hg(t), _cx(b, t), _p(Tdg, t), _cx(a, t), _p(T, t), _cx(b, t), _p(Tdg, t), _cx(a, t),
        _p(T, b), _p(T, t), _hg(t), _cx(a, b), _p(T, a), _p(Tdg, b), _cx(a, b),
    ]


def _parity_phase(theta, qubits) -> list[Gate]:
    """exp(i theta) on the all-ones state of ``qubits``, as a sum of parity phases."""
    n = len(qubits)
    if n == 1:
        return [_p(theta, qubits[0])]
    gates = []
    scale = theta / 2 ** (n - 1)
    for mask in range(1, 2**n):
        members = [qubits[i] for i in range(n) if (mask >> i) & 1]
        sign = 1 if len(members) % 2 else -1
        *rest, last = members
        chain = [_cx(q, last) for q in rest]
        gates += chain + [_p(sign * scale, last)] + chain[::-1]
    return gates


def _borrow(busy, num_qubits) -> int:
    for q in range(num_qubits):
        if q not in busy:
            return q
    raise InsufficientScratchError(f"no idle qubit to borrow for a gate on {len(busy)} of {num_qubits} qubits")


def _mcx(controls, t, num_qubits) -> list[Gate]:
    m = len(controls)
    if m == 0:
        return [_xg(t)]
    if m == 1:
        return [_cx(controls[0], t)]
    if m == 2:
        return _toffoli(controls[0], controls[1], t)
    if m <= MAX_DIRECT_CONTROLS:
        return [_hg(t)] + _parity_phase(PI, list(controls) + [t]) + [_hg(t)]
    a = _borrow(set(controls) | {t}, num_qubits)
    m1 = (m + 1) // 2
    c1, c2 = list(controls[:m1]), list(controls[m1:]) + [a]
    first = _mcx(c1, a, num_qubits)
    second = _mcx(c2, t, num_qubits)
    # t ^= (a ^ f1) f2 ^ a f2 = f1 f2 for any value of a
    return first + second + first + second


def _mcp(theta, controls, t, num_qubits) -> list[Gate]:
    m = len(controls)
    if m == 0:
        return [_p(theta, t)]
    if m == 1:
        return _cp(theta, controls[0], t)
    if m <= MAX_DIRECT_CONTROLS:
        return _parity_phase(theta, list(controls) + [t])
    *rest, last = controls
    flip = _mcx(rest, last, num_qubits)
    return (_cp(theta / 2, last, t) + flip + _cp(-theta / 2, last, t) + flip
            + _mcp(theta / 2, rest, t, num_qubits))


def lower_gate(g: Gate, num_qubits: int) -> list[Gate]:
    kind = g.kind
    if kind is GateKind.MEASURE:
        return [g]
    if kind is GateKind.U:
        return [g]
    if kind is GateKind.H:
        return [_hg(g.targets[0])]
    if kind is GateKind.X:
        return [_xg(g.targets[0])]
    if kind is GateKind.P:
        return [_p(g.params[0], g.targets[0])]
    if kind is GateKind.SWAP:
        a, b = g.targets
        return [_cx(a, b), _cx(b, a), _cx(a, b)]

    negative = [c for c, pol in zip(g.controls, g.polarity) if not pol]
    sandwich = [_xg(c) for c in negative]
    t = g.targets[0]
    if kind in (GateKind.CX, GateKind.MCX):
        body = _mcx(g.controls, t, num_qubits)
    elif kind in (GateKind.CP, GateKind.MCP):
        body = _mcp(g.params[0], g.controls, t, num_qubits)
    else:  # pragma: no cover
        raise NonUnitaryGateError(f"cannot lower {kind.value}")
    return sandwich + body + sandwich


def lower(c: Circuit) -> Circuit:
    """Rewrite ``c`` into U and CX gates (measurements are kept)."""
    out = Circuit(c.num_qubits, [], c.name + "_lowered", c.register_map, c.kind)
    for g in c.gates:
        out.extend(lower_gate(g, c.num_qubits))
    return out


# ---------------------------------------------------------------- optimization


def _wrap(a: float) -> float:
    a = math.remainder(a, 2 * PI)
    return PI if abs(a + PI) < 1e-15 else a


def u_angles(m: np.ndarray, eps: float = 1e-12) -> tuple[float, float, float]:
    """(theta, phi, lambda) with U(theta, phi, lambda) equal to ``m`` up to global phase."""
    a00, a01, a10, a11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    theta = 2 * math.atan2(abs(a10), abs(a00))
    if abs(a10) < eps:
        return 0.0, 0.0, _wrap(cmath.phase(a11) - cmath.phase(a00))
    if abs(a00) < eps:
        return PI, 0.0, _wrap(cmath.phase(-a01) - cmath.phase(a10))
    return theta, _wrap(cmath.phase(a10) - cmath.phase(a00)), _wrap(cmath.phase(-a01) - cmath.phase(a00))


def _is_identity(g: Gate, eps: float = 1e-12) -> bool:
    theta, phi, lam = g.params
    return abs(_wrap(theta)) < eps and abs(_wrap(phi + lam)) < eps


def _pass(gates: list[Gate], num_qubits: int) -> tuple[list[Gate], bool]:
    out: list[Gate | None] = []
    stacks: list[list[int]] = [[] for _ in range(num_qubits)]
    changed = False

    def top(q):
        while stacks[q] and out[stacks[q][-1]] is None:
            stacks[q].pop()
        return stacks[q][-1] if stacks[q] else None

    for g in gates:
        if g.kind is GateKind.U:
            q = g.targets[0]
            i = top(q)
            if i is not None and out[i].kind is GateKind.U:
                merged = u_matrix(*g.params) @ u_matrix(*out[i].params)
                out[i] = qc.u(*u_angles(merged), q)
                changed = True
                if _is_identity(out[i]):
                    out[i] = None
                continue
            if _is_identity(g):
                changed = True
                continue
        elif g.kind is GateKind.CX:
            c, t = g.controls[0], g.targets[0]
            i = top(c)
            if i is not None and i == top(t) and out[i] == g:
                out[i] = None
                changed = True
                continue
        out.append(g)
        for q in g.qubits:
            stacks[q].append(len(out) - 1)
    return [g for g in out if g is not None], changed


def optimize(c: Circuit, level: int = 1) -> Circuit:
    """Level 0 returns the circuit unchanged; level 1 cancels CX pairs and fuses U runs to a fixed point."""
    if level == 0:
        return c.copy()
    if level != 1:
        raise ValueError(f"unknown optimization level {level}")
    gates, changed = list(c.gates), True
    while changed:
        gates, changed = _pass(gates, c.num_qubits)
    return Circuit(c.num_qubits, gates, c.name, c.register_map, c.kind)


def is_lowered(c: Circuit) -> bool:
    return all(g.kind in BASIS and all(g.polarity) for g in c.gates)


def compile_report(c: Circuit, optimization_level: int = 0) -> dict:
    t0 = time.perf_counter()
    out = optimize(lower(c), optimization_level)
    elapsed = time.perf_counter() - t0
    m = qc.metrics(out)
    return {"lowered_gate_count": m["gate_count"], "lowered_depth": m["depth"], "compile_wall_time": elapsed}
