import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlbw import circuit as qc
from qlbw.circuit import Circuit, GateKind, compose, inverse, metrics, qft
from qlbw.errors import IndexOutOfRangeError, MeasureNotTerminalError, NonUnitaryGateError
from qlbw.simulator import phase_aligned_distance, unitary


def random_circuit(rng, n, m, max_controls=None):
    max_controls = n - 1 if max_controls is None else max_controls
    c = Circuit(n)
    for _ in range(m):
        qs = [int(q) for q in rng.permutation(n)]
        k = int(rng.integers(0, 7))
        nc = int(rng.integers(0, max_controls + 1))
        ctrl, pol = qs[1:1 + nc], [bool(b) for b in rng.integers(0, 2, nc)]
        th = float(rng.uniform(-math.pi, math.pi))
        if k == 0:
            c.append(qc.mcx(ctrl, qs[0], pol))
        elif k == 1:
            c.append(qc.phase(th, qs[0], ctrl, pol))
        elif k == 2:
            c.append(qc.h(qs[0]))
        elif k == 3:
            c.append(qc.u(th, 0.7 * th, 1.3 - th, qs[0]))
        elif k == 4 and n > 1:
            c.append(qc.swap(qs[0], qs[1]))
        elif k == 5 and n > 1:
            c.append(qc.cx(qs[1], qs[0]))
        else:
            c.append(qc.x(qs[0]))
    return c


def test_compose_identity_elements():
    c = random_circuit(np.random.default_rng(0), 3, 10)
    assert compose(qc.empty(3), c) == c
    assert compose(c, qc.empty(3)) == c


def test_compose_x_twice_is_identity():
    c = compose(Circuit(1, [qc.x(0)]), Circuit(1, [qc.x(0)]))
    assert np.allclose(unitary(c), np.eye(2))


def test_compose_mapping():
    a = Circuit(3)
    b = Circuit(2, [qc.cx(0, 1)])
    out = compose(a, b, [2, 0])
    assert out.gates == [qc.cx(2, 0)]
    with pytest.raises(IndexOutOfRangeError):
        compose(a, b, [2, 3])


def test_gate_validation():
    with pytest.raises(IndexOutOfRangeError):
        Circuit(2, [qc.x(2)])
    with pytest.raises(IndexOutOfRangeError):
        qc.Gate(GateKind.CX, (0,), (0,))
    with pytest.raises(ValueError):
        qc.phase(float("nan"), 0)


def test_measure_must_be_terminal():
    c = Circuit(2, [qc.measure(0), qc.measure(1)])
    with pytest.raises(MeasureNotTerminalError):
        c.append(qc.x(0))
    with pytest.raises(NonUnitaryGateError):
        inverse(c)


def test_inverse_examples():
    assert inverse(Circuit(1, [qc.h(0)])).gates == [qc.h(0)]
    assert inverse(Circuit(1, [qc.phase(math.pi / 4, 0)])).gates == [qc.phase(-math.pi / 4, 0)]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_compose_with_inverse_is_identity(seed, n):
    c = random_circuit(np.random.default_rng(seed), n, 20)
    u = unitary(compose(c, inverse(c)))
    assert phase_aligned_distance(np.eye(2**n), u) < 1e-9


def test_qft_small_cases():
    assert qft(1).gates == [qc.h(0)]
    kinds = metrics(qft(2))["per_kind_counts"]
    assert kinds == {"H": 2, "CP": 1, "SWAP": 1}


def test_qft_matches_dft():
    n = 3
    N = 2**n
    j, k = np.meshgrid(range(N), range(N), indexing="ij")
    dft = np.exp(2j * np.pi * j * k / N) / math.sqrt(N)
    assert np.max(np.abs(unitary(qft(n)) - dft)) < 1e-12


@pytest.mark.parametrize("n", range(1, 7))
def test_qft_inverse(n):
    u = unitary(compose(qft(n), inverse(qft(n))))
    assert np.max(np.abs(u - np.eye(2**n))) < 1e-10


def test_metrics_examples():
    assert metrics(qc.empty(2)) == {"gate_count": 0, "depth": 0, "per_kind_counts": {}}
    m = metrics(Circuit(3, [qc.h(0), qc.h(1), qc.h(2)]))
    assert (m["gate_count"], m["depth"]) == (3, 1)
    assert metrics(Circuit(2, [qc.h(0), qc.cx(0, 1), qc.x(1)]))["depth"] == 3


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_metrics_compose_laws(seed):
    rng = np.random.default_rng(seed)
    a, b = random_circuit(rng, 4, 8), random_circuit(rng, 4, 8)
    ab = compose(a, b)
    assert metrics(ab)["gate_count"] == len(a) + len(b)
    assert metrics(ab)["depth"] <= metrics(a)["depth"] + metrics(b)["depth"]


def test_dump_format():
    c = Circuit(4, [qc.phase(0.5, 3, (0, 1), (True, False)), qc.u(1, 2, 3, 2), qc.measure(0)])
    assert c.dump() == "MCP(0.5) 3 | 0(1) 1(0)\nU(1,2,3) 2\nMEASURE 0\n"


def test_factories_degrade():
    assert qc.mcx([], 0).kind is GateKind.X
    assert qc.mcx([1], 0).kind is GateKind.CX
    assert qc.mcx([1], 0, [False]).kind is GateKind.MCX
    assert qc.phase(1.0, 0, [1]).kind is GateKind.CP


def test_u_adjoint():
    g = qc.u(0.3, 0.5, -1.1, 0)
    u = unitary(Circuit(1, [g, g.adjoint()]))
    assert np.allclose(u, np.eye(2))
