import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import B, S, lattice
from qlbw import circuit as qc
from qlbw.bench import bench_lattice
from qlbw.circuit import Circuit, GateKind, metrics, qft
from qlbw.components import controlled_incrementer, cqlbm_step, grid_measurement, initial_conditions, streaming_operator
from qlbw.errors import InsufficientScratchError
from qlbw.lattice import register_layout
from qlbw.lowering import compile_report, is_lowered, lower, optimize, u_angles
from qlbw.runner import SimulationConfig, run
from qlbw.simulator import phase_aligned_distance, u_matrix, unitary
from test_circuit import random_circuit


def same_up_to_phase(a, b, tol=1e-8):
    return phase_aligned_distance(unitary(a), unitary(b)) < tol


def test_x_lowering():
    assert lower(Circuit(1, [qc.x(0)])).gates == [qc.u(math.pi, 0, math.pi, 0)]


def test_controlled_phase_lowering():
    c = Circuit(2, [qc.phase(math.pi / 2, 1, [0])])
    low = lower(c)
    assert [g.kind for g in low.gates].count(GateKind.CX) == 2
    assert [g.kind for g in low.gates].count(GateKind.U) == 3
    assert same_up_to_phase(c, low, 1e-9)


@pytest.mark.parametrize("m", range(1, 8))
def test_multicontrolled_x_and_phase(m):
    n = m + 2
    pol = [bool(i % 2) for i in range(m)]
    for g in (qc.mcx(range(m), m, pol), qc.phase(0.7, m, range(m), pol)):
        c = Circuit(n, [g])
        low = lower(c)
        assert is_lowered(low)
        assert same_up_to_phase(c, low)


def test_insufficient_scratch():
    with pytest.raises(InsufficientScratchError):
        lower(Circuit(6, [qc.mcx(range(5), 5)]))


@pytest.mark.parametrize("seed", range(20))
def test_random_components_sound(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 11))
    c = random_circuit(rng, n, 12, max_controls=max(0, n - 2))
    out = optimize(lower(c))
    assert is_lowered(out)
    assert same_up_to_phase(c, out)


def test_qtm_components_sound():
    spec = lattice((4, 4), 2)
    rmap = register_layout(spec)
    for comp in (controlled_incrementer(spec, rmap, 0), streaming_operator(spec, rmap, {1})):
        assert same_up_to_phase(comp, optimize(lower(comp)))


def test_smallest_step_lowered_counts_agree():
    spec = lattice((2, 2), 2)
    rmap = register_layout(spec)
    step = cqlbm_step(spec, rmap)
    low = optimize(lower(step))
    assert same_up_to_phase(step, low)
    cfg = lambda s: SimulationConfig(initial_conditions(spec, rmap), s, grid_measurement(rmap), exact=True)
    a, b = run(cfg(step), 3), run(cfg(low), 3)
    for ca, cb in zip(a.counts, b.counts):
        assert max(abs(ca.data.get(k, 0) - cb.data.get(k, 0)) for k in set(ca.data) | set(cb.data)) < 1e-8


def test_cx_pair_cancels():
    assert optimize(Circuit(2, [qc.cx(0, 1), qc.cx(0, 1)])).gates == []
    assert len(optimize(Circuit(2, [qc.cx(0, 1), qc.cx(1, 0)])).gates) == 2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-7, 7), min_size=6, max_size=6))
def test_u_merge(angles):
    a, b = qc.u(*angles[:3], 0), qc.u(*angles[3:], 0)
    out = optimize(Circuit(1, [a, b]))
    assert len(out.gates) <= 1
    product = u_matrix(*angles[3:]) @ u_matrix(*angles[:3])
    got = unitary(out)
    assert phase_aligned_distance(product, got) < 1e-10


def test_u_angles_edge_cases():
    for m in (np.eye(2), np.array([[0, 1], [1, 0]]), np.diag([1, 1j]), np.array([[0, -1j], [1j, 0]])):
        assert phase_aligned_distance(m.astype(complex), u_matrix(*u_angles(m.astype(complex)))) < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_optimize_random_lowered(seed):
    rng = np.random.default_rng(100 + seed)
    low = lower(random_circuit(rng, 6, 25, max_controls=4))
    opt = optimize(low)
    assert len(opt) <= len(low)
    assert same_up_to_phase(low, opt)
    assert optimize(opt) == opt
    assert optimize(low, 0) == low


def test_compile_report():
    r = compile_report(Circuit(3))
    assert (r["lowered_gate_count"], r["lowered_depth"]) == (0, 0)
    r = compile_report(qft(3))
    # 3 H -> 3 U, 3 CP -> 6 CX + 9 U, 1 SWAP -> 3 CX
    assert r["lowered_gate_count"] == 21
    assert r["compile_wall_time"] >= 0


def test_measure_passes_through():
    c = Circuit(2, [qc.h(0), qc.measure(0), qc.measure(1)])
    assert [g.kind for g in lower(c).gates] == [GateKind.U, GateKind.MEASURE, GateKind.MEASURE]


def test_basis_purity_on_benchmarks():
    for k in range(7):
        low = optimize(lower(cqlbm_step(bench_lattice(16, k))))
        assert is_lowered(low)
