"""Primitives, operators and the end-to-end collisionless transport algorithm.

Encoding per dimension k: ``g_k`` holds the grid coordinate, ``v_k`` the speed
(value m means speed m + 1) and ``v_dir_k`` the sign (0 = positive). One time
step is split into ``max_magnitude`` substeps; in each, the populations whose
speed is scheduled are marked on ``av``, streamed by one cell, reflected off
obstacles, and the marks are cleared.

Reflection works on post-streaming positions. Obstacle membership is computed
onto ``ao`` with scratch flags on ``ac``, the affected direction qubits are
flipped, the population is streamed back out, and ``ao`` is cleared again from
the new position and velocity alone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from qlbw import circuit as qc
from qlbw.circuit import Circuit, ComponentKind
from qlbw.errors import (
    ConstantOutOfRangeError,
    InvalidDimensionError,
    PositionInsideObstacleError,
)
from qlbw.geometry import BlockReflection, ReflectionData, reflection_data
from qlbw.lattice import Block, BoundaryKind, LatticeSpec, RegisterMap, register_layout


def _component(rmap: RegisterMap, gates, name: str, kind: ComponentKind) -> Circuit:
    return Circuit(rmap.total_qubits, list(gates), name, rmap, kind)


# ---------------------------------------------------------------- schedule


@dataclass(frozen=True)
class SubstepSchedule:
    max_magnitude: int
    substeps: tuple[frozenset[int], ...]

    def activations(self, magnitude: int) -> int:
        return sum(magnitude in s for s in self.substeps)


def substep_schedule(max_magnitude: int) -> SubstepSchedule:
    """Evenly spaced activations: speed q moves at substep t iff floor(tq/Q) > floor((t-1)q/Q)."""
    if max_magnitude < 1:
        raise ValueError("max magnitude must be >= 1")
    Q = max_magnitude
    steps = []
    for t in range(1, Q + 1):
        steps.append(frozenset(q for q in range(1, Q + 1) if (t * q) // Q > ((t - 1) * q) // Q))
    return SubstepSchedule(Q, tuple(steps))


# ---------------------------------------------------------------- primitives


def fourier_increment_gates(qubits, controls=(), polarity=None, direction_qubit=None) -> list[qc.Gate]:
    """Add +-1 (mod 2^n) to the register on the controlled subspace.

    Without ``direction_qubit`` the shift is +1. With it, the shift is +1 when
    the direction qubit reads 0 and -1 when it reads 1.
    """
    qubits = list(qubits)
    controls = tuple(controls)
    polarity = tuple(polarity) if polarity is not None else (True,) * len(controls)
    n = len(qubits)
    gates = qc.qft_gates(qubits)
    for j, q in enumerate(qubits):
        theta = 2 * math.pi * 2**j / 2**n
        if direction_qubit is None:
            gates.append(qc.phase(theta, q, controls, polarity))
        else:
            gates.append(qc.phase(theta, q, controls + (direction_qubit,), polarity + (False,)))
    if direction_qubit is not None:
        for j, q in enumerate(qubits):
            theta = 2 * math.pi * 2**j / 2**n
            gates.append(qc.phase(-theta, q, controls + (direction_qubit,), polarity + (True,)))
    gates.extend(g.adjoint() for g in reversed(qc.qft_gates(qubits)))
    return gates


class Reflection(enum.Enum):
    NONE = None
    BOUNCEBACK = "bounceback"
    SPECULAR = "specular"


def controlled_incrementer(lattice: LatticeSpec, rmap: RegisterMap, dim: int, reflection=None) -> Circuit:
    """Move populations one cell along their direction in dimension ``dim``.

    ``reflection=None`` moves populations marked on ``av[dim]`` (streaming);
    ``"bounceback"`` moves those flagged on ``ao[0]`` that streamed in ``dim``;
    ``"specular"`` moves those flagged on ``ao[dim]``.
    """
    if not 0 <= dim < lattice.num_dims:
        raise InvalidDimensionError(f"dimension {dim} out of range for a {lattice.num_dims}D lattice")
    mode = Reflection(reflection)
    if mode is Reflection.NONE:
        controls = (rmap.anc_vel(dim),)
    elif mode is Reflection.BOUNCEBACK:
        controls = (rmap.anc_obstacle(0), rmap.anc_vel(dim))
    else:
        controls = (rmap.anc_obstacle(dim),)
    gates = fourier_increment_gates(rmap.grid(dim), controls, direction_qubit=rmap.vel_dir(dim))
    return _component(rmap, gates, f"incrementer_{dim}_{mode.value}", ComponentKind.PRIMITIVE)


def interval_cubes(lo: int, hi: int, n: int) -> list[tuple[int, int]]:
    """Cover [lo, hi] by disjoint aligned blocks; returns (prefix value, free low bits)."""
    cubes = []
    v = lo
    while v <= hi:
        m = 0
        while m < n and v % 2 ** (m + 1) == 0 and v + 2 ** (m + 1) - 1 <= hi:
            m += 1
        cubes.append((v >> m, m))
        v += 2**m
    return cubes


def range_check_gates(qubits, lo: int, hi: int, out: int, controls=(), polarity=None) -> list[qc.Gate]:
    """Flip ``out`` on basis states where the register value lies in [lo, hi]."""
    qubits = list(qubits)
    n = len(qubits)
    if not (0 <= lo < 2**n and 0 <= hi < 2**n):
        raise ConstantOutOfRangeError(f"[{lo}, {hi}] outside a {n}-qubit register")
    controls = tuple(controls)
    polarity = tuple(polarity) if polarity is not None else (True,) * len(controls)
    gates = []
    for prefix, free in interval_cubes(lo, hi, n):
        bits = qubits[free:]
        pol = tuple(bool((prefix >> i) & 1) for i in range(len(bits)))
        gates.append(qc.mcx(controls + tuple(bits), out, polarity + pol))
    return gates


class Compare(enum.Enum):
    EQ = "eq"
    GEQ = "geq"
    LEQ = "leq"
    IN_RANGE = "in_range"


def comparator(rmap: RegisterMap, dim: int, constant, mode="eq", out: int | None = None,
               controls=(), polarity=None) -> Circuit:
    """Flip ``out`` where ``g_dim`` satisfies the predicate.

    ``constant`` is an int, or ``(lo, hi)`` for ``in_range``. The predicate is
    split into disjoint prefix patterns, so no scratch qubit is left dirty.
    """
    mode = Compare(mode)
    qubits = rmap.grid(dim)
    top = 2 ** len(qubits) - 1
    if mode is Compare.IN_RANGE:
        lo, hi = constant
    else:
        if not 0 <= constant <= top:
            raise ConstantOutOfRangeError(f"constant {constant} outside [0, {top}]")
        lo, hi = {Compare.EQ: (constant, constant), Compare.GEQ: (constant, top), Compare.LEQ: (0, constant)}[mode]
    if out is None:
        out = rmap.anc_comparator(0)
    gates = range_check_gates(qubits, lo, hi, out, controls, polarity)
    return _component(rmap, gates, f"comparator_{dim}_{mode.value}", ComponentKind.PRIMITIVE)


def eq_gates(qubits, value: int, out: int, controls=(), polarity=()) -> list[qc.Gate]:
    return range_check_gates(qubits, value, value, out, controls, polarity)


# ---------------------------------------------------------------- streaming


def velocity_marking_gates(lattice: LatticeSpec, rmap: RegisterMap, magnitudes, dim: int) -> list[qc.Gate]:
    """Toggle ``av[dim]`` for populations whose speed along ``dim`` is in ``magnitudes``."""
    Q = lattice.max_magnitude
    mags = sorted(set(magnitudes))
    if any(not 1 <= m <= Q for m in mags):
        raise ValueError(f"magnitudes {mags} outside 1..{Q}")
    if len(mags) == Q:
        return [qc.x(rmap.anc_vel(dim))]
    bits = rmap.vel_mag(dim)
    gates = []
    for m in mags:
        value = m - 1
        gates.append(qc.mcx(bits, rmap.anc_vel(dim), [bool((value >> i) & 1) for i in range(len(bits))]))
    return gates


def streaming_operator(lattice: LatticeSpec, rmap: RegisterMap, magnitudes) -> Circuit:
    """Mark the scheduled populations and stream them; the marks stay set for reflection."""
    gates = []
    if magnitudes:
        for k in range(lattice.num_dims):
            gates += velocity_marking_gates(lattice, rmap, magnitudes, k)
            gates += controlled_incrementer(lattice, rmap, k).gates
    return _component(rmap, gates, "streaming", ComponentKind.OPERATOR)


def streaming_ancilla_preparation(lattice: LatticeSpec, rmap: RegisterMap, magnitudes, dim: int) -> Circuit:
    gates = velocity_marking_gates(lattice, rmap, magnitudes, dim) if magnitudes else []
    return _component(rmap, gates, f"streaming_ancilla_prep_{dim}", ComponentKind.OPERATOR)


# ---------------------------------------------------------------- reflection


def _in_block_flags(rmap: RegisterMap, block: Block, skip=None) -> list[qc.Gate]:
    """ac[j] ^= [g_j inside the block extent], for every j != skip."""
    gates = []
    for j, (lo, hi) in enumerate(block.bounds):
        if j != skip:
            gates += range_check_gates(rmap.grid(j), lo, hi, rmap.anc_comparator(j))
    return gates


def _returned_flags(rmap: RegisterMap, br: BlockReflection) -> list[qc.Gate]:
    """ac[j] ^= "consistent with having been pushed out of this block" along j.

    Along j the population is either inside the extent and did not enter through
    a j-face, or sits right outside a j-face moving away after having streamed.
    Both cases differ from the plain extent check only at the near-corner
    coordinates, where the inversion flag names the direction value that
    identifies a step across the j-boundary.
    """
    gates = _in_block_flags(rmap, br.block)
    for j in range(br.block.num_dims):
        for coord, inv in br.boundary_tokens(j):
            gates += eq_gates(
                rmap.grid(j), coord, rmap.anc_comparator(j),
                (rmap.anc_vel(j), rmap.vel_dir(j)), (True, inv),
            )
    return gates


def _specular_block_gates(lattice: LatticeSpec, rmap: RegisterMap, br: BlockReflection) -> list[qc.Gate]:
    d = lattice.num_dims
    block = br.block
    gates = []

    # detect: ao[k] = inside the block and entered through a k-face this substep
    flags = _in_block_flags(rmap, block)
    gates += flags
    for wall in br.walls:
        k = wall.normal
        others = tuple(rmap.anc_comparator(j) for j in range(d) if j != k)
        gates += eq_gates(
            rmap.grid(k), wall.coordinate, rmap.anc_obstacle(k),
            others + (rmap.anc_vel(k), rmap.vel_dir(k)), (True,) * len(others) + (True, bool(wall.incident_dir)),
        )
    gates += flags

    # reverse the normal components, then step back out along them
    for k in range(d):
        gates.append(qc.cx(rmap.anc_obstacle(k), rmap.vel_dir(k)))
    for k in range(d):
        gates += controlled_incrementer(lattice, rmap, k, "specular").gates

    # clear ao[k] from the post-reflection state
    returned = _returned_flags(rmap, br)
    gates += returned
    for k in range(d):
        others = tuple(rmap.anc_comparator(j) for j in range(d) if j != k)
        for coord, inv in br.boundary_tokens(k):
            lo, hi = block.bounds[k]
            if lo <= coord <= hi:
                continue
            gates += eq_gates(
                rmap.grid(k), coord, rmap.anc_obstacle(k),
                others + (rmap.anc_vel(k), rmap.vel_dir(k)), (True,) * len(others) + (True, inv),
            )
    gates += returned
    return gates


def specular_reflection_operator(lattice: LatticeSpec, rmap: RegisterMap, blocks=None,
                                 refl: ReflectionData | None = None) -> Circuit:
    if blocks is None:
        blocks = lattice.blocks_of(BoundaryKind.SPECULAR)
    refl = refl if refl is not None else reflection_data(lattice)
    gates = []
    for block in blocks:
        if block.boundary is not BoundaryKind.SPECULAR:
            raise ValueError("specular operator received a non-specular block")
        gates += _specular_block_gates(lattice, rmap, refl.for_block(block))
    return _component(rmap, gates, "specular_reflection", ComponentKind.OPERATOR)


def _bounceback_block_gates(lattice: LatticeSpec, rmap: RegisterMap, block: Block) -> list[qc.Gate]:
    d = lattice.num_dims
    ao = rmap.anc_obstacle(0)
    ac = tuple(rmap.anc_comparator(j) for j in range(d))
    gates = []

    flags = _in_block_flags(rmap, block)
    gates += flags + [qc.mcx(ac, ao)] + flags

    for k in range(d):
        gates.append(qc.cx(ao, rmap.vel_dir(k)))
    for k in range(d):
        gates += controlled_incrementer(lattice, rmap, k, "bounceback").gates

    # after the step back, position - step(current velocity) is inside the block
    undo = []
    for j, (lo, hi) in enumerate(block.bounds):
        g, av, vd, out = rmap.grid(j), rmap.anc_vel(j), rmap.vel_dir(j), rmap.anc_comparator(j)
        undo += range_check_gates(g, lo, hi, out, (av,), (False,))
        undo += range_check_gates(g, lo + 1, hi + 1, out, (av, vd), (True, False))
        undo += range_check_gates(g, lo - 1, hi - 1, out, (av, vd), (True, True))
    gates += undo + [qc.mcx(ac, ao)] + undo
    return gates


def bounceback_reflection_operator(lattice: LatticeSpec, rmap: RegisterMap, blocks=None,
                                   refl: ReflectionData | None = None) -> Circuit:
    if blocks is None:
        blocks = lattice.blocks_of(BoundaryKind.BOUNCEBACK)
    gates = []
    for block in blocks:
        if block.boundary is not BoundaryKind.BOUNCEBACK:
            raise ValueError("bounce-back operator received a non-bounce-back block")
        gates += _bounceback_block_gates(lattice, rmap, block)
    return _component(rmap, gates, "bounceback_reflection", ComponentKind.OPERATOR)


# ---------------------------------------------------------------- algorithm


def cqlbm_step(lattice: LatticeSpec, rmap: RegisterMap | None = None, refl: ReflectionData | None = None) -> Circuit:
    """One full time step of the collisionless transport method."""
    rmap = rmap or register_layout(lattice)
    refl = refl if refl is not None else reflection_data(lattice)
    specular = lattice.blocks_of(BoundaryKind.SPECULAR)
    bounceback = lattice.blocks_of(BoundaryKind.BOUNCEBACK)
    out = Circuit(rmap.total_qubits, [], "cqlbm", rmap, ComponentKind.ALGORITHM)
    for mags in substep_schedule(lattice.max_magnitude).substeps:
        out.extend(streaming_operator(lattice, rmap, mags).gates)
        out.extend(specular_reflection_operator(lattice, rmap, specular, refl).gates)
        out.extend(bounceback_reflection_operator(lattice, rmap, bounceback, refl).gates)
        for k in range(lattice.num_dims):
            out.extend(streaming_ancilla_preparation(lattice, rmap, mags, k).gates)
    return out


# ---------------------------------------------------------------- initial conditions / measurement


@dataclass(frozen=True)
class PointSource:
    position: tuple[int, ...]
    velocity: tuple[int, ...]  # signed speed per dimension, |v| in 1..Q


@dataclass(frozen=True)
class LeftHalfUniform:
    pass


def basis_index(rmap: RegisterMap, position, velocity) -> int:
    """Basis-state index encoding a single particle (all ancillae |0>)."""
    idx = 0
    for k, (p, v) in enumerate(zip(position, velocity)):
        for i, q in enumerate(rmap.grid(k)):
            idx |= ((p >> i) & 1) << q
        for i, q in enumerate(rmap.vel_mag(k)):
            idx |= (((abs(v) - 1) >> i) & 1) << q
        idx |= int(v < 0) << rmap.vel_dir(k)
    return idx


def initial_conditions(lattice: LatticeSpec, rmap: RegisterMap, kind=LeftHalfUniform()) -> Circuit:
    gates = []
    if isinstance(kind, PointSource):
        pos, vel = kind.position, kind.velocity
        if len(pos) != lattice.num_dims or len(vel) != lattice.num_dims:
            raise InvalidDimensionError("point source dimensionality does not match the lattice")
        if any(not 0 <= p < n for p, n in zip(pos, lattice.dims)):
            raise ValueError(f"position {pos} outside the grid")
        if any(not 1 <= abs(v) <= lattice.max_magnitude for v in vel):
            raise ValueError(f"velocity {vel} outside 1..{lattice.max_magnitude}")
        if lattice.in_obstacle(pos):
            raise PositionInsideObstacleError(f"position {pos} lies inside an obstacle")
        idx = basis_index(rmap, pos, vel)
        gates = [qc.x(q) for q in range(rmap.total_qubits) if (idx >> q) & 1]
        name = "point_source"
    else:
        half = lattice.dims[0] // 2
        if any(b.bounds[0][0] < half for b in lattice.blocks):
            raise PositionInsideObstacleError("left-half initial condition overlaps an obstacle")
        for k in range(lattice.num_dims):
            grid = rmap.grid(k)
            gates += [qc.h(q) for q in (grid[:-1] if k == 0 else grid)]
            gates += [qc.h(q) for q in rmap.vel_mag(k)]
        name = "left_half_uniform"
    return _component(rmap, gates, name, ComponentKind.PRIMITIVE)


def grid_measurement(rmap: RegisterMap) -> Circuit:
    gates = [qc.measure(q) for q in rmap.all_grid_qubits()]
    return _component(rmap, gates, "grid_measurement", ComponentKind.PRIMITIVE)


def empty_primitive(rmap: RegisterMap) -> Circuit:
    return _component(rmap, [], "empty", ComponentKind.PRIMITIVE)
