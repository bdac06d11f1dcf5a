"""Classical reference model of the collisionless transport step.

Each basis state of the quantum register is a single particle with a grid
position and a signed per-axis speed. The quantum step permutes basis states,
so propagating particles one by one and summing their weights gives the exact
grid density the circuits should produce.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

import numpy as np

from qlbw.components import substep_schedule
from qlbw.errors import UnresolvableReflectionError
from qlbw.lattice import BoundaryKind, LatticeSpec


@dataclass(frozen=True)
class Particle:
    position: tuple[int, ...]
    velocity: tuple[int, ...]  # signed speed per axis, nonzero


def _substep(lattice: LatticeSpec, p: Particle, mags) -> Particle:
    dims = lattice.dims
    d = lattice.num_dims
    pre = p.position
    vel = list(p.velocity)
    moved = [abs(v) in mags for v in vel]
    pos = [(x + (1 if v > 0 else -1)) % n if m else x for x, v, m, n in zip(pre, vel, moved, dims)]

    for block in lattice.blocks_of(BoundaryKind.SPECULAR):
        if not block.contains(pos):
            continue
        for k in range(d):
            lo, hi = block.bounds[k]
            if moved[k] and not lo <= pre[k] <= hi:
                vel[k] = -vel[k]
                pos[k] = (pos[k] + (1 if vel[k] > 0 else -1)) % dims[k]

    for block in lattice.blocks_of(BoundaryKind.BOUNCEBACK):
        if not block.contains(pos):
            continue
        vel = [-v for v in vel]
        for k in range(d):
            if moved[k]:
                pos[k] = (pos[k] + (1 if vel[k] > 0 else -1)) % dims[k]

    if lattice.in_obstacle(pos):
        raise UnresolvableReflectionError(f"particle from {pre} with velocity {p.velocity} ends inside an obstacle at {tuple(pos)}")
    return Particle(tuple(pos), tuple(vel))


def particle_step(lattice: LatticeSpec, particle: Particle) -> Particle:
    """Advance one particle by a full time step."""
    for mags in substep_schedule(lattice.max_magnitude).substeps:
        particle = _substep(lattice, particle, mags)
    return particle


@dataclass(frozen=True)
class OracleState:
    particles: tuple[Particle, ...] = ()

    def __len__(self):
        return len(self.particles)


def oracle_step(state: OracleState, lattice: LatticeSpec) -> OracleState:
    return OracleState(tuple(particle_step(lattice, p) for p in state.particles))


def oracle_density(state: OracleState) -> dict:
    """Histogram of particle positions."""
    return dict(Counter(p.position for p in state.particles))


def normalized_density(state: OracleState) -> dict:
    total = len(state.particles)
    return {pos: n / total for pos, n in oracle_density(state).items()} if total else {}


def all_velocities(lattice: LatticeSpec):
    Q = lattice.max_magnitude
    speeds = [s * m for m in range(1, Q + 1) for s in (1, -1)]
    return itertools.product(speeds, repeat=lattice.num_dims)


def left_half_state(lattice: LatticeSpec) -> OracleState:
    """One particle per (cell, speed) combination with x in the left half and positive directions."""
    Q = lattice.max_magnitude
    ranges = [range(lattice.dims[0] // 2)] + [range(n) for n in lattice.dims[1:]]
    speeds = list(itertools.product(range(1, Q + 1), repeat=lattice.num_dims))
    return OracleState(tuple(Particle(pos, v) for pos in itertools.product(*ranges) for v in speeds))


def density_array(density: dict, dims) -> np.ndarray:
    """Dense ``[x, y(, z)]`` array from a position map."""
    out = np.zeros(dims)
    for pos, v in density.items():
        out[tuple(pos)] += v
    return out
