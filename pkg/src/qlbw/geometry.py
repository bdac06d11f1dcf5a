"""Classical preprocessing of obstacle geometry for the reflection circuits.

Everything here is plain boolean bookkeeping done before any circuit exists:
wall segments per face, and the near-corner points whose per-dimension
inversion flags tell the reflection circuits which direction qubits identify a
population that was just pushed back out of an obstacle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from qlbw.lattice import Block, LatticeSpec


@dataclass(frozen=True)
class NearCornerPoint:
    """A lattice point next to a cuboid corner.

    ``bound[k]`` is True when the point sits at the upper bound of the block
    along k, ``outside[k]`` is True when it lies outside the block extent along k.
    """

    bound: tuple[bool, ...]
    outside: tuple[bool, ...]
    grid_coords: tuple[int, ...] = ()


def inversion_vector(point: NearCornerPoint) -> tuple[bool, ...]:
    return tuple(b != o for b, o in zip(point.bound, point.outside))


def near_corner_coordinate(block: Block, dim: int, bound: bool, outside: bool) -> int:
    lo, hi = block.bounds[dim]
    if bound:
        return hi + 1 if outside else hi
    return lo - 1 if outside else lo


def corner_point(block: Block, bound, outside) -> NearCornerPoint:
    coords = tuple(near_corner_coordinate(block, k, b, o) for k, (b, o) in enumerate(zip(bound, outside)))
    return NearCornerPoint(tuple(bound), tuple(outside), coords)


@dataclass(frozen=True)
class WallSegment:
    """One face of a block.

    ``coordinate`` is the face's grid value along ``normal``; populations land on
    it when moving in the direction encoded by ``incident_dir`` (0 = positive).
    """

    normal: int
    upper: bool
    coordinate: int
    tangential: tuple[tuple[int, int], ...]
    incident_dir: int

    def covers(self, position) -> bool:
        if position[self.normal] != self.coordinate:
            return False
        others = [p for k, p in enumerate(position) if k != self.normal]
        return all(lo <= p <= hi for p, (lo, hi) in zip(others, self.tangential))


@dataclass(frozen=True)
class BlockReflection:
    block: Block
    walls: tuple[WallSegment, ...]
    near_corners: tuple[NearCornerPoint, ...]
    edges: tuple[tuple[tuple[int, bool], tuple[int, bool]], ...]
    corners: tuple[tuple[int, ...], ...]

    def boundary_tokens(self, dim: int) -> list[tuple[int, bool]]:
        """Distinct ``(coordinate, inversion flag)`` pairs seen along ``dim``."""
        return sorted({(p.grid_coords[dim], inversion_vector(p)[dim]) for p in self.near_corners})


@dataclass(frozen=True)
class ReflectionData:
    blocks: tuple[BlockReflection, ...] = ()

    def __len__(self):
        return len(self.blocks)

    def for_block(self, block: Block) -> BlockReflection:
        for br in self.blocks:
            if br.block == block:
                return br
        raise KeyError(block)


def block_reflection(block: Block) -> BlockReflection:
    d = block.num_dims
    walls = []
    for k in range(d):
        lo, hi = block.bounds[k]
        tangential = tuple(block.bounds[j] for j in range(d) if j != k)
        walls.append(WallSegment(k, False, lo, tangential, incident_dir=0))
        walls.append(WallSegment(k, True, hi, tangential, incident_dir=1))

    # full (bound, outside) product minus the solid corner cell and the diagonal cell
    points = []
    for bound in itertools.product((False, True), repeat=d):
        for outside in itertools.product((False, True), repeat=d):
            if any(outside) and not all(outside):
                points.append(corner_point(block, bound, outside))

    edges = []
    if d == 3:
        for j, k in itertools.combinations(range(d), 2):
            for bj, bk in itertools.product((False, True), repeat=2):
                edges.append(((j, bj), (k, bk)))

    corners = tuple(
        tuple(block.bounds[k][1] if b else block.bounds[k][0] for k, b in enumerate(bound))
        for bound in itertools.product((False, True), repeat=d)
    )
    return BlockReflection(block, tuple(walls), tuple(points), tuple(edges), corners)


def reflection_data(spec: LatticeSpec) -> ReflectionData:
    return ReflectionData(tuple(block_reflection(b) for b in spec.blocks))
