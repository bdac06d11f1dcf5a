"""Lattice configuration: JSON parsing, validation and the adaptive qubit layout.

The JSON format nests the grid under ``lattice.dim`` and the number of discrete
velocities under ``lattice.velocities``, keyed by axis name. Obstacles live in
``geometry`` as inclusive per-axis intervals plus a boundary kind::

    {
      "lattice": {"dim": {"x": 16, "y": 16}, "velocities": {"x": 4, "y": 4}},
      "geometry": [{"x": [9, 12], "y": [3, 6], "boundary": "specular"}]
    }
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from qlbw.errors import (
    BoundsOutOfRangeError,
    LatticeError,
    MalformedJsonError,
    NonPowerOfTwoExtentError,
    SeparationViolationError,
    UnknownBoundaryKindError,
)

AXES = ("x", "y", "z")

# empty grid points required between two obstacles, in at least one dimension
MIN_SEPARATION = 2


class BoundaryKind(enum.Enum):
    SPECULAR = "specular"
    BOUNCEBACK = "bounceback"


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class Block:
    """Axis-aligned cuboid obstacle; ``bounds[k]`` is the inclusive ``(lo, hi)`` of axis k."""

    bounds: tuple[tuple[int, int], ...]
    boundary: BoundaryKind

    @property
    def num_dims(self) -> int:
        return len(self.bounds)

    def contains(self, position) -> bool:
        return all(lo <= p <= hi for p, (lo, hi) in zip(position, self.bounds))

    def gap(self, other: Block, dim: int) -> int:
        """Number of grid points strictly between the two blocks along ``dim`` (negative on overlap)."""
        (alo, ahi), (blo, bhi) = self.bounds[dim], other.bounds[dim]
        return max(blo - ahi, alo - bhi) - 1


@dataclass(frozen=True)
class LatticeSpec:
    dims: tuple[int, ...]
    velocities: tuple[int, ...]
    blocks: tuple[Block, ...] = ()

    def __post_init__(self):
        validate(self)

    @property
    def num_dims(self) -> int:
        return len(self.dims)

    @property
    def max_magnitude(self) -> int:
        return self.velocities[0] // 2

    def blocks_of(self, kind: BoundaryKind) -> tuple[Block, ...]:
        return tuple(b for b in self.blocks if b.boundary is kind)

    def with_blocks(self, blocks) -> LatticeSpec:
        return LatticeSpec(self.dims, self.velocities, tuple(blocks))

    def in_obstacle(self, position) -> bool:
        return any(b.contains(position) for b in self.blocks)


def validate(spec: LatticeSpec) -> None:
    d = len(spec.dims)
    if d not in (2, 3):
        raise LatticeError(f"lattice must have 2 or 3 dimensions, got {d}")
    if len(spec.velocities) != d:
        raise LatticeError(f"expected {d} velocity entries, got {len(spec.velocities)}")
    for k, n in enumerate(spec.dims):
        if not isinstance(n, int) or not _is_pow2(n) or n < 2:
            raise NonPowerOfTwoExtentError(f"lattice.dim.{AXES[k]}: extent {n!r} is not a power of two >= 2")
    for k, v in enumerate(spec.velocities):
        if not isinstance(v, int) or not _is_pow2(v) or v < 2:
            raise LatticeError(f"lattice.velocities.{AXES[k]}: {v!r} is not a power of two >= 2")
    if len(set(spec.velocities)) != 1:
        raise LatticeError(f"lattice.velocities: all axes must match, got {list(spec.velocities)}")

    for i, block in enumerate(spec.blocks):
        if block.num_dims != d:
            raise BoundsOutOfRangeError(f"geometry[{i}]: expected {d} intervals, got {block.num_dims}")
        for k, (lo, hi) in enumerate(block.bounds):
            where = f"geometry[{i}].{AXES[k]}"
            if lo > hi:
                raise BoundsOutOfRangeError(f"{where}: inverted interval [{lo}, {hi}]")
            if lo < 0 or hi >= spec.dims[k]:
                raise BoundsOutOfRangeError(f"{where}: [{lo}, {hi}] outside grid [0, {spec.dims[k] - 1}]")
            # wrapping through an obstacle across the periodic edge is undefined
            if lo < 1 or hi > spec.dims[k] - 2:
                raise BoundsOutOfRangeError(f"{where}: [{lo}, {hi}] touches the domain edge")

    for i in range(len(spec.blocks)):
        for j in range(i + 1, len(spec.blocks)):
            a, b = spec.blocks[i], spec.blocks[j]
            if not any(a.gap(b, k) >= MIN_SEPARATION for k in range(d)):
                raise SeparationViolationError(
                    f"geometry[{i}] and geometry[{j}] are closer than {MIN_SEPARATION} grid points in every dimension"
                )


def _field(obj, key, where):
    if not isinstance(obj, dict):
        raise MalformedJsonError(f"{where}: expected an object")
    if key not in obj:
        raise MalformedJsonError(f"{where}: missing key {key!r}")
    return obj[key]


def _int(value, where) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedJsonError(f"{where}: expected an integer, got {value!r}")
    return value


def parse_lattice(text: str | bytes) -> LatticeSpec:
    """Parse and validate a lattice configuration."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedJsonError(f"input is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJsonError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc

    lattice = _field(doc, "lattice", "<root>")
    dim = _field(lattice, "dim", "lattice")
    vel = _field(lattice, "velocities", "lattice")
    if not isinstance(dim, dict) or not isinstance(vel, dict):
        raise MalformedJsonError("lattice.dim and lattice.velocities must be objects")
    axes = [a for a in AXES if a in dim]
    if axes != list(AXES[: len(dim)]) or len(axes) not in (2, 3):
        raise MalformedJsonError(f"lattice.dim: expected keys x, y[, z], got {sorted(dim)}")
    if sorted(vel) != sorted(axes):
        raise MalformedJsonError(f"lattice.velocities: keys {sorted(vel)} do not match lattice.dim")
    dims = tuple(_int(dim[a], f"lattice.dim.{a}") for a in axes)
    velocities = tuple(_int(vel[a], f"lattice.velocities.{a}") for a in axes)

    geometry = doc.get("geometry", [])
    if not isinstance(geometry, list):
        raise MalformedJsonError("geometry: expected a list")
    blocks = []
    for i, entry in enumerate(geometry):
        where = f"geometry[{i}]"
        bounds = []
        for a in axes:
            iv = _field(entry, a, where)
            if not isinstance(iv, list) or len(iv) != 2:
                raise MalformedJsonError(f"{where}.{a}: expected [lo, hi]")
            bounds.append((_int(iv[0], f"{where}.{a}[0]"), _int(iv[1], f"{where}.{a}[1]")))
        extra = set(entry) - set(axes) - {"boundary"}
        if extra:
            raise MalformedJsonError(f"{where}: unexpected keys {sorted(extra)}")
        kind = _field(entry, "boundary", where)
        try:
            boundary = BoundaryKind(kind)
        except ValueError:
            raise UnknownBoundaryKindError(f"{where}.boundary: unknown kind {kind!r}") from None
        blocks.append(Block(tuple(bounds), boundary))

    return LatticeSpec(dims, velocities, tuple(blocks))


def load_lattice(path) -> LatticeSpec:
    with open(path, "rb") as fh:
        return parse_lattice(fh.read())


def lattice_to_dict(spec: LatticeSpec) -> dict:
    axes = AXES[: spec.num_dims]
    return {
        "lattice": {
            "dim": {a: n for a, n in zip(axes, spec.dims)},
            "velocities": {a: v for a, v in zip(axes, spec.velocities)},
        },
        "geometry": [
            {**{a: [lo, hi] for a, (lo, hi) in zip(axes, b.bounds)}, "boundary": b.boundary.value}
            for b in spec.blocks
        ],
    }


def serialize_lattice(spec: LatticeSpec) -> str:
    return json.dumps(lattice_to_dict(spec), indent=2) + "\n"


@dataclass(frozen=True)
class RegisterMap:
    """Named, contiguous qubit ranges.

    Qubit ``i`` is bit ``i`` of a basis-state index. Registers are laid out in
    the order ``av, ao, ac, g_*, v_*, v_dir_*``.
    """

    num_dims: int
    registers: tuple[tuple[str, int, int], ...]  # (name, start, width)
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self._index.update({name: (start, width) for name, start, width in self.registers})

    @property
    def total_qubits(self) -> int:
        return sum(w for _, _, w in self.registers)

    def qubits(self, name: str) -> list[int]:
        start, width = self._index[name]
        return list(range(start, start + width))

    def width(self, name: str) -> int:
        return self._index[name][1]

    def grid(self, dim: int) -> list[int]:
        return self.qubits(f"g_{AXES[dim]}")

    def vel_mag(self, dim: int) -> list[int]:
        return self.qubits(f"v_{AXES[dim]}")

    def vel_dir(self, dim: int) -> int:
        return self.qubits(f"v_dir_{AXES[dim]}")[0]

    def anc_vel(self, dim: int) -> int:
        return self.qubits("av")[dim]

    def anc_obstacle(self, i: int = 0) -> int:
        return self.qubits("ao")[i]

    def anc_comparator(self, i: int) -> int:
        return self.qubits("ac")[i]

    def all_grid_qubits(self) -> list[int]:
        return [q for k in range(self.num_dims) for q in self.grid(k)]


def register_layout(spec: LatticeSpec) -> RegisterMap:
    d = spec.num_dims
    only_bounceback = all(b.boundary is BoundaryKind.BOUNCEBACK for b in spec.blocks)
    widths = [("av", d), ("ao", 1 if only_bounceback else d), ("ac", d * (d - 1))]
    widths += [(f"g_{AXES[k]}", spec.dims[k].bit_length() - 1) for k in range(d)]
    widths += [(f"v_{AXES[k]}", spec.velocities[k].bit_length() - 2) for k in range(d)]
    widths += [(f"v_dir_{AXES[k]}", 1) for k in range(d)]
    registers, start = [], 0
    for name, w in widths:
        registers.append((name, start, w))
        start += w
    return RegisterMap(d, tuple(registers))
