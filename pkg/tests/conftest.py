import json
from pathlib import Path

import pytest

from qlbw.lattice import Block, BoundaryKind, LatticeSpec, parse_lattice

ROOT = Path(__file__).resolve().parents[1]
MIXED_16 = ROOT / "lattices" / "mixed_16x16.json"

S, B = BoundaryKind.SPECULAR, BoundaryKind.BOUNCEBACK


def lattice(dims, vel, *blocks):
    return LatticeSpec(tuple(dims), (vel,) * len(dims), tuple(Block(tuple(b), k) for b, k in blocks))


@pytest.fixture
def mixed16():
    return parse_lattice(MIXED_16.read_bytes())


@pytest.fixture
def mixed16_text():
    return MIXED_16.read_text()


def lattice_json(dims, vel, geometry=()):
    axes = "xyz"[: len(dims)]
    return json.dumps({
        "lattice": {"dim": dict(zip(axes, dims)), "velocities": {a: vel for a in axes}},
        "geometry": list(geometry),
    })
