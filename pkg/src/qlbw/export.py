"""File writers: legacy VTK density fields, ASCII STL obstacles and counts CSV."""

from __future__ import annotations

import csv
import io

import numpy as np

from qlbw.errors import PositionOutOfRangeError
from qlbw.lattice import AXES, Block


def export_vtk(density: dict, dims, title: str = "qlbw density") -> bytes:
    """Legacy ASCII structured points; x varies fastest, 2D grids get z = 1."""
    dims = tuple(dims)
    full = dims + (1,) * (3 - len(dims))
    field = np.zeros(full[::-1])  # indexed [z, y, x]
    for pos, value in density.items():
        pos = tuple(pos)
        if len(pos) != len(dims) or any(not 0 <= p < n for p, n in zip(pos, dims)):
            raise PositionOutOfRangeError(f"position {pos} outside grid {dims}")
        p3 = pos + (0,) * (3 - len(pos))
        field[p3[2], p3[1], p3[0]] += value
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS {} {} {}".format(*full),
        f"POINT_DATA {field.size}",
        "SCALARS density float 1",
        "LOOKUP_TABLE default",
    ]
    for z in range(full[2]):
        for y in range(full[1]):
            lines.append(" ".join(f"{v:.8g}" for v in field[z, y]))
    return ("\n".join(lines) + "\n").encode("ascii")


def _cuboid(block: Block):
    lo = [b[0] - 0.5 for b in block.bounds] + [-0.5] * (3 - block.num_dims)
    hi = [b[1] + 0.5 for b in block.bounds] + [0.5] * (3 - block.num_dims)
    for axis in range(3):
        for upper in (False, True):
            normal = [0.0, 0.0, 0.0]
            normal[axis] = 1.0 if upper else -1.0
            u, v = [a for a in range(3) if a != axis]
            corners = []
            for cu, cv in ((0, 0), (1, 0), (1, 1), (0, 1)):
                p = [0.0, 0.0, 0.0]
                p[axis] = hi[axis] if upper else lo[axis]
                p[u] = hi[u] if cu else lo[u]
                p[v] = hi[v] if cv else lo[v]
                corners.append(p)
            tris = [(corners[0], corners[1], corners[2]), (corners[0], corners[2], corners[3])]
            for a, b, c in tris:
                n = np.cross(np.subtract(b, a), np.subtract(c, a))
                if np.dot(n, normal) < 0:
                    b, c = c, b
                yield normal, (a, b, c)


def export_stl(blocks, name: str = "obstacles") -> bytes:
    """ASCII STL with 12 outward-facing triangles per cuboid (2D blocks get unit thickness in z)."""
    out = [f"solid {name}"]
    for block in blocks:
        for normal, tri in _cuboid(block):
            out.append("  facet normal {:g} {:g} {:g}".format(*normal))
            out.append("    outer loop")
            for p in tri:
                out.append("      vertex {:g} {:g} {:g}".format(*p))
            out.append("    endloop")
            out.append("  endfacet")
    out.append(f"endsolid {name}")
    return ("\n".join(out) + "\n").encode("ascii")


def counts_csv(series, num_dims: int) -> str:
    """``step,x,y[,z],count`` rows; ``series`` yields (step, Counts) with coordinate-tuple keys."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", *AXES[:num_dims], "count"])
    for step, counts in series:
        for pos in sorted(counts.data):
            v = counts.data[pos]
            w.writerow([step, *pos, v if isinstance(v, int) else repr(float(v))])
    return buf.getvalue()
