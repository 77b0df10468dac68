"""File formats: LSMC binary grid dumps, CSV time series, VTK/CSV meshes.

LSMC dump layout (all little-endian):
    magic "LSMC" | u32 version (1) | u32 dim | u32 shape[dim]
    | f64 origin[dim] | f64 h | f64 values[node_count]
Values are row-major with axis 0 fastest.  Companion masks are raw bytes,
one 0/1 byte per node in the same order, in a ".mask" file.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import ConfigInvalid
from .grid import Grid, ScalarField
from .measures import FrontMesh

__all__ = [
    "write_field",
    "read_field",
    "write_mask",
    "read_mask",
    "write_timeseries_csv",
    "write_front_vtk",
    "write_front_csv",
    "fmt_float",
]

_MAGIC = b"LSMC"
_VERSION = 1


def fmt_float(x: float) -> str:
    """Shortest round-trip decimal form; deterministic across runs."""
    return repr(float(x))


def write_field(path, f: ScalarField) -> None:
    grid = f.grid
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, grid.dim))
        fh.write(struct.pack(f"<{grid.dim}I", *grid.shape))
        fh.write(struct.pack(f"<{grid.dim}d", *grid.origin))
        fh.write(struct.pack("<d", grid.h))
        fh.write(f.flat().astype("<f8").tobytes())


def read_field(path) -> ScalarField:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ConfigInvalid(f"{path}: bad magic {magic!r}")
        version, dim = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ConfigInvalid(f"{path}: unsupported version {version}")
        shape = struct.unpack(f"<{dim}I", fh.read(4 * dim))
        origin = struct.unpack(f"<{dim}d", fh.read(8 * dim))
        (h,) = struct.unpack("<d", fh.read(8))
        count = int(np.prod(shape))
        flat = np.frombuffer(fh.read(8 * count), dtype="<f8")
        if flat.size != count:
            raise ConfigInvalid(f"{path}: truncated value payload")
    grid = Grid(dim=dim, shape=tuple(shape), origin=tuple(origin), h=h)
    values = flat.reshape(shape, order="F").copy()
    return ScalarField(grid, values)


def write_mask(path, mask: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(mask.astype(np.uint8).ravel(order="F").tobytes())


def read_mask(path, shape) -> np.ndarray:
    raw = np.fromfile(path, dtype=np.uint8)
    count = int(np.prod(shape))
    if raw.size != count:
        raise ConfigInvalid(f"{path}: mask size {raw.size} != {count}")
    return raw.reshape(shape, order="F").astype(bool)


def write_timeseries_csv(path, rows) -> None:
    """rows: iterable of (t, enclosed, front, components, sup_v)."""
    with open(path, "w", newline="\n") as fh:
        fh.write("t,enclosed_measure,front_measure,component_count,sup_v\n")
        for t, enc, front, comp, sup in rows:
            fh.write(
                f"{fmt_float(t)},{fmt_float(enc)},{fmt_float(front)},"
                f"{comp},{fmt_float(sup)}\n"
            )


def write_front_vtk(path, mesh: FrontMesh) -> None:
    """Legacy-VTK ASCII polydata: lines in 2D, triangles in 3D."""
    with open(path, "w", newline="\n") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write("levelflow front\nASCII\nDATASET POLYDATA\n")
        if mesh.dim == 2:
            pts = [p for line in mesh.polylines for p in line]
            fh.write(f"POINTS {len(pts)} double\n")
            for p in pts:
                fh.write(f"{fmt_float(p[0])} {fmt_float(p[1])} 0.0\n")
            n_lines = len(mesh.polylines)
            total = sum(len(line) + 1 for line in mesh.polylines)
            fh.write(f"LINES {n_lines} {total}\n")
            offset = 0
            for line in mesh.polylines:
                ids = " ".join(str(offset + i) for i in range(len(line)))
                fh.write(f"{len(line)} {ids}\n")
                offset += len(line)
        else:
            verts = mesh.vertices if mesh.vertices is not None else np.empty((0, 3))
            faces = mesh.faces if mesh.faces is not None else np.empty((0, 3), int)
            fh.write(f"POINTS {len(verts)} double\n")
            for p in verts:
                fh.write(
                    f"{fmt_float(p[0])} {fmt_float(p[1])} {fmt_float(p[2])}\n"
                )
            fh.write(f"POLYGONS {len(faces)} {4 * len(faces)}\n")
            for tri in faces:
                fh.write(f"3 {tri[0]} {tri[1]} {tri[2]}\n")


def write_front_csv(vertex_path, edge_path, mesh: FrontMesh) -> None:
    """Vertex list (index,x,y[,z]) and edge/face list as index pairs/triples."""
    if mesh.dim == 2:
        pts = [p for line in mesh.polylines for p in line]
        edges = []
        offset = 0
        for line, closed in zip(mesh.polylines, mesh.closed):
            for i in range(len(line) - 1):
                edges.append((offset + i, offset + i + 1))
            if closed:
                edges.append((offset + len(line) - 1, offset))
            offset += len(line)
        with open(vertex_path, "w", newline="\n") as fh:
            fh.write("index,x,y\n")
            for i, p in enumerate(pts):
                fh.write(f"{i},{fmt_float(p[0])},{fmt_float(p[1])}\n")
        with open(edge_path, "w", newline="\n") as fh:
            fh.write("v0,v1\n")
            for a, b in edges:
                fh.write(f"{a},{b}\n")
    else:
        verts = mesh.vertices if mesh.vertices is not None else np.empty((0, 3))
        faces = mesh.faces if mesh.faces is not None else np.empty((0, 3), int)
        with open(vertex_path, "w", newline="\n") as fh:
            fh.write("index,x,y,z\n")
            for i, p in enumerate(verts):
                fh.write(
                    f"{i},{fmt_float(p[0])},{fmt_float(p[1])},{fmt_float(p[2])}\n"
                )
        with open(edge_path, "w", newline="\n") as fh:
            fh.write("v0,v1,v2\n")
            for tri in faces:
                fh.write(f"{tri[0]},{tri[1]},{tri[2]}\n")
