"""Triangular meshes of polygonal domains.

A :class:`Mesh` stores vertex coordinates, counter-clockwise triangles and
the list of boundary edges together with the adjacent triangle and the
outward unit normal of each boundary edge. Normals are computed once, when
the mesh is built, and every later consumer (boundary integrals, normal
derivatives) reads them from here.

The plain-text file format written by :func:`write_mesh` is::

    nv nt nbe
    x y            (nv lines)
    i j k          (nt lines, 0-based, counter-clockwise)
    i j            (nbe lines)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "Mesh",
    "MeshError",
    "MeshParseError",
    "DegenerateElementError",
    "unit_square_mesh",
    "refine_uniform",
    "shape_regularity",
    "check_mesh",
    "read_mesh",
    "write_mesh",
]

# local edge k of a triangle joins local vertices LOCAL_EDGES[k]
LOCAL_EDGES = ((0, 1), (1, 2), (2, 0))


class MeshError(ValueError):
    """Invalid mesh data or connectivity."""


class DegenerateElementError(MeshError):
    """A triangle or edge with (numerically) zero measure."""


class MeshParseError(MeshError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def _signed_areas(vertices, triangles):
    p0 = vertices[triangles[:, 0]]
    e1 = vertices[triangles[:, 1]] - p0
    e2 = vertices[triangles[:, 2]] - p0
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangulation with boundary-edge bookkeeping.

    Build instances with :meth:`Mesh.from_arrays`, which orients boundary
    edges and computes their normals.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_triangles: np.ndarray
    boundary_normals: np.ndarray

    @classmethod
    def from_arrays(cls, vertices, triangles, boundary_edges=None):
        """Build a mesh, deriving boundary data from connectivity.

        If `boundary_edges` is None, every edge that belongs to a single
        triangle is a boundary edge. Otherwise the given vertex pairs are
        used (in any orientation); each must be an edge of the mesh. This
        allows marking only part of the geometric boundary as Γ.
        """
        vertices = np.array(vertices, dtype=float).reshape(-1, 2)
        triangles = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        nv = len(vertices)
        if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
            raise MeshError("triangle references a vertex index out of range")

        if len(np.unique(np.sort(triangles, axis=1), axis=0)) != len(triangles):
            raise MeshError("repeated triangle in connectivity")
        if np.any(
            (triangles[:, 0] == triangles[:, 1])
            | (triangles[:, 1] == triangles[:, 2])
            | (triangles[:, 2] == triangles[:, 0])
        ):
            raise DegenerateElementError("triangle with repeated vertex")
        area = _signed_areas(vertices, triangles)
        if np.any(area <= 0.0):
            bad = int(np.flatnonzero(area <= 0.0)[0])
            raise DegenerateElementError(f"triangle {bad} has non-positive signed area")

        # directed half-edges (a, b) in counter-clockwise order per triangle
        half = np.concatenate([triangles[:, list(e)] for e in LOCAL_EDGES])
        owner = np.tile(np.arange(len(triangles)), 3)
        key = np.sort(half, axis=1)
        uniq, inverse, counts = np.unique(
            key, axis=0, return_inverse=True, return_counts=True
        )
        inverse = inverse.ravel()
        if np.any(counts > 2):
            raise MeshError("non-manifold connectivity: edge shared by more than two triangles")

        if boundary_edges is None:
            on_boundary = counts[inverse] == 1
            bedges = half[on_boundary]
            btris = owner[on_boundary]
        else:
            pairs = np.array(boundary_edges, dtype=np.int64).reshape(-1, 2)
            lookup = {tuple(k): i for i, k in enumerate(uniq.tolist())}
            first_half = np.full(len(uniq), -1, dtype=np.int64)
            # any half-edge; boundary edges have exactly one
            first_half[inverse[::-1]] = np.arange(len(half))[::-1]
            bedges = np.empty_like(pairs)
            btris = np.empty(len(pairs), dtype=np.int64)
            for i, (a, b) in enumerate(pairs.tolist()):
                idx = lookup.get((min(a, b), max(a, b)))
                if idx is None:
                    raise MeshError(f"boundary edge ({a}, {b}) is not an edge of the mesh")
                if counts[idx] != 1:
                    raise MeshError(f"boundary edge ({a}, {b}) is shared by two triangles")
                h = first_half[idx]
                bedges[i] = half[h]
                btris[i] = owner[h]

        t = vertices[bedges[:, 1]] - vertices[bedges[:, 0]]
        length = np.hypot(t[:, 0], t[:, 1])
        if np.any(length <= 0.0):
            raise DegenerateElementError("zero-length boundary edge")
        # counter-clockwise traversal: outward normal is the tangent rotated by -90 degrees
        normals = np.column_stack([t[:, 1], -t[:, 0]]) / length[:, None]

        for arr in (vertices, triangles, bedges, btris, normals):
            arr.setflags(write=False)
        return cls(vertices, triangles, bedges, btris, normals)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @cached_property
    def areas(self):
        return _signed_areas(self.vertices, self.triangles)

    @cached_property
    def _edge_data(self):
        half = np.concatenate([self.triangles[:, list(e)] for e in LOCAL_EDGES])
        uniq, inverse = np.unique(np.sort(half, axis=1), axis=0, return_inverse=True)
        tri_edges = inverse.ravel().reshape(3, -1).T.copy()
        uniq.setflags(write=False)
        tri_edges.setflags(write=False)
        return uniq, tri_edges

    @property
    def edges(self):
        """Unique edges as sorted vertex pairs, shape (n_edges, 2)."""
        return self._edge_data[0]

    @property
    def triangle_edges(self):
        """Global edge index of local edge k of each triangle, shape (nt, 3)."""
        return self._edge_data[1]

    @cached_property
    def boundary_edge_ids(self):
        """Global edge index of each boundary edge."""
        lookup = {tuple(k): i for i, k in enumerate(self.edges.tolist())}
        return np.array(
            [lookup[(min(a, b), max(a, b))] for a, b in self.boundary_edges.tolist()],
            dtype=np.int64,
        )

    @cached_property
    def boundary_edge_lengths(self):
        """h_e for every boundary edge."""
        t = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        return np.hypot(t[:, 0], t[:, 1])

    @cached_property
    def diameters(self):
        """h_K: longest edge of each triangle."""
        p = self.vertices[self.triangles]
        lengths = np.stack(
            [np.linalg.norm(p[:, b] - p[:, a], axis=1) for a, b in LOCAL_EDGES], axis=1
        )
        return lengths.max(axis=1)

    @property
    def h_max(self):
        return float(self.diameters.max())

    @property
    def area(self):
        return float(self.areas.sum())

    @property
    def boundary_length(self):
        return float(self.boundary_edge_lengths.sum())

    def same_as(self, other):
        """Exact equality of coordinates and connectivity."""
        return (
            np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.triangles, other.triangles)
            and np.array_equal(self.boundary_edges, other.boundary_edges)
        )


def unit_square_mesh(n, diagonal="right"):
    """Structured mesh of [0, 1]^2 with n x n cells, each cut into two triangles.

    ``diagonal="right"`` cuts cells from lower-left to upper-right,
    ``"left"`` from lower-right to upper-left.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if diagonal not in ("left", "right"):
        raise ValueError(f"diagonal must be 'left' or 'right', got {diagonal!r}")
    n = int(n)
    t = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(t, t)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    j, i = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    v00 = (j * (n + 1) + i).ravel()
    v10 = v00 + 1
    v01 = v00 + n + 1
    v11 = v01 + 1
    if diagonal == "right":
        lower = np.column_stack([v00, v10, v11])
        upper = np.column_stack([v00, v11, v01])
    else:
        lower = np.column_stack([v00, v10, v01])
        upper = np.column_stack([v10, v11, v01])
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)
    return Mesh.from_arrays(vertices, triangles)


def refine_uniform(m):
    """Split every triangle into four congruent children through edge midpoints."""
    nv = m.n_vertices
    edges = m.edges
    mids = 0.5 * (m.vertices[edges[:, 0]] + m.vertices[edges[:, 1]])
    vertices = np.vstack([m.vertices, mids])

    v = m.triangles
    e = m.triangle_edges + nv  # midpoint vertex of local edges 01, 12, 20
    triangles = np.concatenate(
        [
            np.column_stack([v[:, 0], e[:, 0], e[:, 2]]),
            np.column_stack([e[:, 0], v[:, 1], e[:, 1]]),
            np.column_stack([e[:, 2], e[:, 1], v[:, 2]]),
            np.column_stack([e[:, 0], e[:, 1], e[:, 2]]),
        ]
    )
    bmid = m.boundary_edge_ids + nv
    bedges = np.concatenate(
        [
            np.column_stack([m.boundary_edges[:, 0], bmid]),
            np.column_stack([bmid, m.boundary_edges[:, 1]]),
        ]
    )
    return Mesh.from_arrays(vertices, triangles, bedges)


def shape_regularity(m):
    """Largest ratio of diameter to inradius over all triangles."""
    p = m.vertices[m.triangles]
    lengths = np.stack(
        [np.linalg.norm(p[:, b] - p[:, a], axis=1) for a, b in LOCAL_EDGES], axis=1
    )
    inradius = 2.0 * m.areas / lengths.sum(axis=1)
    if np.any(inradius <= 1e-14 * lengths.max(axis=1)):
        raise DegenerateElementError("degenerate triangle in shape-regularity check")
    return float(np.max(lengths.max(axis=1) / inradius))


def check_mesh(m, area=None, rtol=1e-12):
    """Assert the structural invariants of a mesh whose whole boundary is marked.

    Raises :class:`MeshError` on the first violation. If `area` is given,
    the triangle areas must sum to it up to `rtol`.
    """
    if np.any(m.areas <= 0.0):
        raise DegenerateElementError("non-positive triangle area")
    _, counts = np.unique(m.triangle_edges.ravel(), return_counts=True)
    if np.any(counts > 2):
        raise MeshError("edge shared by more than two triangles")
    single = np.flatnonzero(counts == 1)
    if not np.array_equal(np.sort(m.boundary_edge_ids), single):
        raise MeshError("boundary edges do not match edges with one adjacent triangle")
    if not np.allclose(np.linalg.norm(m.boundary_normals, axis=1), 1.0, atol=1e-14):
        raise MeshError("boundary normal is not unit length")
    centroid = m.vertices[m.triangles[m.boundary_triangles]].mean(axis=1)
    midpoint = m.vertices[m.boundary_edges].mean(axis=1)
    if np.any(np.einsum("ij,ij->i", m.boundary_normals, midpoint - centroid) <= 0.0):
        raise MeshError("boundary normal is not outward")
    if area is not None and abs(m.area - area) > rtol * abs(area):
        raise MeshError(f"triangle areas sum to {m.area!r}, expected {area!r}")


def write_mesh(m, path):
    lines = [f"{m.n_vertices} {m.n_triangles} {len(m.boundary_edges)}"]
    lines += [f"{float(x)!r} {float(y)!r}" for x, y in m.vertices]
    lines += [f"{i} {j} {k}" for i, j, k in m.triangles.tolist()]
    lines += [f"{i} {j}" for i, j in m.boundary_edges.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path):
    """Read a mesh written by :func:`write_mesh`.

    Raises :class:`MeshParseError` naming the offending line for malformed
    or truncated files, and :class:`MeshError` for invalid connectivity.
    """
    text = Path(path).read_text().splitlines()
    if not text:
        raise MeshParseError("empty file", 1)

    def ints(lineno, n):
        if lineno > len(text):
            raise MeshParseError("unexpected end of file", lineno)
        parts = text[lineno - 1].split()
        if len(parts) != n:
            raise MeshParseError(f"expected {n} integers, got {len(parts)} fields", lineno)
        try:
            return [int(p) for p in parts]
        except ValueError:
            raise MeshParseError(f"expected integers, got {text[lineno - 1]!r}", lineno) from None

    def floats(lineno):
        if lineno > len(text):
            raise MeshParseError("unexpected end of file", lineno)
        parts = text[lineno - 1].split()
        if len(parts) != 2:
            raise MeshParseError(f"expected 2 coordinates, got {len(parts)} fields", lineno)
        try:
            return [float(p) for p in parts]
        except ValueError:
            raise MeshParseError(f"expected coordinates, got {text[lineno - 1]!r}", lineno) from None

    nv, nt, nbe = ints(1, 3)
    if min(nv, nt, nbe) < 0:
        raise MeshParseError("negative count in header", 1)
    line = 2
    vertices = [floats(line + i) for i in range(nv)]
    line += nv
    triangles = [ints(line + i, 3) for i in range(nt)]
    line += nt
    bedges = [ints(line + i, 2) for i in range(nbe)]
    line += nbe
    extra = [i for i in range(line, len(text) + 1) if text[i - 1].strip()]
    if extra:
        raise MeshParseError("more records than declared in header", extra[0])
    return Mesh.from_arrays(
        np.array(vertices, dtype=float).reshape(-1, 2),
        np.array(triangles, dtype=np.int64).reshape(-1, 3),
        np.array(bedges, dtype=np.int64).reshape(-1, 2),
    )
