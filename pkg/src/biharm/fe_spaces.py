"""Continuous Lagrange finite element spaces of order 1 and 2 on triangles.

Local numbering on the reference triangle (0,0), (1,0), (0,1): vertex
functions first, then (order 2) the midpoint functions of the local edges
01, 12, 20. Global numbering: vertices first, then one dof per mesh edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .mesh import LOCAL_EDGES, Mesh
from .quadrature import edge_rule, triangle_rule

__all__ = [
    "FeSpace",
    "eval_basis",
    "interpolate",
    "element_quadrature",
    "boundary_quadrature",
    "ElementQuadrature",
    "BoundaryQuadrature",
]

REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
_BARY_GRAD = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
_TOL = 1e-12


def n_local(k):
    if k == 1:
        return 3
    if k == 2:
        return 6
    raise ValueError(f"unsupported polynomial order k={k!r} (expected 1 or 2)")


def ref_nodes(k):
    """Reference coordinates of the local nodes."""
    n_local(k)
    if k == 1:
        return REF_VERTICES.copy()
    mids = [0.5 * (REF_VERTICES[a] + REF_VERTICES[b]) for a, b in LOCAL_EDGES]
    return np.vstack([REF_VERTICES, mids])


def eval_basis(k, points):
    """Values and reference gradients of the local shape functions.

    Parameters
    ----------
    k : int
        Polynomial order, 1 or 2.
    points : array_like, shape (2,) or (nq, 2)
        Points in the reference triangle.

    Returns
    -------
    values : ndarray, shape (nq, nloc)
    grads : ndarray, shape (nq, nloc, 2)
    """
    n_local(k)
    p = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = p[:, 0], p[:, 1]
    if np.any(x < -_TOL) or np.any(y < -_TOL) or np.any(x + y > 1.0 + _TOL):
        raise ValueError("point outside the reference triangle")
    lam = np.column_stack([1.0 - x - y, x, y])
    nq = len(p)
    if k == 1:
        values = lam
        grads = np.broadcast_to(_BARY_GRAD, (nq, 3, 2)).copy()
        return values, grads

    values = np.empty((nq, 6))
    grads = np.empty((nq, 6, 2))
    for i in range(3):
        values[:, i] = lam[:, i] * (2.0 * lam[:, i] - 1.0)
        grads[:, i] = (4.0 * lam[:, i] - 1.0)[:, None] * _BARY_GRAD[i]
    for m, (a, b) in enumerate(LOCAL_EDGES):
        values[:, 3 + m] = 4.0 * lam[:, a] * lam[:, b]
        grads[:, 3 + m] = 4.0 * (
            lam[:, b][:, None] * _BARY_GRAD[a] + lam[:, a][:, None] * _BARY_GRAD[b]
        )
    return values, grads


@dataclass(frozen=True, eq=False)
class FeSpace:
    """Lagrange space S_h of order `order` on `mesh`."""

    mesh: Mesh
    order: int

    def __post_init__(self):
        n_local(self.order)

    @property
    def n_local(self):
        return n_local(self.order)

    @cached_property
    def n_dofs(self):
        m = self.mesh
        return m.n_vertices + (len(m.edges) if self.order == 2 else 0)

    @cached_property
    def element_dofs(self):
        """Global dof of each local dof, shape (nt, nloc)."""
        m = self.mesh
        if self.order == 1:
            dofs = m.triangles.copy()
        else:
            dofs = np.hstack([m.triangles, m.triangle_edges + m.n_vertices])
        dofs.setflags(write=False)
        return dofs

    @cached_property
    def dof_coords(self):
        m = self.mesh
        if self.order == 1:
            return m.vertices.copy()
        mids = 0.5 * (m.vertices[m.edges[:, 0]] + m.vertices[m.edges[:, 1]])
        return np.vstack([m.vertices, mids])

    @cached_property
    def boundary_dofs(self):
        m = self.mesh
        dofs = [m.boundary_edges.ravel()]
        if self.order == 2:
            dofs.append(m.boundary_edge_ids + m.n_vertices)
        return np.unique(np.concatenate(dofs))

    @cached_property
    def jacobians(self):
        """Affine map Jacobians, shape (nt, 2, 2); columns are the edge vectors from vertex 0."""
        p = self.mesh.vertices[self.mesh.triangles]
        return np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)

    @cached_property
    def inverse_jacobians(self):
        return np.linalg.inv(self.jacobians)

    def to_physical(self, ref_points, elements=None):
        """Map reference points to every element (or the given elements), shape (ne, nq, 2)."""
        ref = np.atleast_2d(ref_points)
        elems = slice(None) if elements is None else elements
        origin = self.mesh.vertices[self.mesh.triangles[elems, 0]]
        return origin[:, None, :] + np.einsum("eij,qj->eqi", self.jacobians[elems], ref)


def interpolate(space, u):
    """Nodal interpolant of a vectorized callable ``u(x, y)``."""
    xy = space.dof_coords
    values = np.asarray(u(xy[:, 0], xy[:, 1]), dtype=float)
    return np.broadcast_to(values, (space.n_dofs,)).copy()


@dataclass(frozen=True, eq=False)
class ElementQuadrature:
    """Quadrature data on all elements.

    points: (nt, nq, 2) physical points; weights: (nt, nq) including |det J|;
    values: (nq, nloc) shape functions; grads: (nt, nq, nloc, 2) physical gradients.
    """

    points: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    grads: np.ndarray
    ref_points: np.ndarray


def element_quadrature(space, degree):
    rule = triangle_rule(degree)
    values, ref_grads = eval_basis(space.order, rule.points)
    det = np.abs(np.linalg.det(space.jacobians))
    grads = np.einsum("qld,edk->eqlk", ref_grads, space.inverse_jacobians)
    return ElementQuadrature(
        points=space.to_physical(rule.points),
        weights=det[:, None] * rule.weights[None, :],
        values=values,
        grads=grads,
        ref_points=rule.points,
    )


@dataclass(frozen=True, eq=False)
class BoundaryQuadrature:
    """Quadrature data on the marked boundary edges.

    elements: (nbe,) adjacent triangle; points: (nbe, nq, 2); weights:
    (nbe, nq) including h_e; values: (nbe, nq, nloc); grads:
    (nbe, nq, nloc, 2); normals: (nbe, 2); lengths: (nbe,).
    """

    elements: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    grads: np.ndarray
    normals: np.ndarray
    lengths: np.ndarray


def boundary_quadrature(space, degree):
    m = space.mesh
    rule = edge_rule(degree)
    elems = m.boundary_triangles
    nbe, nq, nloc = len(elems), len(rule), space.n_local

    # local edge of the adjacent triangle matching each boundary edge
    local = np.argmax(m.triangle_edges[elems] == m.boundary_edge_ids[:, None], axis=1)
    ref = np.empty((nbe, nq, 2))
    values = np.empty((nbe, nq, nloc))
    ref_grads = np.empty((nbe, nq, nloc, 2))
    t = rule.points[:, None]
    for k, (a, b) in enumerate(LOCAL_EDGES):
        sel = local == k
        pts = (1.0 - t) * REF_VERTICES[a] + t * REF_VERTICES[b]
        v, g = eval_basis(space.order, pts)
        ref[sel] = pts
        values[sel] = v
        ref_grads[sel] = g

    grads = np.einsum("bqld,bdk->bqlk", ref_grads, space.inverse_jacobians[elems])
    origin = m.vertices[m.triangles[elems, 0]]
    points = origin[:, None, :] + np.einsum("bij,bqj->bqi", space.jacobians[elems], ref)
    lengths = m.boundary_edge_lengths
    return BoundaryQuadrature(
        elements=elems,
        points=points,
        weights=lengths[:, None] * rule.weights[None, :],
        values=values,
        grads=grads,
        normals=m.boundary_normals,
        lengths=lengths,
    )
