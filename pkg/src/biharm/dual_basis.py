"""Locally constructed basis of M_h biorthogonal to the basis of Q_h.

On each triangle the dual functions are combinations of the local
Lagrange functions, ``mu_i = sum_l alpha_il phi_l``, with
``alpha = diag(c) M_ref^{-1}`` and ``c_j = int_T phi_j``. Then
``int_T mu_i phi_j = c_j delta_ij`` and, because the phi_j sum to one,
so do the mu_i.

For order 2 the vertex Lagrange functions have zero mean on a triangle, so
``c_j`` would vanish. The multiplier space therefore uses the modified
basis::

    vertex v:  phi_v + 1/5 * (sum of the two edge functions at v)
    edge e:    3/5 * phi_e

which spans the same space, keeps the partition of unity and has
``int_T phi_j > 0`` for every j. The dual functions are biorthogonal to
this modified basis. For order 1 the modification is the identity.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .fe_spaces import eval_basis, n_local
from .mesh import LOCAL_EDGES
from .quadrature import triangle_rule

__all__ = [
    "DualBasis",
    "build_dual_coeffs",
    "eval_dual",
    "reference_mass",
    "multiplier_transform",
    "VERTEX_EDGE_WEIGHT",
    "EDGE_SCALE",
]

VERTEX_EDGE_WEIGHT = 0.2
EDGE_SCALE = 0.6
REF_AREA = 0.5


@dataclass(frozen=True, eq=False)
class DualBasis:
    """Reference-element description of the dual functions.

    Attributes
    ----------
    order : int
    coeffs : ndarray (nloc, nloc)
        alpha, dual functions in terms of the (modified) primal functions.
    transform : ndarray (nloc, nloc)
        Local primal modification, modified = transform @ nodal.
    scaling : ndarray (nloc,)
        c_j on the reference triangle; on a triangle T the constants are
        ``scaling * |T| / (1/2)``.
    """

    order: int
    coeffs: np.ndarray
    transform: np.ndarray
    scaling: np.ndarray

    @property
    def nodal_coeffs(self):
        """Dual functions in terms of the nodal Lagrange functions."""
        return self.coeffs @ self.transform


def reference_mass(k):
    """Lagrange mass matrix on the reference triangle."""
    rule = triangle_rule(2 * k)
    values, _ = eval_basis(k, rule.points)
    return np.einsum("q,qi,qj->ij", rule.weights, values, values)


def _local_transform(k):
    n = n_local(k)
    T = np.eye(n)
    if k == 2:
        for m, (a, b) in enumerate(LOCAL_EDGES):
            T[a, 3 + m] = VERTEX_EDGE_WEIGHT
            T[b, 3 + m] = VERTEX_EDGE_WEIGHT
            T[3 + m, 3 + m] = EDGE_SCALE
    return T


@lru_cache(maxsize=None)
def build_dual_coeffs(k):
    if k not in (1, 2):
        raise ValueError(f"unsupported order k={k!r} for the dual basis (expected 1 or 2)")
    T = _local_transform(k)
    mass = T @ reference_mass(k) @ T.T
    c = mass.sum(axis=1)
    alpha = np.linalg.solve(mass, np.diag(c)).T  # diag(c) M^{-1}, M symmetric
    for arr in (alpha, T, c):
        arr.setflags(write=False)
    return DualBasis(order=k, coeffs=alpha, transform=T, scaling=c)


def eval_dual(d, points):
    """Values of the local dual functions at reference points, shape (nq, nloc)."""
    values, _ = eval_basis(d.order, points)
    return values @ d.nodal_coeffs.T


def multiplier_transform(space):
    """Sparse matrix T with (modified basis)_i = sum_j T_ij (nodal basis)_j.

    Identity for order 1.
    """
    n = space.n_dofs
    if space.order == 1:
        return sp.identity(n, format="csr")
    m = space.mesh
    nv = m.n_vertices
    ne = len(m.edges)
    edge_dofs = nv + np.arange(ne)
    rows = np.concatenate([np.arange(nv), m.edges[:, 0], m.edges[:, 1], edge_dofs])
    cols = np.concatenate([np.arange(nv), edge_dofs, edge_dofs, edge_dofs])
    vals = np.concatenate(
        [
            np.ones(nv),
            np.full(ne, VERTEX_EDGE_WEIGHT),
            np.full(ne, VERTEX_EDGE_WEIGHT),
            np.full(ne, EDGE_SCALE),
        ]
    )
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
