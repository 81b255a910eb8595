"""Assembly of the blocks of the discrete saddle-point system.

Unknowns: u (stream function, nodal Lagrange basis of S_h), phi (vorticity,
dual basis mu of M_h) and p (multiplier, basis phi~ of Q_h; phi~ = phi for
order 1 and the modified basis of :mod:`biharm.dual_basis` for order 2).

Sign conventions. With ``<v, Delta_h q> = -int grad v . grad q + int_Gamma dq/dn v``
and ``b_h((v, psi), q) = int psi q - <v, Delta_h q>``::

    K_ij   = int grad phi_i . grad phi_j
    N_ij   = int_Gamma (d phi_j / dn) phi_i
    A_ij   = <phi_j, Delta_h phi~_i>  = (T (-K + N^T))_ij      (q-row i, u-column j)
    B_ij   = sum_e h_e^{-1} int_e phi_i phi_j                   (B_Gamma)
    M_ij   = int mu_i mu_j
    D_ij   = int mu_j phi~_i                                    (diagonal)
    f_i    = int f phi_i + sum_e h_e^{-1} int_e g_D phi_i
    g_i    = int_Gamma g_N phi~_i - int_Gamma (d phi~_i / dn) g_D

so that b_h((v_j, 0), q_i) = -A_ij and b_h((0, mu_j), q_i) = D_ij, giving::

    [ B    0   -A^T ] [u  ]   [f]
    [ 0    M    D   ] [phi] = [0]
    [-A    D    0   ] [p  ]   [g]

Boundary data callables: ``g_D(x, y)`` and ``g_N(x, y, nx, ny)``; the
volume load is ``f(x, y)``. All are evaluated on arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dual_basis import build_dual_coeffs, multiplier_transform, reference_mass
from .fe_spaces import boundary_quadrature, element_quadrature
from .mesh import DegenerateElementError

__all__ = [
    "BlockSystem",
    "assemble_stiffness",
    "assemble_lagrange_mass",
    "assemble_boundary_normal",
    "assemble_A",
    "assemble_nitsche",
    "assemble_dual_mass",
    "assemble_D",
    "assemble_load",
    "assemble_g",
    "assemble_neumann",
    "assemble_system",
    "delta_h",
    "write_coo",
]


def _scatter(dofs, local, n):
    """Sum dense element blocks (ne, a, b) into an n x n CSR matrix."""
    a = dofs.shape[1]
    rows = np.repeat(dofs, a, axis=1).ravel()
    cols = np.tile(dofs, (1, a)).ravel()
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def _scatter_vector(dofs, local, n):
    return np.bincount(dofs.ravel(), weights=local.ravel(), minlength=n)


def _check_dual(space, dual):
    if dual is None:
        return build_dual_coeffs(space.order)
    if dual.order != space.order:
        raise ValueError(f"dual basis order {dual.order} does not match space order {space.order}")
    return dual


def assemble_stiffness(space):
    quad = element_quadrature(space, max(2 * space.order - 2, 1))
    local = np.einsum("eq,eqik,eqjk->eij", quad.weights, quad.grads, quad.grads)
    return _scatter(space.element_dofs, local, space.n_dofs)


def assemble_lagrange_mass(space):
    """Mass matrix of the nodal Lagrange basis."""
    scale = np.abs(np.linalg.det(space.jacobians))  # |T| / (1/2)
    local = scale[:, None, None] * reference_mass(space.order)[None]
    return _scatter(space.element_dofs, local, space.n_dofs)


def assemble_boundary_normal(space):
    """N_ij = int_Gamma (d phi_j / dn) phi_i over the marked boundary edges."""
    bq = boundary_quadrature(space, 2 * space.order)
    dn = np.einsum("bqjk,bk->bqj", bq.grads, bq.normals)
    local = np.einsum("bq,bqi,bqj->bij", bq.weights, bq.values, dn)
    return _scatter(space.element_dofs[bq.elements], local, space.n_dofs)


def assemble_A(space, K=None, N=None):
    """Matrix of <phi_j, Delta_h phi~_i>: rows index Q_h, columns index S_h."""
    if K is None:
        K = assemble_stiffness(space)
    if N is None:
        N = assemble_boundary_normal(space)
    if K.shape != N.shape or K.shape != (space.n_dofs, space.n_dofs):
        raise ValueError(f"dimension mismatch: K {K.shape}, N {N.shape}, n={space.n_dofs}")
    A = multiplier_transform(space) @ (N.T - K)
    return sp.csr_matrix(A)


def assemble_nitsche(space):
    """B_Gamma: the matrix of <u, v>_{1/2,h} = sum_e h_e^{-1} int_e u v."""
    m = space.mesh
    if np.any(m.boundary_edge_lengths <= 0.0):
        raise DegenerateElementError("zero-length boundary edge")
    bq = boundary_quadrature(space, 2 * space.order)
    w = bq.weights / bq.lengths[:, None]
    local = np.einsum("bq,bqi,bqj->bij", w, bq.values, bq.values)
    return _scatter(space.element_dofs[bq.elements], local, space.n_dofs)


def _dual_blocks(space, dual):
    scale = np.abs(np.linalg.det(space.jacobians))  # |T| / (1/2)
    mass = reference_mass(space.order)
    W = dual.nodal_coeffs  # mu = W phi
    T = dual.transform  # phi~ = T phi
    return scale, W @ mass @ W.T, T @ mass @ W.T


def assemble_dual_mass(space, dual=None):
    dual = _check_dual(space, dual)
    scale, mm, _ = _dual_blocks(space, dual)
    return _scatter(space.element_dofs, scale[:, None, None] * mm[None], space.n_dofs)


def assemble_D(space, dual=None):
    """D_ij = int mu_j phi~_i, diagonal by construction."""
    dual = _check_dual(space, dual)
    scale, _, dm = _dual_blocks(space, dual)
    return _scatter(space.element_dofs, scale[:, None, None] * dm[None], space.n_dofs)


def assemble_load(space, f, g_D=None):
    """Right-hand side of the first block row: int f v + <g_D, v>_{1/2,h}."""
    n = space.n_dofs
    quad = element_quadrature(space, 2 * space.order + 2)
    fx = np.broadcast_to(f(quad.points[..., 0], quad.points[..., 1]), quad.weights.shape)
    local = np.einsum("eq,eq,qi->ei", quad.weights, fx, quad.values)
    rhs = _scatter_vector(space.element_dofs, local, n)
    if g_D is not None and len(space.mesh.boundary_edges):
        bq = boundary_quadrature(space, 2 * space.order + 2)
        gx = np.broadcast_to(g_D(bq.points[..., 0], bq.points[..., 1]), bq.weights.shape)
        w = bq.weights / bq.lengths[:, None]
        local = np.einsum("bq,bq,bqi->bi", w, gx, bq.values)
        rhs += _scatter_vector(space.element_dofs[bq.elements], local, n)
    return rhs


def _boundary_data(space, degree):
    bq = boundary_quadrature(space, degree)
    X, Y = bq.points[..., 0], bq.points[..., 1]
    nx = np.broadcast_to(bq.normals[:, None, 0], X.shape)
    ny = np.broadcast_to(bq.normals[:, None, 1], X.shape)
    return bq, X, Y, nx, ny


def assemble_neumann(space, g_N):
    """int_Gamma g_N phi_i in the nodal basis."""
    n = space.n_dofs
    if g_N is None or not len(space.mesh.boundary_edges):
        return np.zeros(n)
    bq, X, Y, nx, ny = _boundary_data(space, 2 * space.order + 2)
    gn = np.broadcast_to(g_N(X, Y, nx, ny), X.shape)
    local = np.einsum("bq,bq,bqi->bi", bq.weights, gn, bq.values)
    return _scatter_vector(space.element_dofs[bq.elements], local, n)


def assemble_g(space, g_N=None, g_D=None):
    """Right-hand side of the third block row in the Q_h basis."""
    nodal = assemble_neumann(space, g_N)
    if g_D is not None and len(space.mesh.boundary_edges):
        bq, X, Y, _, _ = _boundary_data(space, 2 * space.order + 2)
        gd = np.broadcast_to(g_D(X, Y), X.shape)
        dn = np.einsum("bqik,bk->bqi", bq.grads, bq.normals)
        local = np.einsum("bq,bq,bqi->bi", bq.weights, gd, dn)
        nodal = nodal - _scatter_vector(space.element_dofs[bq.elements], local, space.n_dofs)
    return multiplier_transform(space) @ nodal


def delta_h(space, q, grad_q=None, dual=None, D=None):
    """Coefficients of Delta_h q in the dual basis of M_h.

    `q` is either a coefficient vector in S_h or a callable ``q(x, y)``; in
    the latter case `grad_q(x, y)` must return the pair (dq/dx, dq/dy).
    With d the result, ``<phi~_i, Delta_h q> = D_ii d_i`` because D is diagonal.
    """
    dual = _check_dual(space, dual)
    if D is None:
        D = assemble_D(space, dual)
    T = multiplier_transform(space)
    if callable(q):
        if grad_q is None:
            raise ValueError("grad_q is required when q is a callable")
        n = space.n_dofs
        deg = 2 * space.order + 2
        quad = element_quadrature(space, deg)
        gx, gy = grad_q(quad.points[..., 0], quad.points[..., 1])
        g = np.stack(np.broadcast_arrays(gx, gy), axis=-1)
        local = -np.einsum("eq,eqik,eqk->ei", quad.weights, quad.grads, g)
        pairing = _scatter_vector(space.element_dofs, local, n)
        if len(space.mesh.boundary_edges):
            bq = boundary_quadrature(space, deg)
            bx, by = grad_q(bq.points[..., 0], bq.points[..., 1])
            bg = np.stack(np.broadcast_arrays(bx, by), axis=-1)
            dn = np.einsum("bqk,bk->bq", bg, bq.normals)
            local = np.einsum("bq,bq,bqi->bi", bq.weights, dn, bq.values)
            pairing += _scatter_vector(space.element_dofs[bq.elements], local, n)
        pairing = T @ pairing
    else:
        q = np.asarray(q, dtype=float)
        K = assemble_stiffness(space)
        N = assemble_boundary_normal(space)
        pairing = T @ ((N - K) @ q)
    return pairing / D.diagonal()


@dataclass(frozen=True, eq=False)
class BlockSystem:
    """Blocks and load vectors of the saddle-point system (see module docs)."""

    B: sp.csr_matrix
    M: sp.csr_matrix
    D: sp.csr_matrix
    A: sp.csr_matrix
    f: np.ndarray
    g: np.ndarray

    @property
    def n(self):
        return self.B.shape[0]

    def matrix(self):
        """The full 3n x 3n saddle-point matrix."""
        return sp.bmat(
            [[self.B, None, -self.A.T], [None, self.M, self.D], [-self.A, self.D, None]],
            format="csr",
        )

    def rhs(self):
        return np.concatenate([self.f, np.zeros(self.n), self.g])

    def residuals(self, u, phi, p):
        """Relative residual of each block row."""
        rows = (
            ((self.B @ u, -(self.A.T @ p)), self.f),
            ((self.M @ phi, self.D @ p), np.zeros(self.n)),
            ((-(self.A @ u), self.D @ phi), self.g),
        )
        out = []
        for terms, rhs in rows:
            scale = sum(np.linalg.norm(t) for t in terms) + np.linalg.norm(rhs)
            res = np.linalg.norm(terms[0] + terms[1] - rhs)
            out.append(float(res / scale) if scale > 0 else 0.0)
        return tuple(out)


def assemble_system(space, f, g_D=None, g_N=None, dual=None):
    dual = _check_dual(space, dual)
    return BlockSystem(
        B=assemble_nitsche(space),
        M=assemble_dual_mass(space, dual),
        D=assemble_D(space, dual),
        A=assemble_A(space),
        f=assemble_load(space, f, g_D),
        g=assemble_g(space, g_N, g_D),
    )


def write_coo(matrix, path):
    """Write a sparse matrix as 'row col value' lines (0-based)."""
    coo = sp.coo_matrix(matrix)
    with open(path, "w") as fh:
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for i, j, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
            fh.write(f"{i} {j} {v!r}\n")
