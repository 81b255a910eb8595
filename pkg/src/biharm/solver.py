"""Solvers for the discrete saddle-point problem.

The weakly imposed formulation is solved by eliminating the vorticity and
the multiplier with the diagonal matrix D (static condensation), giving one
sparse symmetric positive definite system for the stream function::

    (B + A^T D^{-1} M D^{-1} A) u = f - A^T D^{-1} M D^{-1} g
    phi = D^{-1} (g + A u),    p = -D^{-1} M phi

The full 3 x 3 block system can also be solved directly, which is only
meant for checking the elimination on small meshes. :func:`solve_strong_bc`
is the classical two-field scheme with u = g_D imposed strongly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import (
    assemble_lagrange_mass,
    assemble_load,
    assemble_neumann,
    assemble_stiffness,
    assemble_system,
)
from .dual_basis import multiplier_transform
from .fe_spaces import interpolate

__all__ = [
    "Solution",
    "SolverError",
    "SingularMatrixError",
    "ConvergenceError",
    "condense",
    "solve_condensed",
    "pcg",
    "recover_secondary",
    "solve_full_saddle",
    "solve_weak_bc",
    "solve_strong_bc",
]


class SolverError(RuntimeError):
    pass


class SingularMatrixError(SolverError):
    pass


class ConvergenceError(SolverError):
    pass


@dataclass
class Solution:
    """Coefficient vectors of a discrete solution.

    `vorticity_basis` is "dual" when phi is expanded in the dual basis of
    M_h and "lagrange" for the strongly imposed baseline, where phi lives
    in S_h and there is no multiplier.
    """

    u: np.ndarray
    phi: np.ndarray
    p: np.ndarray | None = None
    vorticity_basis: str = "dual"
    info: dict = field(default_factory=dict)

    def p_zero_mean(self, space):
        """The multiplier shifted to zero mean over the domain."""
        if self.p is None:
            return None
        T = multiplier_transform(space)
        mass = T @ assemble_lagrange_mass(space) @ T.T
        ones = np.ones(space.n_dofs)
        area = ones @ (mass @ ones)
        return self.p - (ones @ (mass @ self.p)) / area


def _diagonal(D):
    d = np.asarray(D.diagonal(), dtype=float)
    if np.any(d == 0.0) or not np.all(np.isfinite(d)):
        raise SingularMatrixError("D has a zero diagonal entry")
    return d


def condense(b):
    """Eliminate phi and p; returns the condensed matrix S and right-hand side."""
    dinv = sp.diags(1.0 / _diagonal(b.D))
    W = dinv @ b.M @ dinv
    S = sp.csr_matrix(b.B + b.A.T @ W @ b.A)
    rhs = b.f - b.A.T @ (W @ b.g)
    return S, rhs


def pcg(S, rhs, tol=1e-10, maxiter=None, x0=None):
    """Jacobi-preconditioned conjugate gradients.

    Stops when ``||rhs - S x|| <= tol * ||rhs||``. Returns the solution and
    the number of iterations; raises :class:`ConvergenceError` if the
    iteration cap is reached first.
    """
    n = S.shape[0]
    if maxiter is None:
        maxiter = 10 * n
    diag = S.diagonal()
    if np.any(diag <= 0.0):
        raise SolverError("Jacobi preconditioner needs a positive diagonal")
    minv = 1.0 / diag

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = rhs - S @ x
    target = tol * np.linalg.norm(rhs)
    if np.linalg.norm(r) <= target:
        return x, 0
    z = minv * r
    d = z.copy()
    rz = r @ z
    for it in range(1, maxiter + 1):
        Sd = S @ d
        curv = d @ Sd
        if curv <= 0.0:
            raise SolverError("matrix is not positive definite (non-positive curvature in CG)")
        alpha = rz / curv
        x += alpha * d
        r -= alpha * Sd
        if np.linalg.norm(r) <= target:
            # guard against drift of the recursive residual
            if np.linalg.norm(rhs - S @ x) <= target:
                return x, it
            r = rhs - S @ x
        z = minv * r
        rz_new = r @ z
        d = z + (rz_new / rz) * d
        rz = rz_new
    raise ConvergenceError(f"CG did not reach tol={tol:g} within {maxiter} iterations")


def _spd_factor(S):
    """Sparse LU in symmetric mode without row pivoting; an SPD matrix has a positive pivot sequence."""
    try:
        lu = spla.splu(
            sp.csc_matrix(S),
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:
        raise SingularMatrixError(f"factorization failed: {exc}") from exc
    pivots = lu.U.diagonal()
    if not np.array_equal(lu.perm_r, lu.perm_c) or np.any(pivots <= 0.0):
        raise SolverError("condensed matrix is not positive definite (non-positive pivot)")
    return lu


def solve_condensed(S, rhs, method="direct", tol=1e-10, maxiter=None):
    """Solve the condensed SPD system by sparse factorization or Jacobi-PCG."""
    if method == "direct":
        u = _spd_factor(S).solve(np.asarray(rhs, dtype=float))
    elif method == "cg":
        u, _ = pcg(S, rhs, tol=tol, maxiter=maxiter)
    else:
        raise ValueError(f"unknown solver method {method!r} (expected 'direct' or 'cg')")
    return u


def recover_secondary(b, u):
    """Vorticity and multiplier from the second and third block rows."""
    d = _diagonal(b.D)
    phi = (b.g + b.A @ u) / d
    p = -(b.M @ phi) / d
    return phi, p


def solve_full_saddle(b):
    """Direct solve of the uncondensed 3n x 3n system (small problems only)."""
    n = b.n
    try:
        lu = spla.splu(sp.csc_matrix(b.matrix()))
    except RuntimeError as exc:
        raise SingularMatrixError(f"saddle-point matrix is singular: {exc}") from exc
    x = lu.solve(b.rhs())
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("saddle-point solve produced non-finite values")
    return Solution(u=x[:n], phi=x[n : 2 * n], p=x[2 * n :], info={"method": "saddle"})


def solve_weak_bc(space, f, g_D=None, g_N=None, method="direct", tol=1e-10, maxiter=None):
    """Assemble and solve the weakly imposed problem by static condensation."""
    b = assemble_system(space, f, g_D, g_N)
    S, rhs = condense(b)
    info = {"method": method}
    if method == "cg":
        u, info["iterations"] = pcg(S, rhs, tol=tol, maxiter=maxiter)
    else:
        u = solve_condensed(S, rhs, method=method, tol=tol)
    phi, p = recover_secondary(b, u)
    info["residuals"] = b.residuals(u, phi, p)
    return Solution(u=u, phi=phi, p=p, info=info)


def solve_strong_bc(space, f, g_D=None, g_N=None):
    """Classical mixed scheme with the Dirichlet condition imposed strongly.

    Find u_h in S_h with u_h = I_h g_D on the boundary and phi_h in S_h with::

        int phi_h psi + int grad u_h . grad psi = int_Gamma g_N psi   for all psi in S_h
        int grad phi_h . grad v = -int f v                          for v in S_h, v = 0 on Gamma
    """
    n = space.n_dofs
    bnd = space.boundary_dofs
    inner = np.setdiff1d(np.arange(n), bnd)
    K = assemble_stiffness(space)
    mass = assemble_lagrange_mass(space)

    u = np.zeros(n)
    if g_D is not None:
        u[bnd] = interpolate(space, g_D)[bnd]

    neumann = assemble_neumann(space, g_N)
    rhs_phi = neumann - K[:, bnd] @ u[bnd]
    load = assemble_load(space, f)

    K_in = K[:, inner]
    system = sp.bmat([[mass, K_in], [K_in.T, None]], format="csc")
    rhs = np.concatenate([rhs_phi, -load[inner]])
    try:
        x = spla.splu(system).solve(rhs)
    except RuntimeError as exc:
        raise SingularMatrixError(f"strong-BC system is singular: {exc}") from exc
    phi = x[:n]
    u[inner] = x[n:]

    res1 = mass @ phi + K @ u - neumann
    res2 = K_in.T @ phi + load[inner]
    scale1 = np.linalg.norm(mass @ phi) + np.linalg.norm(K @ u) + np.linalg.norm(neumann)
    scale2 = np.linalg.norm(K_in.T @ phi) + np.linalg.norm(load[inner])
    residuals = (
        float(np.linalg.norm(res1) / scale1) if scale1 > 0 else 0.0,
        float(np.linalg.norm(res2) / scale2) if scale2 > 0 else 0.0,
    )
    return Solution(
        u=u,
        phi=phi,
        p=None,
        vorticity_basis="lagrange",
        info={"method": "strong", "residuals": residuals},
    )
