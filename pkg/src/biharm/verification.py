"""Manufactured solutions, mesh-dependent norms, errors and rate estimates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .assembly import assemble_D, assemble_dual_mass, assemble_lagrange_mass
from .dual_basis import build_dual_coeffs, multiplier_transform
from .fe_spaces import FeSpace, boundary_quadrature, element_quadrature, interpolate

__all__ = [
    "ManufacturedCase",
    "get_case",
    "CASES",
    "boundary_inner",
    "boundary_norm",
    "norm_half_h",
    "norm_1h",
    "field_errors",
    "energy_error",
    "convergence_rates",
    "estimate_inf_sup",
    "best_approximation_error",
    "dual_projection",
    "interpolation_errors",
]

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ManufacturedCase:
    """Exact data for Delta^2 u = f with u = g_D, du/dn = g_N on the boundary of [0,1]^2.

    ``phi = Delta u`` and ``p = -phi``. `grad` returns the pair of partial
    derivatives; `g_N` takes the outward normal components as extra arguments.
    """

    name: str
    u: Field
    grad: Callable
    phi: Field
    f: Field

    def p(self, x, y):
        return -self.phi(x, y)

    def g_D(self, x, y):
        return self.u(x, y)

    def g_N(self, x, y, nx, ny):
        gx, gy = self.grad(x, y)
        return gx * nx + gy * ny


def _separable(name, a, b):
    """u = a(x) b(y); `a` and `b` list a function and its first four derivatives."""

    def u(x, y):
        return a[0](x) * b[0](y)

    def grad(x, y):
        return a[1](x) * b[0](y), a[0](x) * b[1](y)

    def phi(x, y):
        return a[2](x) * b[0](y) + a[0](x) * b[2](y)

    def f(x, y):
        return a[4](x) * b[0](y) + 2.0 * a[2](x) * b[2](y) + a[0](x) * b[4](y)

    return ManufacturedCase(name, u, grad, phi, f)


def _homogeneous():
    pi = np.pi
    # sin^2(pi t) and its derivatives
    s = [
        lambda t: np.sin(pi * t) ** 2,
        lambda t: pi * np.sin(2 * pi * t),
        lambda t: 2 * pi**2 * np.cos(2 * pi * t),
        lambda t: -4 * pi**3 * np.sin(2 * pi * t),
        lambda t: -8 * pi**4 * np.cos(2 * pi * t),
    ]
    return _separable("homogeneous", s, s)


def _polynomial():
    # t^2 (1 - t)^2
    s = [
        lambda t: t**2 * (1 - t) ** 2,
        lambda t: 2 * t - 6 * t**2 + 4 * t**3,
        lambda t: 2 - 12 * t + 12 * t**2,
        lambda t: -12 + 24 * t,
        lambda t: np.full_like(np.asarray(t, dtype=float), 24.0),
    ]
    return _separable("polynomial", s, s)


def _nonhomogeneous():
    pi = np.pi

    def u(x, y):
        return np.cos(pi * x) * np.cos(pi * y) + x**3 * y

    def grad(x, y):
        return (
            -pi * np.sin(pi * x) * np.cos(pi * y) + 3 * x**2 * y,
            -pi * np.cos(pi * x) * np.sin(pi * y) + x**3,
        )

    def phi(x, y):
        return -2 * pi**2 * np.cos(pi * x) * np.cos(pi * y) + 6 * x * y

    def f(x, y):
        return 4 * pi**4 * np.cos(pi * x) * np.cos(pi * y)

    return ManufacturedCase("nonhomogeneous", u, grad, phi, f)


CASES = {
    "homogeneous": _homogeneous,
    "nonhomogeneous": _nonhomogeneous,
    "polynomial": _polynomial,
}


def get_case(name):
    try:
        return CASES[name]()
    except KeyError:
        raise KeyError(f"unknown case {name!r}; registered: {', '.join(sorted(CASES))}") from None


# -- boundary norms ----------------------------------------------------------


def _trace(space, v, degree):
    bq = boundary_quadrature(space, degree)
    vals = np.einsum("bqi,bi->bq", bq.values, np.asarray(v)[space.element_dofs[bq.elements]])
    return bq, vals


def boundary_inner(space, v, w, s=0.5):
    """sum_e h_e^{-2s} int_e v w for coefficient vectors v, w in S_h."""
    if not len(space.mesh.boundary_edges):
        return 0.0
    bq, vv = _trace(space, v, 2 * space.order)
    _, ww = _trace(space, w, 2 * space.order)
    scale = bq.lengths ** (-2.0 * s)
    return float(np.sum(scale[:, None] * bq.weights * vv * ww))


def boundary_norm(space, v, s=0.5):
    return float(np.sqrt(max(boundary_inner(space, v, v, s), 0.0)))


def norm_half_h(space, v):
    """||v||_{1/2,h} = (sum_e h_e^{-1} int_e v^2)^{1/2}."""
    return boundary_norm(space, v, 0.5)


def _h1_sq(space, v):
    quad = element_quadrature(space, 2 * space.order)
    c = np.asarray(v)[space.element_dofs]
    vals = c @ quad.values.T
    grads = np.einsum("eqlk,el->eqk", quad.grads, c)
    return float(np.sum(quad.weights * (vals**2 + np.sum(grads**2, axis=-1))))


def norm_1h(space, v):
    """||v||_{1,h} = (||v||_{1,Omega}^2 + ||v||_{1/2,h}^2)^{1/2}."""
    return float(np.sqrt(_h1_sq(space, v) + norm_half_h(space, v) ** 2))


# -- errors against exact solutions ----------------------------------------


def _error_degree(space):
    return 2 * space.order + 4


def _vorticity_values(space, coeffs, ref_values, basis, dual=None):
    c = np.asarray(coeffs)[space.element_dofs]
    if basis == "dual":
        dual = dual or build_dual_coeffs(space.order)
        return c @ (ref_values @ dual.nodal_coeffs.T).T
    if basis == "lagrange":
        return c @ ref_values.T
    raise ValueError(f"unknown vorticity basis {basis!r}")


def field_errors(space, case, sol, dual=None):
    """Error norms of a discrete solution against a manufactured case.

    Returns a dict with keys l2_u, h1_u (full H1 norm), half_h_u, h1h_u,
    l2_phi and energy = sqrt(l2_phi^2 + h1h_u^2).
    """
    quad = element_quadrature(space, _error_degree(space))
    X, Y = quad.points[..., 0], quad.points[..., 1]
    cu = np.asarray(sol.u)[space.element_dofs]
    uh = cu @ quad.values.T
    guh = np.einsum("eqlk,el->eqk", quad.grads, cu)
    gx, gy = case.grad(X, Y)
    eu = case.u(X, Y) - uh
    egx = gx - guh[..., 0]
    egy = gy - guh[..., 1]
    l2_u = np.sum(quad.weights * eu**2)
    semi = np.sum(quad.weights * (egx**2 + egy**2))

    phih = _vorticity_values(space, sol.phi, quad.values, sol.vorticity_basis, dual)
    l2_phi = np.sum(quad.weights * (case.phi(X, Y) - phih) ** 2)

    half = 0.0
    if len(space.mesh.boundary_edges):
        bq = boundary_quadrature(space, _error_degree(space))
        trace = np.einsum("bqi,bi->bq", bq.values, np.asarray(sol.u)[space.element_dofs[bq.elements]])
        diff = case.u(bq.points[..., 0], bq.points[..., 1]) - trace
        half = np.sum(bq.weights / bq.lengths[:, None] * diff**2)

    h1h = l2_u + semi + half
    return {
        "l2_u": float(np.sqrt(l2_u)),
        "h1_u": float(np.sqrt(l2_u + semi)),
        "half_h_u": float(np.sqrt(half)),
        "h1h_u": float(np.sqrt(h1h)),
        "l2_phi": float(np.sqrt(l2_phi)),
        "energy": float(np.sqrt(l2_phi + h1h)),
    }


def energy_error(space, case, sol, dual=None):
    """sqrt(||phi - phi_h||_0^2 + ||u - u_h||_{1,h}^2)."""
    return field_errors(space, case, sol, dual)["energy"]


def convergence_rates(errors, hs):
    """Observed orders log(e_j / e_{j+1}) / log(h_j / h_{j+1}).

    Entries where either error is zero are reported as NaN.
    """
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if errors.shape != hs.shape or errors.ndim != 1:
        raise ValueError("errors and hs must be 1-d sequences of equal length")
    if len(hs) < 2:
        raise ValueError("at least two levels are needed for a rate")
    if np.any(np.diff(hs) >= 0.0):
        raise ValueError("mesh sizes must be strictly decreasing")
    rates = []
    for j in range(len(hs) - 1):
        e0, e1 = errors[j], errors[j + 1]
        if e0 <= 0.0 or e1 <= 0.0:
            rates.append(float("nan"))
        else:
            rates.append(float(np.log(e0 / e1) / np.log(hs[j] / hs[j + 1])))
    return rates


# -- inf-sup and approximation oracles ---------------------------------------


def estimate_inf_sup(mesh, k):
    """Discrete inf-sup constant between M_h and S_h in L2 (dense).

    The smallest singular value of L_S^{-1} D L_M^{-T}, with L_S, L_M the
    Cholesky factors of the Q_h mass matrix and the dual mass matrix.
    """
    space = FeSpace(mesh, k)
    T = multiplier_transform(space)
    mass_s = (T @ assemble_lagrange_mass(space) @ T.T).toarray()
    dual = build_dual_coeffs(k)
    mass_m = assemble_dual_mass(space, dual).toarray()
    D = assemble_D(space, dual).toarray()
    Ls = np.linalg.cholesky(mass_s)
    Lm = np.linalg.cholesky(mass_m)
    G = sla.solve_triangular(Ls, D, lower=True)
    G = sla.solve_triangular(Lm, G.T, lower=True).T
    return float(sla.svdvals(G).min())


def dual_projection(space, fn, dual=None):
    """Coefficients of the L2-orthogonal projection of `fn` onto span(M_h)."""
    dual = dual or build_dual_coeffs(space.order)
    quad = element_quadrature(space, _error_degree(space))
    mu = quad.values @ dual.nodal_coeffs.T
    fx = fn(quad.points[..., 0], quad.points[..., 1])
    local = np.einsum("eq,eq,qi->ei", quad.weights, fx, mu)
    b = np.bincount(space.element_dofs.ravel(), weights=local.ravel(), minlength=space.n_dofs)
    M = assemble_dual_mass(space, dual)
    return spla.spsolve(M.tocsc(), b)


def best_approximation_error(space, fn, dual=None):
    """min over lambda_h in M_h of ||fn - lambda_h||_0."""
    dual = dual or build_dual_coeffs(space.order)
    c = dual_projection(space, fn, dual)
    quad = element_quadrature(space, _error_degree(space))
    vals = _vorticity_values(space, c, quad.values, "dual", dual)
    diff = fn(quad.points[..., 0], quad.points[..., 1]) - vals
    return float(np.sqrt(np.sum(quad.weights * diff**2)))


def interpolation_errors(space, fn, grad):
    """L2 and H1-seminorm errors of the nodal interpolant of `fn`."""
    c = interpolate(space, fn)[space.element_dofs]
    quad = element_quadrature(space, _error_degree(space))
    X, Y = quad.points[..., 0], quad.points[..., 1]
    e = fn(X, Y) - c @ quad.values.T
    gh = np.einsum("eqlk,el->eqk", quad.grads, c)
    gx, gy = grad(X, Y)
    semi = (gx - gh[..., 0]) ** 2 + (gy - gh[..., 1]) ** 2
    return float(np.sqrt(np.sum(quad.weights * e**2))), float(np.sqrt(np.sum(quad.weights * semi)))
