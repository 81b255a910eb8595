"""Static condensation of the three-field system.

The 3n x 3n saddle-point matrix

    [ B    0   -A^T ]
    [ 0    M    D   ]
    [-A    D    0   ]

reduces to one SPD system (B + A^T D^-1 M D^-1 A) u = f - A^T D^-1 M D^-1 g
because D is diagonal. Here both routes are compared, and the condensed
system is also solved with Jacobi-preconditioned CG.
"""

import time

import numpy as np

from biharm import FeSpace, get_case, unit_square_mesh
from biharm.assembly import assemble_system
from biharm.solver import condense, pcg, recover_secondary, solve_condensed, solve_full_saddle

case = get_case("nonhomogeneous")

for n in (4, 16):
    space = FeSpace(unit_square_mesh(n), 1)
    b = assemble_system(space, case.f, case.g_D, case.g_N)

    t0 = time.perf_counter()
    full = solve_full_saddle(b)
    t_full = time.perf_counter() - t0

    t0 = time.perf_counter()
    S, rhs = condense(b)
    u = solve_condensed(S, rhs)
    phi, p = recover_secondary(b, u)
    t_cond = time.perf_counter() - t0

    diff = max(np.abs(u - full.u).max(), np.abs(phi - full.phi).max(), np.abs(p - full.p).max())
    print(f"n={n}: {b.n} dofs per field, full {3 * b.n}x{3 * b.n} vs condensed {b.n}x{b.n}")
    print(f"  max difference {diff:.1e}; times full {t_full * 1e3:.1f} ms, condensed {t_cond * 1e3:.1f} ms")
    print("  block residuals", " ".join(f"{r:.1e}" for r in b.residuals(u, phi, p)))

    x, its = pcg(S, rhs, tol=1e-10)
    print(f"  Jacobi-PCG: {its} iterations, |u_cg - u_direct| = {np.abs(x - u).max():.1e}")
