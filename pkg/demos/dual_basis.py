"""The biorthogonal basis of the vorticity space and what it buys.

Because int mu_i phi_j = c_j delta_ij the coupling matrix D is diagonal,
so phi and p can be eliminated without fill-in.
"""

import numpy as np

from biharm import FeSpace, unit_square_mesh
from biharm.assembly import assemble_D
from biharm.dual_basis import build_dual_coeffs, eval_dual
from biharm.verification import best_approximation_error, estimate_inf_sup

d = build_dual_coeffs(1)
print("linear dual coefficients (mu = alpha phi):")
print(d.coeffs.round(12))
print("mu at the vertex (0,0):", eval_dual(d, [[0.0, 0.0]])[0])
print("mu at the centroid:    ", eval_dual(d, [[1 / 3, 1 / 3]])[0])

for k in (1, 2):
    D = assemble_D(FeSpace(unit_square_mesh(4, "left"), k)).toarray()
    off = np.abs(D - np.diag(np.diag(D))).max()
    print(f"k={k}: D is {D.shape[0]}x{D.shape[0]}, max off-diagonal {off:.1e}, trace {np.trace(D):.15f}")

# Inf-sup constant between the vorticity and multiplier spaces: it should
# not depend on h.
for k in (1, 2):
    betas = [estimate_inf_sup(unit_square_mesh(n), k) for n in (2, 4, 8)]
    print(f"k={k}: beta_h on n=2,4,8 ->", " ".join(f"{b:.4f}" for b in betas))

# Best approximation of a smooth function from span(mu). For k=2 the error
# only halves per refinement: a locally biorthogonal P2 dual basis cannot
# contain all linear functions.
fn = lambda x, y: np.sin(np.pi * x) * np.cos(2 * y)
for k in (1, 2):
    errs = [best_approximation_error(FeSpace(unit_square_mesh(n), k), fn) for n in (8, 16, 32)]
    print(f"k={k}: best-approximation errors", " ".join(f"{e:.2e}" for e in errs))
