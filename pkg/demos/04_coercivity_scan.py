"""Positivity of the rescaled boundary pairings across the Laplace half-plane.

For each s the Hermitian part of the Z(s)-weighted single-layer and
hypersingular pairings is formed on resolved densities, and its smallest
eigenvalue is printed next to the value predicted by the bound's
s-dependence.
"""
from thermo_tdbem import geometry, kernels, verify

mesh = geometry.make_mesh("circle", 32)
grid = [0.5, 1.0, 2.0 + 10j, 1.0 + 30j]
rep = verify.coercivity_probe(mesh=mesh, s_grid=grid)
print("      s            min eig V     min eig W    sigma*sigma_/|s|")
for s, (v, w) in zip(grid, rep.fitted["min_eigs"]):
    lp = kernels.LaplacePoint(s)
    print(f"{complex(s)!s:>14}   {v: .3e}   {w: .3e}   {lp.sigma * lp.sigma_under / abs(s):.3e}")
print("\nall positive:", rep.passed)
