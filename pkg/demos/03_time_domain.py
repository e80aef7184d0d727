"""Time-domain exterior Dirichlet problem by convolution quadrature.

A causal pulse drives an interior point source. The boundary data and the
exact field at a probe are produced by CQ of the known Laplace-domain kernel,
the boundary problem is solved at every contour frequency, and the probe
signal is printed. Nothing happens before the pulse starts, and halving the
time step shrinks the error.
"""
import numpy as np

from thermo_tdbem import geometry, tdcq, verify

m = verify.DEFAULT_MATERIAL
mesh = geometry.make_mesh("circle", 32)
y0, c = np.array([0.2, -0.1]), np.array([1.0, -0.5, 0.7])
src = tdcq.point_source_symbol(m, 2, y0, c)
probe = np.array([[2.0, 0.0]])
T, onset = 12.0, 3.0

results = {}
for n in (48, 96):
    grid = tdcq.TimeGrid(T / n, n)
    cfg = tdcq.CQConfig("bdf2")
    pulse = tdcq.Signal(tdcq.causal_window(grid.times, onset)[:, None], grid.dt)
    data = tdcq.cq_convolve(lambda s: src(mesh.nodes)(s)[:, None], grid, cfg, pulse, hermitian=True)
    exact = tdcq.cq_convolve(lambda s: src(probe)(s)[:, None], grid, cfg, pulse, hermitian=True)
    _, field = tdcq.cq_solve_bvp("dirichlet", m, mesh, grid, cfg, data, probe)
    results[n] = (grid, field.samples[:, 0, :].real, exact.samples.real)

grid, u, ue = results[96]
print("  t      u_1(probe)    u_2(probe)    theta(probe)")
for k in range(0, 97, 8):
    print(f"{grid.times[k]:5.2f}  " + "  ".join(f"{v: .5e}" for v in u[k]))

pre = np.max(np.abs(u[grid.times < onset])) / np.max(np.abs(u))
print(f"\nlargest value before onset, relative to peak: {pre:.1e}")
coarse = results[48][1]
print(f"difference between 48 and 96 steps at shared times: {np.max(np.abs(coarse - u[::2])) / np.max(np.abs(u)):.2e}")
