"""A tour of the thermoelastic fundamental solution.

Shows the three wave numbers at a Laplace point, how the coupling splits the
longitudinal and thermal modes, and how the kernel reduces to an uncoupled
elastic block plus a Yukawa temperature entry when the coupling is switched off.
"""
import numpy as np

from thermo_tdbem import Material, fundamental_matrix, kernels, specfun

m = Material(rho=1.0, lam=1.3, mu=0.9, gamma=0.5, eta=0.4, kappa=1.1)
s = 1 + 2j

w = kernels.wave_numbers(m, s)
print(f"s = {s}")
print(f"  lambda_1^2 = {w.lam1_sq:.6f}   (thermal-like, near s/kappa = {s / m.kappa:.6f})")
print(f"  lambda_2^2 = {w.lam2_sq:.6f}   (longitudinal-like, near {w.lamp_sq:.6f})")
print(f"  lambda_3^2 = {w.lam3_sq:.6f}   (shear, untouched by coupling)")

# the coupling shows up in the sum of the first two squares
eps = m.gamma * m.eta * m.kappa / (m.lam + 2 * m.mu)
print(f"\ncoupling number eps = {eps:.4f}")
print(f"  sum identity residual: {abs(w.lam1_sq + w.lam2_sq - (s / m.kappa * (1 + eps) + w.lamp_sq)):.2e}")

x, y = np.array([0.7, -0.2]), np.zeros(2)
E = fundamental_matrix(2, m, s, x, y).entries
print("\n2D kernel E(x, 0; s), |entries|:")
print(np.array2string(np.abs(E), precision=4))

dec = Material(rho=1.0, lam=1.3, mu=0.9, gamma=0.0, eta=0.0, kappa=1.1)
Ed = fundamental_matrix(2, dec, s, x, y).entries
r = np.linalg.norm(x)
yuk = specfun.modified_bessel_k(0, np.sqrt(s / dec.kappa) * r) / (2 * np.pi)
print("\nwithout coupling:")
print(f"  temperature entry {Ed[2, 2]:.10f}")
print(f"  Yukawa kernel     {yuk:.10f}")
print(f"  largest coupling entry {np.max(np.abs(np.r_[Ed[:2, 2], Ed[2, :2]])):.1e}")
