# Roots of psi(rho) = q for a double-exponential model and the two
# Wiener-Hopf factors they produce.
import numpy as np

from levy_ifpt.levy_model import kou
from levy_ifpt.spectral import cramer_lundberg_roots, lambda_star, phi_bar, theta_star
from levy_ifpt.wiener_hopf import psi_minus, psi_plus, wh_product_residual

model = kou(sigma=0.2, eta=-0.3, ell=1.0, p=0.4, alpha_up=10.0, alpha_down=5.0)
print("mean drift      ", model.mean())
print("theta*, lambda* ", theta_star(model), lambda_star(model))

for q in [2.0, 0.5, -0.5 * lambda_star(model)]:
    rs = cramer_lundberg_roots(model, q)
    print(f"q = {q:+.4f}  plus {np.round(rs.plus_roots.real, 6)}  minus {np.round(rs.minus_roots.real, 6)}")

lam = 0.5 * lambda_star(model)
print("phi_bar(-lam)   ", phi_bar(model, lam))

theta = np.linspace(-3, 3, 7)
print(np.c_[theta, np.abs(psi_plus(model, 0.5, theta)), np.abs(psi_minus(model, 0.5, theta))])
print("max product residual", max(wh_product_residual(model, q, t)
                                  for q in (0.5, -lam, 1 + 2j) for t in theta))
