"""The Gaussian equilibrium of a quadratic game, and the metric toolbox.

With quadratic-bilinear payoffs the entropy-regularized game has a closed
form: each player's equilibrium distribution is a Gaussian centered at the
saddle point with covariance tau * (curvature)^{-1}.  The best-response map
is available symbolically for Gaussian opponents, which gives an independent
route to the same object: applying it once must leave the pair unchanged.

The second half exercises the closed-form divergences (KL, W2, relative
Fisher information) and the functional inequalities tying them together for
strongly log-concave references.
"""

import numpy as np

from minmax_langevin import (
    GaussianDist,
    QuadraticBilinear,
    gaussian_best_response,
    gaussian_kl,
    gaussian_relative_fi,
    gaussian_w2,
    joint_equilibrium,
    quadratic_equilibrium,
)

tau = 0.5
spec = QuadraticBilinear(
    dim=2,
    A=np.array([[2.0, 0.3], [0.3, 1.0]]),
    B=np.array([[1.5, 0.0], [0.0, 1.0]]),
    C=np.array([[0.4, 0.0], [0.2, 0.4]]),
    u=np.array([0.5, -0.5]),
    v=np.array([0.0, 0.3]),
)

nu_x, nu_y = quadratic_equilibrium(spec, tau)
print("== equilibrium pair ==")
print("nu_X mean:", nu_x.mean)
print("nu_X cov:\n", nu_x.cov)
print("nu_Y mean:", nu_y.mean)
print("nu_Y cov:\n", nu_y.cov)

br_x, br_y = gaussian_best_response(spec, tau, nu_x, nu_y)
residual = max(
    np.abs(br_x.mean - nu_x.mean).max(),
    np.abs(br_y.mean - nu_y.mean).max(),
    np.abs(br_x.cov - nu_x.cov).max(),
    np.abs(br_y.cov - nu_y.cov).max(),
)
print(f"\nbest-response fixed-point residual: {residual:.2e}")

print("\n== divergences to a shifted / widened Gaussian ==")
nu_z = joint_equilibrium(spec, tau)
rho = GaussianDist(
    mean=nu_z.mean + 0.25, cov=1.4 * nu_z.cov + 0.05 * np.eye(nu_z.dim)
)
kl = gaussian_kl(rho, nu_z)
w2_sq = gaussian_w2(rho, nu_z)
fi = gaussian_relative_fi(rho, nu_z)
alpha = spec.constants().alpha
print(f"KL(rho || nu_Z)      = {kl:.6f}")
print(f"W2(rho, nu_Z)^2      = {w2_sq:.6f}")
print(f"FI(rho || nu_Z)      = {fi:.6f}")
print(f"talagrand slack      : KL - (alpha/2tau) W2^2 = "
      f"{kl - alpha / (2 * tau) * w2_sq:.6f}  (>= 0)")
print(f"log-sobolev slack    : FI - 2(alpha/tau) KL   = "
      f"{fi - 2 * alpha / tau * kl:.6f}  (>= 0)")
