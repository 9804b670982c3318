"""From target accuracy to runnable parameters, with the bound calculators.

Given curvature constants (alpha, L), temperature tau, dimension d and a
target KL accuracy eps for the average particle, the recipe produces a step
size, a particle count, an iteration count, and a warm-start schedule whose
combination certifies the target.  The constants are proof artifacts, so the
counts are loose in practice; they are upper envelopes, not estimates.
"""

from minmax_langevin import (
    kl_bias_bound,
    plan_parameters,
    transient_kl_envelope,
    variance_and_fisher_bounds,
)

alpha, smooth_l, tau, d = 1.0, 1.0, 1.0, 1

print("== accuracy -> parameters ==")
print(f"{'eps':>8} {'eta':>12} {'N':>8} {'iterations':>12} {'gd_iters':>9}")
for eps in [0.5, 0.1, 0.02]:
    plan = plan_parameters(alpha, smooth_l, tau, d, eps, z_star_norm_sq=4.0)
    print(f"{eps:>8} {plan.eta:>12.3e} {plan.n_particles:>8} "
          f"{plan.iters:>12} {plan.gd_iters:>9}")

print("\n== bound calculators at eps = 0.1 ==")
plan = plan_parameters(alpha, smooth_l, tau, d, 0.1, z_star_norm_sq=4.0)
var_bound, fi_bound = variance_and_fisher_bounds(
    alpha, smooth_l, tau, 2 * d, z_star_norm_sq=4.0
)
print(f"equilibrium variance bound (joint dimension): {var_bound}")
print(f"initialization Fisher-information bound:      {fi_bound}")

bias = kl_bias_bound(alpha, smooth_l, tau, d, plan.n_particles, plan.eta,
                     var_bound)
print(f"stationary KL bias bound:                     {bias:.6f}")

print("\n== transient envelope along the planned run ==")
kl0, w20 = 3.0, 1.5  # joint-state divergences of the initialization
print(f"{'step':>9} {'KL envelope':>12}")
for k in [0, plan.iters // 4, plan.iters // 2, plan.iters]:
    env = transient_kl_envelope(kl0, w20, alpha, smooth_l, tau, plan.eta, k,
                                bias, plan.n_particles)
    print(f"{k:>9} {env:>12.6f}")
