"""Small versus large initialization under weight decay (short runs).

Trains the same width-20 network on anchor-center data from two scales.  The
small-scale run aligns all surviving neurons to a single direction and lands
on the rank-1 plateau predicted in closed form; the large-scale run keeps
several directions and heads toward the global value instead.
"""
import numpy as np

from relu_landscape.conic import global_optimum
from relu_landscape.data import covariance_spectrum, gen_assumption1
from relu_landscape.flow import (InitMode, TrainConfig, diagnostics,
                                 distinct_directions, theta_in_Theta_ustar, train)
from relu_landscape.theory import make_theory_context

ds = gen_assumption1(3, seed=5)
lam = 1e-5
g = global_optimum(ds, lam)
ctx = make_theory_context(ds, lam)
print(f"global value {g.objective_value:.8e}")
print(f"rank-1 plateau value {ctx.L_lambda_star:.8e} "
      f"(gap {ctx.L_lambda_star - g.objective_value:.2e})")
print(f"mse bound lambda^2/mu_min = {lam ** 2 / covariance_spectrum(ds).mu_min:.2e}")
print()

for alpha in (2.0 ** -9, 2.0 ** -1):
    cfg = TrainConfig(alpha=alpha, lam=lam, width=20, max_epochs=200_000,
                      seed=42, init_mode=InitMode.SPHERE_BALANCED)
    res = train(cfg, ds, g.objective_value)
    d = diagnostics(res.state, ds, cfg)
    near_rank1 = theta_in_Theta_ustar(res.theta, ctx.u_star, tol=0.05)
    print(f"alpha = 2^{int(np.log2(alpha))}: epochs={res.epochs_run} "
          f"mse={res.mse:.2e} |theta|^2={res.theta_sq_norm:.3f} "
          f"gap={res.gap:.2e}")
    print(f"   distinct directions={distinct_directions(res.theta)} "
          f"(of {np.sum(res.theta.a > 0)} positive neurons), "
          f"balance drift={d.balance_drift:.1e}, "
          f"near the rank-1 family: {near_rank1}")
