"""Solving the regularized loss inside one activation cone.

Within a cone the network is linear in beta_i = |a_i| w_i, so the restricted
problem is convex.  This demo solves a few cones, recovers balanced networks,
and shows the certified global optimum lower-bounding every cone.
"""
import numpy as np

from relu_landscape.arrangement import enumerate_patterns, sample_cone_uniform
from relu_landscape.conic import (build_cone_program, global_optimum,
                                  recover_network, regularized_loss, solve,
                                  stationarity_check)
from relu_landscape.data import gen_gaussian_teacher

lam = 0.01
ds = gen_gaussian_teacher(n=4, d=2, teacher_width=10, seed=3)
ps = enumerate_patterns(ds)

print("=== Global optimum over all patterns x both signs ===")
g = global_optimum(ds, lam)
print(f"value {g.objective_value:.8f}   kkt residual {g.kkt_residual:.1e}   "
      f"status {g.status.value}")
net = recover_network(g)
print(f"recovered network: width {net.width}, balanced={net.is_balanced()}")
print(f"stationarity: {stationarity_check(net, ds, lam)}")

print()
print("=== Random cones: value always above the global, some are bad minima ===")
rng = np.random.default_rng(5)
for m in (2, 8, 32):
    A = sample_cone_uniform(ps, m, rng)
    sr = solve(build_cone_program(A, ds, lam))
    cone_net = recover_network(sr)
    _, reg = regularized_loss(cone_net, ds, lam)
    stat = stationarity_check(cone_net, ds, lam)
    tag = ("contains the global value" if sr.objective_value <= g.objective_value + 1e-7
           else ("bad local minimum" if stat.is_stationary else "not stationary"))
    print(f"  m={m:3d}: value {sr.objective_value:.8f} "
          f"(gap {sr.objective_value - g.objective_value:+.2e})  {tag}")
