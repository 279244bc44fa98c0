"""How many activation patterns can n points in R^d support?

Walks through the combinatorial layer: enumerating the realizable neuron
patterns of a small dataset, checking the closed-form count, and watching the
two cone samplers agree on orthogonal data.
"""
import numpy as np

from relu_landscape.arrangement import (cover_count, enumerate_patterns,
                                        pattern_of, sample_cone_network,
                                        sample_cone_uniform)
from relu_landscape.data import gen_gaussian_teacher, gen_orthogonal, zero_teacher

print("=== Enumerating activation patterns ===")
ds = gen_gaussian_teacher(n=4, d=2, teacher_width=10, seed=7)
ps = enumerate_patterns(ds)
print(f"n=4 points in R^2: {len(ps)} realizable data-bit patterns "
      f"(closed form: {cover_count(4, 2)} neuron patterns / 2 signs = "
      f"{cover_count(4, 2) // 2})")
for bits, w in zip(ps.patterns, ps.witnesses):
    realized = pattern_of(w, 1.0, ds).data_bits
    print(f"  pattern {''.join(map(str, bits))}  witness {np.round(w, 3)}"
          f"  realized={realized == tuple(bits)}")

print()
print("=== The count grows with n and saturates at 2^n when d >= n ===")
for n, d in ((4, 2), (8, 2), (8, 4), (8, 8), (8, 20)):
    print(f"  n={n:2d} d={d:2d}: {cover_count(n, d):6d} neuron patterns")

print()
print("=== Orthogonal data: every bit-vector is a pattern, sampled uniformly ===")
ds = gen_orthogonal(n=3, d=5, labeler=zero_teacher(5), seed=1)
ps = enumerate_patterns(ds)
print(f"n=3 orthogonal points: {len(ps)} patterns (= 2^3)")
rng = np.random.default_rng(0)
A_uni = sample_cone_uniform(ps, 30_000, rng)
A_net = sample_cone_network(ds, 30_000, rng)
for A, name in ((A_uni, "uniform"), (A_net, "random network")):
    counts = {}
    for i in range(A.m):
        key = "".join(map(str, A.bits[i]))
        counts[key] = counts.get(key, 0) + 1
    spread = (max(counts.values()) - min(counts.values())) / A.m
    print(f"  {name:15s}: {len(counts)} distinct patterns, "
          f"max-min frequency spread {spread:.3f}")
