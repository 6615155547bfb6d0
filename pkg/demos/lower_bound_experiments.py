"""The combinatorial objects behind the passive lower bounds.

1. A random k-linear function looks uniform on q random points until q
   passes about (1 - 1/k) log2 C(n, k); the pair-violation rate shows the
   transition.
2. The number of k-subsets of a random multiset summing to y concentrates
   around its mean C(n, k) / N.
3. Large families of b-sets contain Delta-systems (sunflowers).
4. Random walks on Z_N with d generators: distance to uniform after k-1 and
   k steps.
"""

from math import comb

import numpy as np

from bftest.boolfn import random_points
from bftest.lowerbounds import (
    AbelianGroup,
    cayley_generator_count,
    cayley_mixing_experiment,
    erdos_rado_threshold,
    find_delta_system,
    lemma21_criterion,
    random_set_family,
    sumset_concentration_experiment,
)

rng = np.random.default_rng(5)

n, k = 50, 2
pool = random_points(n, 4 * n, rng)
print(f"1. pi_S pair-violation rate, n = {n}, k = {k}")
for q in (2, 4, 6, 8):
    rep = lemma21_criterion(pool, q, k, 200, rng, n=n)
    print(f"   q = {q:2d}: {rep.pair_rate:.3f}")
print(f"   transition near q = {rep.transition_q:.2f}\n")

print("2. k-subset sums hitting y = 0")
for label, group, size, kk in (("Z_2^4", AbelianGroup.z2q(4), 24, 2), ("Z_2", AbelianGroup.z2q(1), 100, 1)):
    rep = sumset_concentration_experiment(group, size, kk, 0, 2000, rng)
    print(f"   {label}, n = {size}, k = {kk}: mean {rep.mean:.2f} vs C(n,k)/N = "
          f"{float(rep.expected):.2f}, tail {rep.tail_rate:.3f}, regime {rep.regime}")
print()

print("3. Delta-systems in families one above the guarantee")
for a, b in ((3, 1), (3, 2), (4, 2)):
    size = erdos_rado_threshold(a, b) + 1
    universe = next(m for m in range(b, 10 * size) if comb(m, b) >= 2 * size)
    found = sum(find_delta_system(random_set_family(size, b, universe, rng), a) is not None
                for _ in range(100))
    print(f"   a = {a}, b = {b}, {size} sets: found in {found}/100")
print()

N, kk = 10_000, 3
d = cayley_generator_count(N, kk)
print(f"4. Cayley walks on Z_{N}")
for dd in (40, d):
    rep = cayley_mixing_experiment(N, dd, kk, 3, rng)
    print(f"   d = {dd:3d}: TV after {kk - 1} steps {rep.tv_before:.3f}, after {kk} steps {rep.tv_at:.3f}")
print("   no single d gives both a large first and a small second distance at this N")
