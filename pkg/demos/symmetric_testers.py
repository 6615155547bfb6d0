"""Testing symmetry and partial symmetry from random samples.

A symmetric function depends only on Hamming weight, so any two sampled
points of equal weight with different labels refute it.  With about
n^(1/4) samples such collisions already appear, which the first table shows.
The second part runs the partially symmetric tester for k = 1 on members
and on random functions.
"""

import numpy as np

from bftest.boolfn import SeededRandom, dictator, majority
from bftest.families import Family, sample_uniform
from bftest.testers import (
    QueryOracle,
    psf_passive_sample_size,
    psf_tester,
    same_weight_probability,
    symmetric_passive_sample_size,
    symmetric_tester,
)

rng = np.random.default_rng(3)
TRIALS = 300

print("symmetric tester, passive sample of ceil(8 n^(1/4)) points")
print(f"{'n':>5s} {'q':>4s} {'P[same weight]':>15s} {'majority acc':>13s} {'dictator rej':>13s}")
for n in (16, 32, 64):
    q = symmetric_passive_sample_size(n)
    maj = sum(symmetric_tester(QueryOracle.passive(majority(n), q, rng), rng=rng).accepted
              for _ in range(TRIALS))
    dic = sum(not symmetric_tester(QueryOracle.passive(dictator(n, 0), q, rng), rng=rng).accepted
              for _ in range(TRIALS))
    p = float(same_weight_probability(n))
    print(f"{n:5d} {q:4d} {p:15.4f} {maj / TRIALS:13.3f} {dic / TRIALS:13.3f}")

n, k = 32, 1
F = Family("psym", n, k)
q = psf_passive_sample_size(n, k, 0.2)
print(f"\npartially symmetric tester, n = {n}, k = {k}, {q} samples")
members = sum(psf_tester(QueryOracle.passive(sample_uniform(F, rng), q, rng), k, rng=rng).accepted
              for _ in range(100))
others = sum(not psf_tester(QueryOracle.passive(SeededRandom(n, int(rng.integers(2 ** 62))), q, rng),
                            k, rng=rng).accepted for _ in range(100))
print(f"members accepted: {members}/100, random functions rejected: {others}/100")
