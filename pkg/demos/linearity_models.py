"""Linearity testing under three query models.

The same question (is f linear, or 0.2-far from every linear function?) is
answered with free queries (BLR), with queries restricted to a random pool
(active), and from a random labelled sample (passive).  For each model we
print member acceptance, far rejection and the worst-case number of labels.
"""

from bftest.harness import ExperimentConfig, run_trials
from bftest.testers import active_query_count, blr_soundness_bound

N = 16
TRIALS = 200


def row(tester, **kw):
    out = []
    for target in ("member", "far"):
        cfg = ExperimentConfig(tester, n=N, target=target, eps=0.2, trials=TRIALS, seed=1, **kw)
        results, s = run_trials(cfg)
        out.append((s.acceptance_rate, max(r.queries_used for r in results)))
    (acc, q1), (far_acc, q2) = out
    return acc, 1 - far_acc, max(q1, q2)


print(f"n = {N}, eps = 0.2, {TRIALS} trials per cell\n")
print(f"{'setting':34s} {'accept':>7s} {'reject':>7s} {'labels':>7s}")

for reps in (1, 2, 4):
    acc, rej, q = row("blr", repetitions=reps)
    print(f"{'blr, ' + str(reps) + ' rounds':34s} {acc:7.3f} {rej:7.3f} {q:7d}")
print(f"  one-round acceptance bound at eps = 0.2: {blr_soundness_bound(0.2, 1):.3f}\n")

u = N * N
for reps in (1, 2, 4):
    acc, rej, q = row("active_linear", u=u, repetitions=reps)
    print(f"{'active, u=' + str(u) + ', ' + str(reps) + ' rounds':34s} {acc:7.3f} {rej:7.3f} {q:7d}")
print(f"  dependency size hint ceil(3n / log2 u) = {active_query_count(N, u)}\n")

for q in (14, 16, 18, 22):
    acc, rej, used = row("passive_linear", q=q)
    print(f"{'passive, ' + str(q) + ' samples':34s} {acc:7.3f} {rej:7.3f} {used:7d}")
print("  below n samples the sample rarely spans, so far functions slip through")
