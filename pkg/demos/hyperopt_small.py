"""
A small hyperparameter search
=============================

Differential evolution over (mu, g_max, epsilon, c_min). The full search
repeats 100 rounds of 100 x 100 evaluations; this one takes about a minute.
"""

from cprfit import MetaConfig, de_optimize

cfg = MetaConfig(de_pop=10, de_iters=5, rounds=2, n_freqs=5, seed=0)
result = de_optimize(cfg, progress=lambda r, it, best: print(f"round {r} iter {it:2d} best {best:.4f}"))

for name, stats in result.summary.items():
    print(f"{name:8s} mean {stats['mean']:8.3f}  sd {stats['sd']:7.3f}  [{stats['min']:.3f}, {stats['max']:.3f}]")
print(len(result.trace), "vectors evaluated")
