# %% [markdown]
# # Discrete applications
#
# Two discrete counts converge, after rescaling, to exponential functionals
# of (a, b, c) subordinators:
#
# * collisions of a Beta(alpha, beta)-coalescent started from n blocks,
#   divided by n^{2 - alpha};
# * absorption times of a non-decreasing walk under a barrier at n with
#   step tail k^{-c}, divided by n^c.

# %%
import numpy as np

from subexp import BarrierWalk, BetaCoalescent
from subexp import monte_carlo as mc

c = 0.5
walk_limit = 1 / float(BarrierWalk(c).phi(1.0))
for e in range(7, 14):
    n = 2 ** e
    cnt = mc.barrier_walk_absorption(n, c, 20_000, seed=e)
    print(f"n = 2^{e:<2d}  mean / n^c = {cnt.mean() / n ** c:.4f}   limit {walk_limit:.4f}")

# %% [markdown]
# The coalescent converges much more slowly: the relative error decays
# roughly like n^{-(alpha - 1)}, which is n^{-0.2} for alpha = 1.2.

# %%
alpha = 1.2
coal_limit = 1 / float(BetaCoalescent(alpha, 1.0).phi(1.0))
for e in range(7, 14, 2):
    n = 2 ** e
    cnt = mc.beta_coalescent_collisions(n, alpha, 1.0, 2000, seed=e)
    m = cnt.mean() / n ** (2 - alpha)
    print(f"n = 2^{e:<2d}  mean / n^0.8 = {m:.4f}   limit {coal_limit:.4f}   gap {m / coal_limit - 1:+.1%}")
