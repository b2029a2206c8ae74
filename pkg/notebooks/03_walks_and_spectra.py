# %% [markdown]
# # Random walks and Dirichlet eigenvalues
#
# Walks run in fixed blocks of trials with spawned seeds, so thread count never
# changes the output.

# %%
import math

import numpy as np

from folnerkit.core import GroupSpec
from folnerkit.walks import WalkConfig, log_slope, simulate

LINE = GroupSpec("wreath", {"p": 2, "d": 1}, ("t",))
LAMP = GroupSpec("wreath", {"p": 2, "d": 1}, ("t", "b"))

stats = simulate(WalkConfig(LINE, (2500,), 20000, master_seed=1))
print("Z: drift/sqrt(n) =", stats.drift[2500][0] / 50, "vs", math.sqrt(2 / math.pi))

# %% [markdown]
# On the lamplighter the drift is still diffusive, with slope near 1/2 on a log-log plot.

# %%
ns = np.unique(np.logspace(2, 3.5, 6).astype(int))
stats = simulate(WalkConfig(LAMP, tuple(ns), 1000, master_seed=2))
print("slope", log_slope(ns, [stats.drift[n][0] for n in ns]))

# %% [markdown]
# ## Return probabilities by exact convolution

# %%
from fractions import Fraction

from folnerkit.walks import return_probability_exact

G = LAMP.build()
for n in range(1, 7):
    p = return_probability_exact(G, n)
    print(n, p, float(p))

# %% [markdown]
# ## Dirichlet eigenvalues of balls
#
# lambda r^2 stays bounded on both Z and the lamplighter. The survival
# probability from the top of the ground state beats (1 - lambda)^n.

# %%
from folnerkit.walks import dirichlet_lambda, survival_bound_check

for spec in (LINE, LAMP):
    G = spec.build()
    for r in (4, 8, 12):
        rep = dirichlet_lambda(G, r)
        s = survival_bound_check(G, r, 1000, report=rep)
        print(spec.generator_labels, r, rep.ball_size, round(rep.lam * r * r, 4), s.log_stay >= s.log_lower)
