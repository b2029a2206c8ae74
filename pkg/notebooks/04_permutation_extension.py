# %% [markdown]
# # Finitary permutations of Z, extended by the shift
#
# Generators: the shift t and the transposition s = (0 1). The shortest word
# for (0 h) has length 4|h| - 3.

# %%
from folnerkit.symext import SymExtGroup, transposition_word_length

G = SymExtGroup(1)
for h in range(1, 7):
    w = G.origin_transposition_word(h)
    print(h, len(w), " ".join(w))

# %%
print([[transposition_word_length(a, b) for b in range(-3, 4) if b != a] for a in range(-3, 4)])

# %% [markdown]
# ## Counting permutations through slices
#
# The recursive counter never exceeds |V| and is exact on the full symmetric group.

# %%
import itertools
import math
import random

from folnerkit.symext import certified_count, satisfactory_degree

rng = random.Random(0)
for n in range(2, 7):
    allp = list(itertools.permutations(range(n)))
    V = set(rng.sample(allp, len(allp) // 2))
    print(n, len(V), certified_count(V, n), satisfactory_degree(V, n), math.factorial(n))
