# %% [markdown]
# # Volume lower bounds from commuting blocks
#
# If every point of V sees at least k block neighbours in m independent blocks,
# then |V| >= (1+k)^m. Small lamp groups let us check this over every subset.

# %%
import itertools

from folnerkit.isoperimetry import exhaust_product_bound
from folnerkit.wreath import WreathGroup, make_lamp

G = WreathGroup(2, 1, ("t", "b"))
elems = [make_lamp({i: 1 for i, a in enumerate(c) if a}, 0) for c in itertools.product((0, 1), repeat=4)]
blocks = [[G.lamp(i)] for i in range(4)]
rep = exhaust_product_bound(G, elems, blocks, [1])
print(rep.subsets, "subsets,", len(rep.counterexamples), "counterexamples,", rep.tight, "tight")

# %% [markdown]
# ## The first Grigorchuk group
#
# Level-k rigid stabilizers give 2^k commuting elements of length at most 6*2^k.
# That turns into log2 Fol(6*2^k) >= 2^k / 7.

# %%
from folnerkit.isoperimetry import grigorchuk_bound

for k in range(5):
    rep = grigorchuk_bound(k)
    print(f"k={k}: n={rep.n} N={rep.N} log2 Fol >= {rep.exponent}")

# %% [markdown]
# ## Prescribed growth n^(3/2)
#
# Choosing D and the orbit lengths from tau(n) = floor(n^(3/2)) traps the Folner
# function between two explicit bounds at every n <= 64.

# %%
from folnerkit.isoperimetry import corollary32_sandwich

rows = corollary32_sandwich(64)
for r in rows[::8]:
    print(r.to_row())
print(all(r.upper_ok and r.lower_ok for r in rows))
