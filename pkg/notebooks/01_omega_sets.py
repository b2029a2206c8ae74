# %% [markdown]
# # The sets Omega_D(n) in two-step nilpotent wreath-like groups
#
# Omega_D(n) collects the elements whose shift and lamp supports lie in [0, n].
# Its inner boundary ratio is always 2/(n+1), whatever D is; D only changes the size.

# %%
from fractions import Fraction

from folnerkit.nilpotent2 import DSpec, Nil2Group, OmegaSet, commutator_rank, omega_cardinality

families = {"{}": DSpec.empty(), "{2,6,7}": DSpec.finite({2, 6, 7}), "all": DSpec.all(), "evens": DSpec.evens()}
for name, D in families.items():
    G = Nil2Group(D, variant="D")
    print(name, [str(OmegaSet(G, n).boundary_ratio()) for n in range(1, 9)])

# %% [markdown]
# Sizes grow like 2^(n^2/2) when D is empty and like 2^n when D is everything.
# The central part is a GF(2) space whose rank is computed from actual commutators.

# %%
for name, D in families.items():
    G = Nil2Group(D, variant="D")
    sizes = [omega_cardinality(G, n) for n in range(1, 9)]
    ranks = [commutator_rank(G, n) for n in range(1, 9)]
    print(f"{name:8s} log2|Omega| = {[s.bit_length() - 1 for s in sizes]}  rank = {ranks}")

# %% [markdown]
# ## Satisfactory subsets
#
# The extraction pipeline needs a boundary ratio at most (1/24)/r. Omega never
# gets there at desk scale, so the pipeline refuses and reports the exact ratio.

# %%
from folnerkit.errors import HypothesisError
from folnerkit.isoperimetry import theorem11_pipeline, tset_from_words

G = Nil2Group(DSpec.empty(), variant="D")
T = tset_from_words(G, [["z"], ["z^-1"]])
try:
    theorem11_pipeline(G, OmegaSet(G, 6), T)
except HypothesisError as exc:
    print("rejected:", exc.ratio, "needed", exc.required)

# %% [markdown]
# Intervals of Z are far better behaved: 48 points already meet the precondition.

# %%
from folnerkit.wreath import WreathGroup, make_lamp

line = WreathGroup(2, 1, ("t",))
V = {make_lamp({}, z) for z in range(48)}
cert = theorem11_pipeline(line, V, tset_from_words(line, [["t"], ["t^-1"]]))
print(cert.size, "of", len(V), "points kept at threshold", cert.threshold)
print(Fraction(cert.size, len(V)))
