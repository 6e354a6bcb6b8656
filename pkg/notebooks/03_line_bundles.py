# %% [markdown]
# # Which line bundles on the projective line quantize?
#
# The zero section of the cotangent bundle is a projective line Y.  The
# half-canonical test compares c1(L) - 1/2 c1(K_Y) with the obstruction
# class At, both reduced to a single coordinate in degree two.

# %%
from lagquant.cechdr import Atlas, LineBundle, Overlap, canonical_bundle, chern_class, class_reduce
from lagquant.coeffring import parse_series

t_inv = parse_series("t^-1", ["t"], invertible=["t"], x_degree_cap=40)
P1 = Atlas({"U0": ("t",), "U1": ("s",)}, [Overlap("U0", "U1", {"s": t_inv}, {"t"})])
for d in range(-3, 4):
    L = LineBundle({("U0", "U1"): parse_series(f"t^{d}" if d else "1", ["t"], invertible=["t"])})
    print(f"c1(O({d})) =", class_reduce(P1, chern_class(P1, L)).total())
print("c1(K) =", class_reduce(P1, chern_class(P1, canonical_bundle(P1))).total())

# %% [markdown]
# ## Verdicts for the bundled scenarios
#
# With Moyal charts the solved transition gives At = 0, so L must satisfy
# 2 c1(L) = c1(K) = -2.  O(-1) passes and the trivial bundle fails.  Twisting
# the transition by the non-Hamiltonian field moves At to 1, and then the
# trivial bundle passes instead.

# %%
from lagquant.quantcheck import BUNDLED, load_bundled, run_scenario

for name in BUNDLED:
    print(run_scenario(load_bundled(name)).to_text())
    print()

# %% [markdown]
# Asking for a higher order without supplying the matching period
# coefficients gives an inconclusive verdict rather than a guess.

# %%
print(run_scenario(load_bundled("tP1_Ominus1", order=2)).to_text())
