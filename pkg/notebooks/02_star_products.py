# %% [markdown]
# # Star products and transitions
#
# On a Darboux chart the Moyal product has coefficients P^k / (2^k k!).
# Exact associativity can be checked monomial by monomial.

# %%
from lagquant.starprod import Chart, assoc_defect, moyal, star_apply

U = Chart("U", ("q",), ("p",))
s = moyal(3, U)
q, p = U.series("q"), U.series("p")
print("q*p - p*q =", star_apply(s, q, p) - star_apply(s, p, q))
print("defect:", assoc_defect(s, U.series("q^2"), U.series("p^2"), U.series("q p")))

# %% [markdown]
# ## Two charts on the cotangent bundle of the projective line
#
# Coordinates (t, p) and (s, q) are glued by s = 1/t, q = -t^2 p.  We look
# for a vector field beta1 so that pullback plus h beta1 carries one Moyal
# product to the other.  The solver reports a particular solution and the
# whole kernel of the linear system.

# %%
from lagquant.starprod import is_hamiltonian, solve_beta1

U0 = Chart("U0", ("t",), ("p",), {"t"})
U1 = Chart("U1", ("s",), ("q",))
coord_map = {"s": U0.series("t^-1"), "q": U0.series("-t^2 p")}
sol = solve_beta1(moyal(2, U1), moyal(2, U0), coord_map)
print("beta1 =", {v: str(c) for v, c in sol.field.items()})
print("kernel dimension:", sol.kernel_dimension)

# %% [markdown]
# Most kernel directions are Hamiltonian fields, which amount to a change
# of gauge.  One is not: t^-1 d/dp carries a residue and changes the
# quantization itself.

# %%
for k in sol.kernel:
    if not is_hamiltonian(U0, k):
        print("non-Hamiltonian kernel element:", {v: str(c) for v, c in k.items()})
