# %% [markdown]
# # Weyl algebra and the standard module
#
# Elements are stored normal ordered: every x factor to the left of every y
# factor, with [y_j, x_i] = delta_ij h.  Multiplying two normal-ordered
# monomials only needs the reordering coefficients of y^b x^c.

# %%
from fractions import Fraction

from lagquant.weyl import SpMatrix, WeylElement, parse_weyl, sigma_embed, weyl_bracket

print(parse_weyl("y1^2 x1^2"))
print(weyl_bracket(parse_weyl("y1"), parse_weyl("x1^3")))

# %% [markdown]
# ## Quadratic elements
#
# A matrix a in sp(2n) acts on span(x, y).  Dividing its quadratic
# element by h gives sigma(a), whose bracket reproduces the linear action.

# %%
a = SpMatrix.from_blocks([[1, 2], [0, -1]], [[0, 0], [0, 0]], [[1, 0], [0, 3]])
s = sigma_embed(a)
print("sigma(a) =", s)
for w in WeylElement.generators(2):
    print(f"  [sigma(a), {w}] = {weyl_bracket(s, w)}   a({w}) = {a.apply(w)}")

# %% [markdown]
# ## The module k[[x, h]]
#
# x acts by multiplication and y by h times a derivative.  A matrix that
# fixes span(y) sends the generator 1 to a multiple of itself; the factor is
# half the trace of its upper-left block, which is minus half the trace on
# span(y).

# %%
from lagquant.lagmodule import act, parabolic, sigma_weight_report, unit

p = parabolic([[2, 1], [0, 1]], [[1, 1], [1, 0]])
print(act(sigma_embed(p), unit(2)))
print(sigma_weight_report(p))

# %% [markdown]
# ## Lifting a twisted action
#
# Data f_j describe a candidate action y_j(1) = f_j.  When the one-form
# sum (f_j / h) dx_j is closed it integrates to g, and m = exp(-g) is
# killed by every y_j.

# %%
import random

from lagquant.lagmodule import lift_module, random_integrable_data

data = random_integrable_data(random.Random(3), 2, x_degree_cap=4, hbar_order=3)
print(data.to_json())
result = lift_module(data)
print("g =", result.g)
print("verified:", result.verified)
