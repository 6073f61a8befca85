# %% [markdown]
# # The explicit axisymmetric force-free field
#
# Inside the ball of radius R = c / sqrt(lambda) the flux is a Bessel profile;
# outside it is the potential flow past a sphere.  The swirl G equals
# sqrt(lambda) times the positive part of the flux.

# %%
import math

import numpy as np

from forcefree.clebsch import ClebschField, HalfPlaneGrid, gen_helicity
from forcefree.fields import FieldParams, G_C, U_C, ball_band, f_C, forcefree_residual, helicity_constant_hC, phi_C

p = FieldParams(W=2.0, lam=1.0)
print(f"ball radius R = {p.R:.6f}")

# %% [markdown]
# The flux vanishes on the sphere and approaches -W r^2 / 2 far away.

# %%
theta = np.linspace(0.1, math.pi - 0.1, 5)
print("on the sphere:", phi_C(p.R * np.cos(theta), p.R * np.sin(theta), p))
r_far = 10 * p.R * np.sin(theta)
print("far field ratio:", phi_C(10 * p.R * np.cos(theta), r_far, p) / (-0.5 * p.W * r_far**2))

# %% [markdown]
# Far from the ball the field tends to the uniform field -W e_z.

# %%
print(U_C(0.0, 10 * p.R, p))

# %% [markdown]
# The helicity constant from a 1-D quadrature, and the same number from the
# 2-D grid quadrature of the sampled field.

# %%
hC = helicity_constant_hC(p)
grid = HalfPlaneGrid.box(4 * p.R, 4 * p.R, 513, 257)
field = ClebschField.from_functions(grid, lambda z, r: phi_C(z, r, p) + p.phi_inf(r), lambda z, r: G_C(z, r, p))
print(f"h_C = {hC:.10g}, grid value = {gen_helicity(field, p):.10g}")

# %% [markdown]
# The discrete residual of curl U - f U falls at first order once a band of
# three cells around the sphere, where f jumps, is left out.

# %%
prev = None
for n in (64, 128, 256):
    g = HalfPlaneGrid(-2 * p.R, 2 * p.R, 2 * p.R, n + 1, n // 2 + 1)
    res = forcefree_residual(lambda Z, R: U_C(Z, R, p), lambda Z, R: f_C(Z, R, p), g, exclude=ball_band(p.R))
    print(n, res, "" if prev is None else f"order {math.log2(prev / res):.2f}")
    prev = res
