# %% [markdown]
# # Energy, helicity and mean-square potential on a half-plane grid
#
# A field is stored as two potentials on nodes (z_i, r_j) with the axis row
# r = 0 included.  All functionals are trapezoid quadratures.

# %%
import math

import numpy as np

from forcefree.clebsch import (
    ClebschField,
    HalfPlaneGrid,
    clebsch_from_components,
    energy,
    field_components,
    format_dump,
    functionals,
    gen_helicity,
    green_F,
    lift_to_5d_norms,
    parse_dump,
)
from forcefree.fields import FieldParams

p = FieldParams()
grid = HalfPlaneGrid.box(5.0, 5.0, 401, 201)
gauss = lambda z, r: r**2 * np.exp(-z**2 - r**2)
field = ClebschField.from_functions(grid, lambda z, r: p.phi_inf(r) + 3 * gauss(z, r), lambda z, r: gauss(z, r))
print(functionals(field, p))

# %% [markdown]
# Flipping the sign of G flips the helicity exactly.

# %%
print(gen_helicity(field, p), gen_helicity(field.with_G(-field.G), p))

# %% [markdown]
# The energy of r^2 exp(-z^2 - r^2) is 5 pi sqrt(pi/2) / 8.

# %%
print(energy(ClebschField.from_functions(grid, gauss)), 5 * math.pi * math.sqrt(math.pi / 2) / 8)

# %% [markdown]
# Components and back.

# %%
back = clebsch_from_components(*field_components(field), grid)
print("round-trip error in phi:", np.abs(back.phi - field.phi).max())

# %% [markdown]
# The Green kernel's angular integral decays like s^{-3/2}.

# %%
print("F(100) / F(400) =", float(green_F(100.0) / green_F(400.0)))

# %% [markdown]
# Lifting phi / r^2 to five dimensions preserves three norms up to constants.

# %%
print(lift_to_5d_norms(ClebschField.from_functions(HalfPlaneGrid.box(6, 6, 241, 241), gauss)).ratios())

# %% [markdown]
# Dumps are plain text with a header and one "z r phi G" row per node.

# %%
text = format_dump(ClebschField.from_functions(HalfPlaneGrid.box(1, 1, 5, 5), gauss), p)
print("\n".join(text.splitlines()[:12]))
print(parse_dump(text)[1])
