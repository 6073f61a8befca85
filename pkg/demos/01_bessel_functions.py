# %% [markdown]
# # Bessel functions of half-integer order
#
# Orders 1/2, 3/2 and 5/2 have closed forms in sin and cos; orders 0 and 1 come
# from scipy.  Near the origin the closed forms cancel badly, so small
# arguments go through the power series instead.

# %%
import numpy as np
from scipy import special

from forcefree.specfun import C32, bessel_j, bessel_series, first_positive_root

# %% [markdown]
# The first zero of J_{3/2} solves tan x = x.

# %%
c = first_positive_root(1.5)
print(f"first zero of J_3/2: {c:.15f}")
print(f"tan(c) - c          = {np.tan(c) - c:.2e}")

# %% [markdown]
# Agreement with scipy over a wide range, including the series branch.

# %%
x = np.geomspace(1e-6, 80, 400)
for order in (0.5, 1.5, 2.5):
    err = np.max(np.abs(bessel_j(order, x) - special.jv(order, x)))
    print(f"order {order}: max |J - scipy| = {err:.2e}")

# %% [markdown]
# The series at x = 1 with 30 terms, next to the closed form.

# %%
print(float(bessel_series(1.5, 1.0, terms=30)), bessel_j(1.5, 1.0))

# %% [markdown]
# The three-term recurrence J_{1/2} + J_{5/2} = (3/x) J_{3/2}, measured against
# the size of its terms.

# %%
j12, j32, j52 = (bessel_j(o, x) for o in (0.5, 1.5, 2.5))
scale = np.abs(j12) + np.abs(3 / x * j32)
print("worst relative recurrence defect:", np.max(np.abs(j12 + j52 - 3 / x * j32) / scale))
print("C32 constant exported by the module:", C32)
