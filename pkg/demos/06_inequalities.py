# %% [markdown]
# # Empirical constants of the functional inequalities
#
# Each random field is an analytic recipe, so the same corpus can be sampled on
# finer and finer grids.  The largest ratio per inequality should settle to a
# finite value.

# %%
from forcefree.fields import FieldParams
from forcefree.inequalities import random_corpus, refinement_study

corpus = random_corpus(100, seed=0)
consts, spread = refinement_study(corpus, [32, 64, 128], FieldParams())
for level, c in zip((32, 64, 128), consts):
    print(level, {k: f"{v:.4g}" for k, v in c.as_dict().items()})
print("max/min across levels:", {k: round(v, 3) for k, v in spread.items()})
