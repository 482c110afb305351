# coding: utf-8

# # How many communities?
#
# Edge cross-validation holds out node pairs, fills them back in with a
# truncated SVD and scores the held-out error at each K.

# In[1]:

from specc.selection import make_folds, select_k
from specc.simulate import planted_partition

g, Z = planted_partition(150, 3, 0.9, 0.02, seed=0)
k, scores = select_k(g, range(1, 6), plan=make_folds(g.n, 10, seed=0))

for s in scores:
    print(f"K={s.k}  mse={s.mean_mse:.5f}  se={s.se:.5f}  lambda={s.lam:.2f}")
print("chosen K:", k)
