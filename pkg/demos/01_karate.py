# coding: utf-8

# # Karate club: two factions from a sparse eigenbasis
#
# Zachary's karate club split into two groups after a dispute. We fit a
# two-column sparse non-negative eigenbasis and read communities off its support.

# In[1]:

import numpy as np

from specc import load_karate, nvi
from specc.selection import select_lambda

g, factions = load_karate()
print(g.n, "nodes,", g.n_edges, "edges")


# Fit the whole threshold path and keep the BIC minimiser.

# In[2]:

lam, path = select_lambda(g, 2, criterion="bic", fit="eig")
best = path.best().basis
print("selected lambda:", lam)
print("nodes in both communities:", best.overlap_count)
print("NVI against the factions:", nvi(best, factions))


# How the support shrinks as the threshold grows

# In[3]:

for e in path.entries:
    print(f"lambda={e.lam:.2f}  support={e.basis.support_size:3d}  "
          f"overlaps={e.basis.overlap_count:2d}  bic={e.bic:9.2f}")


# Membership weights of a few nodes (instructor is node 1, president node 34)

# In[4]:

V = best.V / best.V.max(axis=0)
for i in (0, 2, 8, 33):
    print(g.node_labels()[i], np.round(V[i], 3))
